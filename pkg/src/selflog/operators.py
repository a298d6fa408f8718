"""Profile-driven mock operator backend.

One OperatorService instance stands in for one mobile operator: it turns
carrier attribution into sessions according to its auth-flow variant, serves
the fourteen passive fields through the profile's exposure policy, runs the
active operations, and emits owner notifications where the policy demands
them. Everything the attacker can or cannot do against an operator is decided
here by data, not code paths.
"""

from __future__ import annotations

import hashlib
import random
import threading
from dataclasses import dataclass
from enum import Enum

from .carrier import Carrier, SmsKind
from .errors import (
    InsufficientCredit,
    InvalidSession,
    TooShort,
    UnknownField,
    UnknownRecipient,
)
from .msisdn import Msisdn, parse_msisdn
from .profiles import (
    ACTIVE_OPS,
    PASSIVE_FIELDS,
    AuthFlow,
    ExposureMode,
    OperatorProfile,
    OpMode,
    SelfLoginMode,
)
from .subscribers import SubscriberRecord
from .transport import OperatorResponse, Request, Status, denied, not_found, ok, redirect


class SessionOrigin(str, Enum):
    SELF_LOGIN = "self_login"
    PASSWORD_LOGIN = "password_login"
    COOKIE_HANDSHAKE = "cookie_handshake"


@dataclass(frozen=True)
class Session:
    token: str
    msisdn: Msisdn
    origin: SessionOrigin
    issued_at: int


# Route name for each passive field and active op.
FIELD_ROUTES = {
    "name": "personal-data/name",
    "surname": "personal-data/surname",
    "msisdn": "personal-data/msisdn",
    "tax_code": "personal-data/tax-code",
    "birth_date": "personal-data/birth-date",
    "birth_place": "personal-data/birth-place",
    "address": "personal-data/address",
    "active_offers": "sim/offers",
    "credit": "sim/credit",
    "pin": "sim/pin",
    "puk": "sim/puk",
    "calls": "history/calls",
    "sms_senders": "history/sms-senders",
    "voicemail": "history/voicemail",
}
FIELD_BY_ROUTE = {route: field for field, route in FIELD_ROUTES.items()}

OP_ROUTES = {
    "activate_services": "op/activate-service",
    "change_password": "op/change-password",
    "change_pin": "op/change-pin",
    "transfer_credit": "op/transfer-credit",
    "set_unavailable": "op/set-unavailable",
    "disable_spending_limit": "op/disable-spending-limit",
}
OP_BY_ROUTE = {route: op for op, route in OP_ROUTES.items()}

PERSONAL_DATA_FIELDS = ("name", "surname", "msisdn", "tax_code", "birth_date",
                        "birth_place", "address")

LANDING_ROUTE = "personal-data"
AUTH_SERVER_ROUTE = "auth"
LOGIN_ROUTE = "login"
PASSWORD_LOGIN_ROUTE = "password-login"
SELF_LOGIN_SETTING_ROUTE = "op/self-login-setting"


def obfuscate(number: Msisdn) -> str:
    """Mask the last three digits of a rendered number, keeping its length."""
    if len(number.subscriber) < 4:
        raise TooShort(number.render())
    rendered = number.render()
    return rendered[:-3] + "***"


def _hash_password(password: str, salt: str) -> str:
    return hashlib.sha256(f"{salt}:{password}".encode("utf-8")).hexdigest()


class OperatorService:
    """One operator backend bound to a carrier and a set of customer records."""

    def __init__(self, profile: OperatorProfile, carrier: Carrier,
                 records: list[SubscriberRecord], rng: random.Random,
                 portal_passwords: dict[str, str] | None = None):
        self.profile = profile
        self.carrier = carrier
        self._rng = rng
        self._lock = threading.RLock()
        self._customers: dict[str, SubscriberRecord] = {
            rec.msisdn.render(): rec for rec in records}
        self._sessions: dict[str, Session] = {}
        self._self_login_enabled: dict[str, bool] = {
            key: True for key in self._customers}
        self._spending_limit: dict[str, bool] = {key: True for key in self._customers}
        self._salt = f"{rng.getrandbits(64):016x}"
        self._passwords: dict[str, str] = {}
        portal_passwords = portal_passwords or {}
        for key in self._customers:
            password = portal_passwords.get(key, f"pw-{rng.getrandbits(40):010x}")
            self._passwords[key] = _hash_password(password, self._salt)

    @property
    def name(self) -> str:
        return self.profile.display_name

    def is_customer(self, msisdn: Msisdn) -> bool:
        return msisdn.render() in self._customers

    def customer_record(self, msisdn: Msisdn) -> SubscriberRecord:
        try:
            return self._customers[msisdn.render()]
        except KeyError:
            raise UnknownRecipient(msisdn.render()) from None

    def customer_msisdns(self) -> list[str]:
        return sorted(self._customers)

    def spending_limit_active(self, msisdn: Msisdn) -> bool:
        return self._spending_limit[msisdn.render()]

    # --- session issuance -------------------------------------------------

    def _mint(self, msisdn: Msisdn, origin: SessionOrigin) -> Session:
        token = f"{self._rng.getrandbits(128):032x}"
        session = Session(token, msisdn, origin, self.carrier.clock.now())
        self._sessions[token] = session
        return session

    def self_login(self, attribution: Msisdn | None) -> Session | None:
        """Session from traffic attribution alone; None means denied."""
        with self._lock:
            if attribution is None:
                return None
            if self.profile.self_login is SelfLoginMode.DISABLED:
                return None
            key = attribution.render()
            if key not in self._customers:
                return None
            if not self._self_login_enabled[key]:
                return None
            return self._mint(attribution, SessionOrigin.SELF_LOGIN)

    def password_login(self, msisdn: Msisdn, password: str) -> Session | None:
        with self._lock:
            key = msisdn.render()
            if key not in self._customers:
                return None
            if self._passwords[key] != _hash_password(password, self._salt):
                return None
            return self._mint(msisdn, SessionOrigin.PASSWORD_LOGIN)

    def cookie_handshake(self, attribution: Msisdn | None) -> str | None:
        """The auth-server step of the cookie flow; binds the cookie to the
        MSISDN attributed at handshake time."""
        with self._lock:
            if self.profile.auth_flow is not AuthFlow.COOKIE_HANDSHAKE:
                return None
            if attribution is None or attribution.render() not in self._customers:
                return None
            return self._mint(attribution, SessionOrigin.COOKIE_HANDSHAKE).token

    def session_for(self, token: str | None) -> Session:
        if token is None or token not in self._sessions:
            raise InvalidSession(str(token))
        return self._sessions[token]

    def verify_password(self, msisdn: Msisdn, password: str) -> bool:
        key = msisdn.render()
        return (key in self._passwords
                and self._passwords[key] == _hash_password(password, self._salt))

    # --- passive data -----------------------------------------------------

    @staticmethod
    def _field_value(record: SubscriberRecord, field_name: str):
        if field_name == "msisdn":
            return record.msisdn.render()
        if field_name == "birth_date":
            return record.birth_date.isoformat()
        if field_name == "birth_place":
            return record.birth_place_name
        if field_name in ("calls", "sms_senders"):
            entries = record.call_history if field_name == "calls" else record.sms_senders
            return [{"number": number.render(), "tick": tick} for number, tick in entries]
        if field_name == "active_offers":
            return list(record.active_offers)
        if field_name == "voicemail":
            return list(record.voicemail)
        return getattr(record, field_name)

    def get_field(self, session_token: str, field_name: str) -> OperatorResponse:
        """Read one passive field through the exposure policy."""
        session = self.session_for(session_token)
        if field_name not in PASSIVE_FIELDS:
            raise UnknownField(field_name)
        mode = self.profile.exposure.mode(field_name)
        record = self._customers[session.msisdn.render()]
        if mode is ExposureMode.HIDDEN:
            return denied("field hidden")
        if mode is ExposureMode.PASSWORD_REQUIRED:
            if session.origin is not SessionOrigin.PASSWORD_LOGIN:
                return denied("password required")
            return ok({field_name: self._field_value(record, field_name)})
        if mode is ExposureMode.OBFUSCATED:
            entries = record.call_history if field_name == "calls" else record.sms_senders
            masked = [{"number": obfuscate(number), "tick": tick}
                      for number, tick in entries]
            return ok({field_name: masked})
        if mode is ExposureMode.EXPOSED_WITH_NOTIFICATION:
            value = self._field_value(record, field_name)
            self.carrier.send_sms(
                record.msisdn,
                f"Security notice: your {field_name.upper()} was accessed via self-login.",
                SmsKind.OWNER_NOTIFICATION,
            )
            return ok({field_name: value}, notifications=1)
        return ok({field_name: self._field_value(record, field_name)})

    # --- active operations --------------------------------------------------

    def active_op(self, session_token: str, op: str, args: dict | None = None) -> OperatorResponse:
        """Run one active operation through the profile's op policy."""
        session = self.session_for(session_token)
        args = args or {}
        mode = self.profile.op_mode(op)
        if mode is OpMode.DENIED:
            return denied("operation not permitted")
        if mode is OpMode.PASSWORD_REQUIRED and session.origin is not SessionOrigin.PASSWORD_LOGIN:
            return denied("password required")
        with self._lock:
            return self._run_op(session, op, args)

    def _run_op(self, session: Session, op: str, args: dict) -> OperatorResponse:
        record = self._customers[session.msisdn.render()]
        if op == "activate_services":
            offer = args.get("offer", "extra-option")
            if offer not in record.active_offers:
                record.active_offers.append(offer)
            return ok({"activated": offer})
        if op == "change_password":
            new_password = args["new_password"]
            self._passwords[session.msisdn.render()] = _hash_password(new_password, self._salt)
            return ok({"password_changed": True})
        if op == "change_pin":
            record.pin = args["new_pin"]
            return ok({"pin_changed": True})
        if op == "transfer_credit":
            return self._transfer(record, args)
        if op == "set_unavailable":
            flag = bool(args.get("unavailable", True))
            self.carrier.set_unavailable(record.msisdn, flag)
            return ok({"unavailable": flag})
        if op == "disable_spending_limit":
            self._spending_limit[session.msisdn.render()] = False
            return ok({"spending_limit": False})
        raise UnknownField(op)

    def _transfer(self, sender: SubscriberRecord, args: dict) -> OperatorResponse:
        recipient_number = args["to"]
        amount = int(args["amount_cents"])
        if amount <= 0:
            raise InsufficientCredit("amount must be positive")
        recipient_msisdn = (recipient_number if isinstance(recipient_number, Msisdn)
                            else parse_msisdn(recipient_number))
        key = recipient_msisdn.render()
        if key not in self._customers:
            raise UnknownRecipient(key)
        if sender.credit < amount:
            raise InsufficientCredit(f"balance {sender.credit} < {amount}")
        recipient = self._customers[key]
        sender.credit -= amount
        recipient.credit += amount
        return ok({"transferred_cents": amount, "remaining_cents": sender.credit})

    def set_self_login(self, session_token: str, enabled: bool) -> OperatorResponse:
        """Customers may toggle self-login only where the profile allows it."""
        session = self.session_for(session_token)
        if self.profile.self_login is not SelfLoginMode.DEFAULT_ON_DEACTIVATABLE:
            return denied("self-login setting not customer-controllable")
        with self._lock:
            self._self_login_enabled[session.msisdn.render()] = bool(enabled)
        return ok({"self_login_enabled": bool(enabled)})

    # --- transport dispatch -------------------------------------------------

    def _attribution(self, request: Request) -> Msisdn | None:
        if request.connection_id is None:
            return None
        return self.carrier.attribute(request.connection_id)

    def _token_of(self, request: Request) -> str | None:
        return request.session or request.cookie

    def handle(self, request: Request) -> OperatorResponse:
        """Route a transport request to the operator operations."""
        route, method = request.route, request.method.upper()
        post_api = self.profile.auth_flow is AuthFlow.POST_API_SELF_LOGIN

        if route == LOGIN_ROUTE:
            if self.profile.auth_flow in (AuthFlow.PASSWORD_ONLY, AuthFlow.COOKIE_HANDSHAKE):
                return (denied("password required")
                        if self.profile.auth_flow is AuthFlow.PASSWORD_ONLY
                        else not_found("no self-login page; see auth server"))
            session = self.self_login(self._attribution(request))
            if session is None:
                return denied("self-login denied")
            return ok({"session": session.token})

        if route == AUTH_SERVER_ROUTE:
            if self.profile.auth_flow is not AuthFlow.COOKIE_HANDSHAKE:
                return not_found()
            cookie = self.cookie_handshake(self._attribution(request))
            if cookie is None:
                return denied("no attribution")
            return ok({"cookie": cookie})

        if route == PASSWORD_LOGIN_ROUTE:
            if not request.credentials:
                return denied("credentials required")
            username, password = request.credentials
            try:
                msisdn = parse_msisdn(username)
            except Exception:
                return denied("bad username")
            session = self.password_login(msisdn, password)
            if session is None:
                return denied("bad credentials")
            return ok({"session": session.token})

        if route == SELF_LOGIN_SETTING_ROUTE:
            if method != "POST":
                return not_found("POST only")
            try:
                return self.set_self_login(self._token_of(request),
                                           bool(request.params.get("enabled", False)))
            except InvalidSession:
                return denied("invalid session")

        if route == LANDING_ROUTE:
            return self._handle_landing(request)

        if route in FIELD_BY_ROUTE:
            if post_api and method != "POST":
                return not_found("POST only")
            return self._handle_field(request, FIELD_BY_ROUTE[route])

        if route in OP_BY_ROUTE:
            if method != "POST":
                return not_found("POST only")
            try:
                return self.active_op(self._token_of(request), OP_BY_ROUTE[route],
                                      request.params)
            except InvalidSession:
                return self._unauthenticated(request)
            except (InsufficientCredit, UnknownRecipient) as exc:
                return denied(f"{type(exc).__name__}: {exc}")

        return not_found()

    def _unauthenticated(self, request: Request) -> OperatorResponse:
        if self.profile.auth_flow is AuthFlow.COOKIE_HANDSHAKE:
            return redirect(AUTH_SERVER_ROUTE)
        return denied("session required")

    def _handle_field(self, request: Request, field_name: str) -> OperatorResponse:
        try:
            return self.get_field(self._token_of(request), field_name)
        except InvalidSession:
            return self._unauthenticated(request)

    def _handle_landing(self, request: Request) -> OperatorResponse:
        """Aggregate personal-data page; on the cookie-flow operator it is the
        landing page that redirects until a cookie is presented."""
        if self.profile.auth_flow is AuthFlow.POST_API_SELF_LOGIN and request.method.upper() != "POST":
            return not_found("POST only")
        try:
            session = self.session_for(self._token_of(request))
        except InvalidSession:
            return self._unauthenticated(request)
        body: dict = {}
        notifications = 0
        for field_name in PERSONAL_DATA_FIELDS:
            response = self.get_field(session.token, field_name)
            if response.status is Status.OK:
                body.update(response.body)
                notifications += response.notifications_emitted
        return ok(body, notifications)
