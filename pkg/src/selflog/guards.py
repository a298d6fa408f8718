"""Pluggable request guards that stack in front of any operator backend.

Five kinds: user-agent equality checks, keyed-digest request signatures
standing in for an in-app certificate, SMS one-time codes, portal passwords
and captchas. Guards compose left to right and all must pass; the challenge
state (active codes, captcha tokens) lives inside each guard instance.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import random
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .carrier import Carrier, SmsKind
from .errors import ExpiredOtp, ReplayedCaptcha
from .msisdn import Msisdn, parse_msisdn
from .transport import OperatorResponse, Request, denied

OTP_TTL_TICKS = 120
OTP_DIGITS = 6


class GuardKind(str, Enum):
    HEADER_CONTROL = "header_control"
    IN_APP_CERTIFICATE = "in_app_certificate"
    SMS_AUTHENTICATION = "sms_authentication"
    PASSWORD_AUTHENTICATION = "password_authentication"
    CAPTCHA = "captcha"


GUARD_LABELS = {
    GuardKind.HEADER_CONTROL: "Headers Control",
    GuardKind.IN_APP_CERTIFICATE: "In-App Certificate",
    GuardKind.SMS_AUTHENTICATION: "SMS Authentication",
    GuardKind.PASSWORD_AUTHENTICATION: "Password Authentication",
    GuardKind.CAPTCHA: "Captcha",
}

# User-interaction steps each guard costs the legitimate user.
FRICTION_SCORES = {
    GuardKind.HEADER_CONTROL: 0,
    GuardKind.IN_APP_CERTIFICATE: 0,
    GuardKind.CAPTCHA: 1,
    GuardKind.SMS_AUTHENTICATION: 2,
    GuardKind.PASSWORD_AUTHENTICATION: 2,
}

# The certificate check has no browser story: browsers cannot sign requests.
BROWSER_APPLICABLE = {
    GuardKind.HEADER_CONTROL: True,
    GuardKind.IN_APP_CERTIFICATE: False,
    GuardKind.SMS_AUTHENTICATION: True,
    GuardKind.PASSWORD_AUTHENTICATION: True,
    GuardKind.CAPTCHA: True,
}


def friction_score(guard: "Guard | GuardKind") -> int:
    kind = guard.kind if isinstance(guard, Guard) else GuardKind(guard)
    return FRICTION_SCORES[kind]


class Decision(str, Enum):
    ALLOW = "allow"
    CHALLENGE = "challenge"
    DENY = "deny"


@dataclass(frozen=True)
class CheckResult:
    decision: Decision
    challenge: dict | None = None
    reason: str | None = None


ALLOW = CheckResult(Decision.ALLOW)


def _deny(reason: str) -> CheckResult:
    return CheckResult(Decision.DENY, reason=reason)


def _challenge(payload: dict) -> CheckResult:
    return CheckResult(Decision.CHALLENGE, challenge=payload)


@dataclass
class GuardContext:
    """Per-request facts a guard may consult."""

    carrier: Carrier
    rng: random.Random
    attribution: Msisdn | None
    password_verifier: Callable[[Msisdn, str], bool] | None = None


class Guard:
    kind: GuardKind

    def check(self, request: Request, ctx: GuardContext) -> CheckResult:
        raise NotImplementedError


class HeaderControl(Guard):
    """Strict string equality on the user-agent header.

    The weakest defensible reading of a server-side header check: one
    configured value, exact match. Trivially spoofable by construction.
    """

    kind = GuardKind.HEADER_CONTROL

    def __init__(self, user_agent: str = "OperatorApp/2.4"):
        self.user_agent = user_agent

    def check(self, request: Request, ctx: GuardContext) -> CheckResult:
        sent = request.headers.get("user-agent")
        if sent == self.user_agent:
            return ALLOW
        return _deny(f"user-agent {sent!r} not accepted")


def sign_request(secret: str, method: str, route: str, params: dict) -> str:
    """Keyed digest over the canonical request form (the 'app certificate')."""
    canonical = f"{method.upper()}|{route}|{json.dumps(params, sort_keys=True)}"
    return hmac.new(secret.encode("utf-8"), canonical.encode("utf-8"),
                    hashlib.sha256).hexdigest()


class InAppCertificate(Guard):
    """Request signature with a secret baked into the operator's app.

    Modeled as a shared-secret keyed digest, not a PKI: whoever holds the
    secret can sign. Browsers carry no signature at all, so browser accesses
    always fail this guard.
    """

    kind = GuardKind.IN_APP_CERTIFICATE

    def __init__(self, secret: str):
        self.secret = secret

    def check(self, request: Request, ctx: GuardContext) -> CheckResult:
        if not request.signature:
            return _deny("unsigned request")
        expected = sign_request(self.secret, request.method, request.route, request.params)
        if hmac.compare_digest(request.signature, expected):
            return ALLOW
        return _deny("bad request signature")


class SmsAuthentication(Guard):
    """One-time code sent to the attributed MSISDN.

    A challenge issues a fresh 6-digit code over the carrier SMS channel (one
    active code per number; issuing replaces the previous one). Echoing the
    code within 120 ticks clears the connection for subsequent requests; a
    late echo raises ExpiredOtp. The user-facing flow also asks for the mobile
    number, which costs a step but adds nothing against an attributed
    attacker, so only the code is checked here.
    """

    kind = GuardKind.SMS_AUTHENTICATION

    def __init__(self) -> None:
        self._active: dict[str, tuple[str, int]] = {}   # msisdn -> (code, issued tick)
        self._cleared: set[str] = set()                 # verified connection ids

    def check(self, request: Request, ctx: GuardContext) -> CheckResult:
        if request.connection_id in self._cleared:
            return ALLOW
        if ctx.attribution is None:
            return _deny("no attributable subscriber to verify")
        key = ctx.attribution.render()
        if request.otp is None:
            code = f"{ctx.rng.randrange(10 ** OTP_DIGITS):0{OTP_DIGITS}d}"
            receipt = ctx.carrier.send_sms(ctx.attribution,
                                           f"Your verification code is {code}",
                                           SmsKind.OTP)
            self._active[key] = (code, receipt["timestamp"])
            return _challenge({"kind": "otp"})
        active = self._active.get(key)
        if active is None:
            return _deny("no active verification code")
        code, issued = active
        if ctx.carrier.clock.now() - issued > OTP_TTL_TICKS:
            del self._active[key]
            raise ExpiredOtp(f"code issued at tick {issued}")
        if request.otp != code:
            return _deny("wrong verification code")
        del self._active[key]
        if request.connection_id:
            self._cleared.add(request.connection_id)
        return ALLOW


class PasswordAuthentication(Guard):
    """Portal username/password in front of every endpoint."""

    kind = GuardKind.PASSWORD_AUTHENTICATION

    def __init__(self) -> None:
        self._cleared: set[str] = set()

    def check(self, request: Request, ctx: GuardContext) -> CheckResult:
        if request.connection_id in self._cleared:
            return ALLOW
        if not request.credentials:
            return _challenge({"kind": "password"})
        username, password = request.credentials
        try:
            msisdn = parse_msisdn(username)
        except Exception:
            return _deny("bad username")
        if ctx.password_verifier is None or not ctx.password_verifier(msisdn, password):
            return _deny("bad credentials")
        if request.connection_id:
            self._cleared.add(request.connection_id)
        return ALLOW


class Captcha(Guard):
    """Humanity check on every access; tokens are strictly single-use.

    A challenge hands out a token that only a human solver can mark solved
    (the surface mediating a human attacker or a legitimate user does the
    marking). Echoing a solved token passes exactly once; echoing it again
    raises ReplayedCaptcha, and echoing an unsolved token is denied.
    """

    kind = GuardKind.CAPTCHA

    def __init__(self) -> None:
        self._tokens: dict[str, str] = {}     # token -> issued | solved | used

    def check(self, request: Request, ctx: GuardContext) -> CheckResult:
        token = request.captcha_token
        if token is None:
            fresh = f"cap-{ctx.rng.getrandbits(48):012x}"
            self._tokens[fresh] = "issued"
            return _challenge({"kind": "captcha", "token": fresh})
        state = self._tokens.get(token)
        if state is None:
            return _deny("unknown captcha token")
        if state == "used":
            raise ReplayedCaptcha(token)
        if state != "solved":
            return _deny("captcha not solved by a human")
        self._tokens[token] = "used"
        return ALLOW

    def mark_solved(self, token: str, human: bool) -> bool:
        """Record a solve attempt; only human solvers succeed."""
        if human and self._tokens.get(token) == "issued":
            self._tokens[token] = "solved"
            return True
        return False


def check(guard: Guard, request: Request, ctx: GuardContext) -> CheckResult:
    """Functional form of a single guard evaluation."""
    return guard.check(request, ctx)


def build_guard(spec: str | dict, rng: random.Random) -> Guard:
    """Instantiate a guard from its scenario declaration."""
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = GuardKind(spec["kind"])
    if kind is GuardKind.HEADER_CONTROL:
        return HeaderControl(spec.get("user_agent", "OperatorApp/2.4"))
    if kind is GuardKind.IN_APP_CERTIFICATE:
        secret = spec.get("secret") or f"appcert-{rng.getrandbits(96):024x}"
        return InAppCertificate(secret)
    if kind is GuardKind.SMS_AUTHENTICATION:
        return SmsAuthentication()
    if kind is GuardKind.PASSWORD_AUTHENTICATION:
        return PasswordAuthentication()
    return Captcha()


class GuardedOperator:
    """An operator endpoint with a guard stack screening every request.

    Challenge and deny outcomes surface as denied responses (the challenge
    payload rides in the body); guard errors surface as denied responses
    tagged with the error name, so transport callers never see exceptions.
    """

    def __init__(self, operator, guards: list[Guard], rng: random.Random):
        self.operator = operator
        self.guards = list(guards)
        self._rng = rng

    @property
    def profile(self):
        return self.operator.profile

    @property
    def carrier(self) -> Carrier:
        return self.operator.carrier

    def _context(self, request: Request) -> GuardContext:
        attribution = None
        if request.connection_id is not None:
            attribution = self.operator.carrier.attribute(request.connection_id)
        return GuardContext(
            carrier=self.operator.carrier,
            rng=self._rng,
            attribution=attribution,
            password_verifier=self.operator.verify_password,
        )

    def screen(self, request: Request) -> CheckResult:
        """Evaluate the stack left to right; first non-allow wins."""
        ctx = self._context(request)
        for guard in self.guards:
            result = guard.check(request, ctx)
            if result.decision is not Decision.ALLOW:
                return result
        return ALLOW

    def handle(self, request: Request) -> OperatorResponse:
        try:
            result = self.screen(request)
        except (ExpiredOtp, ReplayedCaptcha) as exc:
            return denied(type(exc).__name__)
        if result.decision is Decision.CHALLENGE:
            return denied("challenge", challenge=result.challenge)
        if result.decision is Decision.DENY:
            return denied(result.reason or "blocked by guard")
        return self.operator.handle(request)

    # --- sim plumbing the attack surface may tap, capability-gated there ---

    def find_guard(self, kind: GuardKind) -> Guard | None:
        for guard in self.guards:
            if guard.kind is kind:
                return guard
        return None

    @property
    def expected_user_agent(self) -> str | None:
        guard = self.find_guard(GuardKind.HEADER_CONTROL)
        return guard.user_agent if guard else None

    @property
    def app_secret(self) -> str | None:
        guard = self.find_guard(GuardKind.IN_APP_CERTIFICATE)
        return guard.secret if guard else None

    @property
    def captcha(self) -> Captcha | None:
        return self.find_guard(GuardKind.CAPTCHA)
