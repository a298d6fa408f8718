"""Attack vectors against operator backends, graded by attacker capability.

Two vectors share one enumeration engine: a malicious app riding the victim
phone's own mobile-data bearer, and a guest device on the victim's hotspot.
Both inherit the victim's traffic attribution and walk every passive endpoint
and active operation, answering guard challenges only with the capabilities
they actually hold. A harvested identity quartet (name, surname, birth date,
birth place) is upgraded offline into the victim's fiscal code.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import CapabilityError, WrongKey
from .carrier import Carrier, Connection, SmsKind, SmsMessage
from .fiscal import BelfioreTable, default_belfiore_table, derive_tax_code
from .guards import sign_request
from .msisdn import Msisdn
from .operators import (
    AUTH_SERVER_ROUTE,
    FIELD_ROUTES,
    LANDING_ROUTE,
    LOGIN_ROUTE,
    OP_ROUTES,
)
from .profiles import ACTIVE_OPS, PASSIVE_FIELDS, AuthFlow, OperatorProfile
from .subscribers import load_corpora
from .transport import OperatorResponse, Request, Status

ATTACKER_USER_AGENT = "definitely-genuine-app/1.0"

_OTP_BODY = re.compile(r"\b(\d{6})\b")

TAX_CODE_INPUT_FIELDS = ("name", "surname", "birth_date", "birth_place")


@dataclass(frozen=True)
class AttackerCapabilities:
    """Optional attacker powers; everything defaults to the bare attacker."""

    spoof_headers: bool = False
    extract_certificate: bool = False
    read_sms: bool = False
    human_in_loop: bool = False
    knows_password: bool = False
    knows_hotspot_key: bool = False

    def flag_set(self) -> frozenset[str]:
        """The graded capability subset used by the rating engine."""
        flags = []
        for name in ("spoof_headers", "extract_certificate", "read_sms", "human_in_loop"):
            if getattr(self, name):
                flags.append(name)
        return frozenset(flags)

    def union(self, other: "AttackerCapabilities") -> "AttackerCapabilities":
        return AttackerCapabilities(**{
            name: getattr(self, name) or getattr(other, name)
            for name in ("spoof_headers", "extract_certificate", "read_sms",
                         "human_in_loop", "knows_password", "knows_hotspot_key")
        })


NO_CAPABILITIES = AttackerCapabilities()


@dataclass(frozen=True)
class TraceEntry:
    trace_id: str
    route: str
    method: str
    status: str
    note: str = ""

    def to_dict(self) -> dict:
        return {"trace_id": self.trace_id, "route": self.route,
                "method": self.method, "status": self.status, "note": self.note}


@dataclass
class Harvest:
    """Everything one attack run collected, with its request/response log."""

    fields_obtained: dict[str, object] = field(default_factory=dict)
    obfuscated: set[str] = field(default_factory=set)
    notified: set[str] = field(default_factory=set)
    ops_performed: list[tuple[str, str]] = field(default_factory=list)
    derived: dict[str, str] = field(default_factory=dict)
    trace: list[TraceEntry] = field(default_factory=list)
    field_refs: dict[str, str] = field(default_factory=dict)
    op_refs: dict[str, str] = field(default_factory=dict)
    auth_ref: str | None = None

    def field_set(self) -> frozenset[str]:
        return frozenset(self.fields_obtained)

    def op_outcome(self, op: str) -> str | None:
        for name, outcome in self.ops_performed:
            if name == op:
                return outcome
        return None

    def to_dict(self) -> dict:
        return {
            "fields_obtained": {k: self.fields_obtained[k]
                                for k in sorted(self.fields_obtained)},
            "obfuscated": sorted(self.obfuscated),
            "notified": sorted(self.notified),
            "ops_performed": [list(item) for item in self.ops_performed],
            "derived": dict(sorted(self.derived.items())),
            "trace": [entry.to_dict() for entry in self.trace],
        }


class AttackSurface:
    """The only view of the world an attack run gets.

    Everything flows through operator responses; the victim inbox opens only
    with the SMS-read capability, captcha solving only with a human on a
    hotspot, and app-secret extraction only with the extraction capability
    from inside the victim device. Anything else raises CapabilityError.
    """

    __slots__ = ("_endpoint", "_carrier", "_victim_sim", "_connection",
                 "_capabilities", "_vector", "_mule_msisdn")

    def __init__(self, endpoint, carrier: Carrier, victim_sim: str,
                 connection: Connection, capabilities: AttackerCapabilities,
                 vector: str, mule_msisdn: Msisdn | None = None):
        self._endpoint = endpoint
        self._carrier = carrier
        self._victim_sim = victim_sim
        self._connection = connection
        self._capabilities = capabilities
        self._vector = vector
        self._mule_msisdn = mule_msisdn

    @property
    def capabilities(self) -> AttackerCapabilities:
        return self._capabilities

    @property
    def vector(self) -> str:
        return self._vector

    @property
    def profile(self) -> OperatorProfile:
        return self._endpoint.profile

    @property
    def mule_msisdn(self) -> Msisdn | None:
        """Attacker-owned same-operator number used as a transfer target."""
        return self._mule_msisdn

    def send(self, request: Request) -> OperatorResponse:
        return self._endpoint.handle(
            request.with_proof(connection_id=self._connection.connection_id))

    def user_agent(self) -> str:
        expected = getattr(self._endpoint, "expected_user_agent", None)
        if self._capabilities.spoof_headers and expected:
            return expected
        return ATTACKER_USER_AGENT

    def can_sign(self) -> bool:
        return (self._capabilities.extract_certificate
                and self._vector == "app"
                and getattr(self._endpoint, "app_secret", None) is not None)

    def sign(self, method: str, route: str, params: dict) -> str:
        if not (self._capabilities.extract_certificate and self._vector == "app"):
            raise CapabilityError("certificate extraction needs an app on the victim device")
        secret = getattr(self._endpoint, "app_secret", None)
        if secret is None:
            raise CapabilityError("no app certificate deployed to extract")
        return sign_request(secret, method, route, params)

    def read_victim_inbox(self) -> list[SmsMessage]:
        if not self._capabilities.read_sms:
            raise CapabilityError("reading the victim inbox needs the SMS permission")
        return self._carrier.read_inbox(self._victim_sim)

    def solve_captcha(self, token: str) -> bool:
        if not (self._capabilities.human_in_loop and self._vector == "hotspot"):
            raise CapabilityError("captcha solving needs a human on the hotspot")
        captcha = getattr(self._endpoint, "captcha", None)
        if captcha is None:
            raise CapabilityError("no captcha guard present")
        return captcha.mark_solved(token, human=True)


@dataclass(frozen=True)
class PlanStep:
    step: str          # auth | field | op
    target: str        # field/op name, or the auth route
    route: str
    method: str
    group: str = "browser"


def _group_for(profile: OperatorProfile, route: str) -> str:
    for group, routes in profile.endpoint_groups.items():
        for declared in routes:
            if route == declared or route.startswith(declared + "/"):
                return group
    return "browser"


def plan_attack(profile: OperatorProfile) -> list[PlanStep]:
    """Deterministic enumeration order for one operator profile.

    Password-only operators yield an empty plan: with no self-login surface
    there is nothing to enumerate. The cookie-flow plan starts with the
    landing page (expected to redirect) and the auth server.
    """
    if profile.auth_flow is AuthFlow.PASSWORD_ONLY:
        return []
    steps: list[PlanStep] = []
    if profile.auth_flow is AuthFlow.COOKIE_HANDSHAKE:
        steps.append(PlanStep("auth", "landing", LANDING_ROUTE, "GET"))
        steps.append(PlanStep("auth", "auth-server", AUTH_SERVER_ROUTE, "GET"))
    else:
        steps.append(PlanStep("auth", "self-login", LOGIN_ROUTE, "GET"))
    data_method = "POST" if profile.auth_flow is AuthFlow.POST_API_SELF_LOGIN else "GET"
    for field_name in PASSIVE_FIELDS:
        route = FIELD_ROUTES[field_name]
        steps.append(PlanStep("field", field_name, route, data_method,
                              _group_for(profile, route)))
    for op in ACTIVE_OPS:
        route = OP_ROUTES[op]
        steps.append(PlanStep("op", op, route, "POST", _group_for(profile, route)))
    return steps


def infer_sex_from_name(name: str, corpora: dict | None = None) -> str | None:
    """Sex lookup via the public first-name corpora (names are sex-specific)."""
    corpora = corpora or load_corpora()
    upper = name.upper()
    if upper in corpora["male_names"]:
        return "M"
    if upper in corpora["female_names"]:
        return "F"
    return None


class _Runner:
    """Shared enumeration engine for both vectors."""

    def __init__(self, surface: AttackSurface,
                 belfiore: BelfioreTable | None = None):
        self.surface = surface
        self.harvest = Harvest()
        self.belfiore = belfiore or default_belfiore_table()
        self._seq = 0
        self.auth_token: dict[str, str] = {}

    def _log(self, route: str, method: str, status: str, note: str = "") -> str:
        self._seq += 1
        trace_id = f"t-{self._seq:03d}"
        self.harvest.trace.append(TraceEntry(trace_id, route, method, status, note))
        return trace_id

    def _request(self, route: str, method: str, *, params: dict | None = None,
                 otp: str | None = None, captcha_token: str | None = None):
        params = params or {}
        surface = self.surface
        signature = None
        if surface.can_sign():
            signature = surface.sign(method, route, params)
        request = Request(
            route=route,
            method=method,
            headers={"user-agent": surface.user_agent()},
            params=params,
            session=self.auth_token.get("session"),
            cookie=self.auth_token.get("cookie"),
            otp=otp,
            captcha_token=captcha_token,
            signature=signature,
        )
        return surface.send(request)

    def _latest_otp(self) -> str | None:
        codes = [m for m in self.surface.read_victim_inbox() if m.kind is SmsKind.OTP]
        if not codes:
            return None
        match = _OTP_BODY.search(codes[-1].body)
        return match.group(1) if match else None

    def _attempt(self, route: str, method: str, params: dict | None = None):
        """One endpoint visit, answering each challenge kind at most once."""
        response = self._request(route, method, params=params)
        trace_id = self._log(route, method, response.status.value)
        answered: set[str] = set()
        while response.status is Status.DENIED:
            challenge = response.body.get("challenge")
            if not challenge or challenge["kind"] in answered:
                break
            kind = challenge["kind"]
            answered.add(kind)
            caps = self.surface.capabilities
            if kind == "otp" and caps.read_sms:
                code = self._latest_otp()
                if code is None:
                    break
                response = self._request(route, method, params=params, otp=code)
                trace_id = self._log(route, method, response.status.value,
                                     "answered otp challenge")
            elif (kind == "captcha" and caps.human_in_loop
                  and self.surface.vector == "hotspot"):
                self.surface.solve_captcha(challenge["token"])
                response = self._request(route, method, params=params,
                                         captcha_token=challenge["token"])
                trace_id = self._log(route, method, response.status.value,
                                     "human solved captcha")
            else:
                break
        return response, trace_id

    # --- the attack proper -------------------------------------------------

    def run(self) -> Harvest:
        plan = plan_attack(self.surface.profile)
        if not plan:
            response, trace_id = self._attempt(LOGIN_ROUTE, "GET")
            self.harvest.auth_ref = trace_id
            return self.harvest
        for step in plan:
            if step.step == "auth":
                self._auth_step(step)
            elif step.step == "field":
                self._field_step(step)
            else:
                self._op_step(step)
        self._derive_offline()
        return self.harvest

    def _auth_step(self, step: PlanStep) -> None:
        response, trace_id = self._attempt(step.route, step.method)
        if self.harvest.auth_ref is None:
            self.harvest.auth_ref = trace_id
        if response.status is Status.OK:
            if "session" in response.body:
                self.auth_token["session"] = response.body["session"]
            if "cookie" in response.body:
                self.auth_token["cookie"] = response.body["cookie"]

    @staticmethod
    def _looks_obfuscated(value) -> bool:
        if not isinstance(value, list):
            return False
        return any(isinstance(entry, dict) and str(entry.get("number", "")).endswith("***")
                   for entry in value)

    def _field_step(self, step: PlanStep) -> None:
        response, trace_id = self._attempt(step.route, step.method)
        name = step.target
        self.harvest.field_refs[name] = trace_id
        if response.status is not Status.OK or name not in response.body:
            return
        value = response.body[name]
        self.harvest.fields_obtained[name] = value
        if self._looks_obfuscated(value):
            self.harvest.obfuscated.add(name)
        if response.notifications_emitted:
            self.harvest.notified.add(name)

    def _op_step(self, step: PlanStep) -> None:
        response, trace_id = self._attempt(step.route, step.method,
                                           params=self._op_args(step.target))
        self.harvest.op_refs[step.target] = trace_id
        self.harvest.ops_performed.append((step.target, response.status.value))

    def _op_args(self, op: str) -> dict:
        if op == "activate_services":
            return {"offer": "premium-extra"}
        if op == "change_password":
            return {"new_password": "attacker-owns-this"}
        if op == "change_pin":
            return {"new_pin": "4321"}
        if op == "transfer_credit":
            mule = self.surface.mule_msisdn
            return {"to": mule.render() if mule else "+390000000000",
                    "amount_cents": 500}
        if op == "set_unavailable":
            return {"unavailable": True}
        return {}

    def _derive_offline(self) -> None:
        """Rebuild the fiscal code when the four identity inputs leaked raw."""
        harvest = self.harvest
        if "tax_code" in harvest.fields_obtained:
            return
        if not all(f in harvest.fields_obtained for f in TAX_CODE_INPUT_FIELDS):
            return
        name = str(harvest.fields_obtained["name"])
        surname = str(harvest.fields_obtained["surname"])
        birth_date = str(harvest.fields_obtained["birth_date"])
        birth_place = str(harvest.fields_obtained["birth_place"])
        sex = infer_sex_from_name(name)
        code = self.belfiore.lookup(birth_place)
        if sex is None or code is None:
            return
        harvest.derived["tax_code"] = derive_tax_code(name, surname, sex,
                                                      birth_date, code)


def run_app_attack(world, operator, capabilities: AttackerCapabilities) -> Harvest:
    """Malicious-app vector: enumerate from the victim device's own bearer."""
    surface = world.attack_surface(operator, capabilities, vector="app")
    return _Runner(surface, world.belfiore).run()


def run_hotspot_attack(world, operator, capabilities: AttackerCapabilities) -> Harvest:
    """Hotspot vector: enumerate from a guest device sharing the victim bearer.

    Joining with the wrong key yields an empty harvest with a trace entry
    rather than an exception.
    """
    try:
        surface = world.attack_surface(operator, capabilities, vector="hotspot")
    except WrongKey:
        harvest = Harvest()
        harvest.trace.append(TraceEntry("t-001", "hotspot-join", "-", "denied",
                                        "hotspot join failed: wrong key"))
        return harvest
    return _Runner(surface, world.belfiore).run()


def mo4_cookie_attack(world) -> tuple[str | None, Harvest]:
    """Dedicated cookie-flow exploit: landing, auth server, then data GETs."""
    operator = world.operator("MO4")
    surface = world.attack_surface(operator, NO_CAPABILITIES, vector="app")
    runner = _Runner(surface, world.belfiore)
    harvest = runner.run()
    return runner.auth_token.get("cookie"), harvest
