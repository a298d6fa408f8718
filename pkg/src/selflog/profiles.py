"""Declarative operator profiles: what each mock backend exposes and allows.

A profile is pure data (one JSON file per operator). It fixes, for each of
the fourteen passive fields, how a self-logged session may read it; for each
active operation, whether it may run; plus the self-login mode and the
authentication flow variant the backend implements.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import ProfileError

# Canonical passive-field vocabulary, in report row order.
PASSIVE_FIELDS = (
    "name", "surname", "msisdn", "tax_code", "birth_date", "birth_place",
    "address", "active_offers", "credit", "pin", "puk", "calls",
    "sms_senders", "voicemail",
)

# Active operations, in report row order for the four reported ones.
ACTIVE_OPS = (
    "activate_services", "change_password", "change_pin", "transfer_credit",
    "set_unavailable", "disable_spending_limit",
)
REPORTED_ACTIVE_OPS = ACTIVE_OPS[:4]

NUMBER_LIST_FIELDS = ("calls", "sms_senders")

FIELD_LABELS = {
    "name": "Name",
    "surname": "Surname",
    "msisdn": "Mobile Number (MSISDN)",
    "tax_code": "Tax Code",
    "birth_date": "Birth Date",
    "birth_place": "Birth Place",
    "address": "Address of Residence",
    "active_offers": "Active Offers",
    "credit": "Credit",
    "pin": "PIN",
    "puk": "PUK",
    "calls": "Calls",
    "sms_senders": "SMS Senders",
    "voicemail": "Voice Mail",
}

OP_LABELS = {
    "activate_services": "Activate Services",
    "change_password": "Change Password",
    "change_pin": "Change PIN",
    "transfer_credit": "Transfer Credit",
}

SELF_LOGIN_ROW_LABEL = "Self-Login Always Active"


class ExposureMode(str, Enum):
    EXPOSED = "exposed"
    HIDDEN = "hidden"
    OBFUSCATED = "obfuscated"
    EXPOSED_WITH_NOTIFICATION = "exposed_with_notification"
    PASSWORD_REQUIRED = "password_required"


class OpMode(str, Enum):
    ALLOWED = "allowed"
    DENIED = "denied"
    PASSWORD_REQUIRED = "password_required"


class SelfLoginMode(str, Enum):
    ALWAYS_ACTIVE = "always_active"
    DEFAULT_ON_DEACTIVATABLE = "default_on_deactivatable"
    DISABLED = "disabled"


class AuthFlow(str, Enum):
    DIRECT_SELF_LOGIN = "direct_self_login"
    POST_API_SELF_LOGIN = "post_api_self_login"
    APP_API_SELF_LOGIN = "app_api_self_login"
    COOKIE_HANDSHAKE = "cookie_handshake"
    PARTIAL_SELF_LOGIN = "partial_self_login"
    PASSWORD_ONLY = "password_only"


@dataclass(frozen=True)
class ExposurePolicy:
    """Per-field read mode for the fourteen passive fields."""

    modes: dict[str, ExposureMode]

    def __post_init__(self) -> None:
        missing = set(PASSIVE_FIELDS) - set(self.modes)
        extra = set(self.modes) - set(PASSIVE_FIELDS)
        if missing or extra:
            raise ProfileError(f"exposure must cover exactly the passive fields "
                               f"(missing={sorted(missing)}, extra={sorted(extra)})")
        for name, mode in self.modes.items():
            if mode is ExposureMode.OBFUSCATED and name not in NUMBER_LIST_FIELDS:
                raise ProfileError(f"obfuscated mode only applies to number lists, not {name}")

    def mode(self, field_name: str) -> ExposureMode:
        return self.modes[field_name]


@dataclass(frozen=True)
class OperatorProfile:
    """One operator's complete exposure and operation policy."""

    names: tuple[str, ...]
    exposure: ExposurePolicy
    active_ops: dict[str, OpMode]
    self_login: SelfLoginMode
    auth_flow: AuthFlow
    endpoint_groups: dict[str, tuple[str, ...]] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.names:
            raise ProfileError("profile needs at least one operator name")
        missing = set(ACTIVE_OPS) - set(self.active_ops)
        if missing:
            raise ProfileError(f"active_ops missing {sorted(missing)}")
        disabled = self.self_login is SelfLoginMode.DISABLED
        password_only = self.auth_flow is AuthFlow.PASSWORD_ONLY
        if disabled != password_only:
            raise ProfileError("self_login 'disabled' and auth_flow 'password_only' "
                               "must come together")

    @property
    def display_name(self) -> str:
        return "/".join(self.names)

    def op_mode(self, op: str) -> OpMode:
        try:
            return self.active_ops[op]
        except KeyError:
            raise ProfileError(f"unknown active op {op!r}") from None


def _parse_profile(data: dict, source: str) -> OperatorProfile:
    try:
        exposure = ExposurePolicy({k: ExposureMode(v) for k, v in data["exposure"].items()})
        return OperatorProfile(
            names=tuple(data["names"]),
            exposure=exposure,
            active_ops={k: OpMode(v) for k, v in data["active_ops"].items()},
            self_login=SelfLoginMode(data["self_login"]),
            auth_flow=AuthFlow(data["auth_flow"]),
            endpoint_groups={k: tuple(v) for k, v in data.get("endpoint_groups", {}).items()},
            notes=tuple(data.get("notes", [])),
        )
    except ProfileError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise ProfileError(f"{source}: {exc}") from exc


def load_profile(path: str | Path) -> OperatorProfile:
    """Load a profile from a JSON file path."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ProfileError(f"{path}: {exc}") from exc
    return _parse_profile(data, str(path))


def load_packaged_profile(name: str) -> OperatorProfile:
    """Load one of the shipped profiles by bare name, e.g. 'mo1'."""
    ref = resources.files("selflog.data").joinpath(f"profiles/{name}.json")
    try:
        data = json.loads(ref.read_text("utf-8"))
    except FileNotFoundError:
        raise ProfileError(f"no packaged profile named {name!r}") from None
    return _parse_profile(data, f"packaged:{name}")


PACKAGED_PROFILE_NAMES = ("mo1", "mo2", "mo3", "mo4", "mo5", "mo6_mo7")


def load_shipped_profiles() -> list[OperatorProfile]:
    """All shipped profiles in table column order (MO6/MO7 share one file)."""
    return [load_packaged_profile(name) for name in PACKAGED_PROFILE_NAMES]
