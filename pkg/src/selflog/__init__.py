"""Deterministic testbed for mobile-operator self-login privacy attacks.

A simulated carrier attributes traffic to SIMs, profile-driven operator
backends expose subscriber data through per-field policies, attacker clients
run the malicious-app and hotspot vectors, and five request guards can be
stacked in front of any backend and graded against the full attacker
capability lattice.
"""

from .attacker import (
    AttackerCapabilities,
    AttackSurface,
    Harvest,
    derive_tax_code,
    infer_sex_from_name,
    mo4_cookie_attack,
    plan_attack,
    run_app_attack,
    run_hotspot_attack,
)
from .carrier import Carrier, Connection, LogicalClock, SmsKind, SmsMessage
from .fiscal import BelfioreTable, default_belfiore_table
from .guards import (
    Captcha,
    GuardedOperator,
    GuardKind,
    HeaderControl,
    InAppCertificate,
    PasswordAuthentication,
    SmsAuthentication,
    build_guard,
    friction_score,
)
from .harness import (
    Report,
    ScenarioConfig,
    default_scenario,
    lint_privacy_defaults,
    render,
    run_matrix,
    verify,
)
from .msisdn import Msisdn, parse_msisdn
from .operators import OperatorService, Session, obfuscate
from .profiles import (
    ExposurePolicy,
    OperatorProfile,
    load_packaged_profile,
    load_profile,
    load_shipped_profiles,
)
from .rating import AttackOutcome, Rating, capability_lattice, rate
from .subscribers import SubscriberGenerator, SubscriberRecord
from .world import World

__version__ = "0.1.0"

__all__ = [
    "AttackerCapabilities", "AttackSurface", "Harvest", "derive_tax_code",
    "infer_sex_from_name", "mo4_cookie_attack", "plan_attack",
    "run_app_attack", "run_hotspot_attack",
    "Carrier", "Connection", "LogicalClock", "SmsKind", "SmsMessage",
    "BelfioreTable", "default_belfiore_table",
    "Captcha", "GuardedOperator", "GuardKind", "HeaderControl",
    "InAppCertificate", "PasswordAuthentication", "SmsAuthentication",
    "build_guard", "friction_score",
    "Report", "ScenarioConfig", "default_scenario", "lint_privacy_defaults",
    "render", "run_matrix", "verify",
    "Msisdn", "parse_msisdn",
    "OperatorService", "Session", "obfuscate",
    "ExposurePolicy", "OperatorProfile", "load_packaged_profile",
    "load_profile", "load_shipped_profiles",
    "AttackOutcome", "Rating", "capability_lattice", "rate",
    "SubscriberGenerator", "SubscriberRecord",
    "World",
]
