"""World assembly: one carrier, one or more operators, a victim per operator.

A world is fully determined by its seed: subscriber data, portal passwords,
session tokens and one-time codes all come from seeded generators. Each
operator gets its own customer base; the first customer is the designated
victim (phone connected over mobile data, hotspot enabled), the second is the
attacker-controlled peer used as credit-transfer target.
"""

from __future__ import annotations

import dataclasses
import random

from .attacker import AttackerCapabilities, AttackSurface
from .carrier import Carrier, Connection
from .errors import ConfigError
from .fiscal import BelfioreTable, default_belfiore_table
from .guards import GuardedOperator, build_guard
from .msisdn import Msisdn
from .operators import OperatorService
from .profiles import OperatorProfile, OpMode
from .subscribers import SubscriberGenerator, SubscriberRecord

TEXT_VARIANT_OPERATORS = ("MO3", "MO5")


def apply_variant(profile: OperatorProfile, variant: str) -> OperatorProfile:
    """Flip the activate-services cells the narrative text claims for MO3/MO5."""
    if variant == "table":
        return profile
    if variant != "text":
        raise ConfigError(f"unknown activate-services variant {variant!r}")
    if not any(name in TEXT_VARIANT_OPERATORS for name in profile.names):
        return profile
    active_ops = dict(profile.active_ops)
    active_ops["activate_services"] = OpMode.ALLOWED
    return dataclasses.replace(profile, active_ops=active_ops)


class World:
    """Carrier plus operator instances built from one seed."""

    def __init__(self, seed: int | str, profiles: list[OperatorProfile],
                 subscribers_per_operator: int = 25,
                 activate_services_variant: str = "table",
                 belfiore: BelfioreTable | None = None):
        if subscribers_per_operator < 2:
            raise ConfigError("need at least two subscribers per operator "
                              "(victim and transfer peer)")
        self.seed = seed
        self.carrier = Carrier()
        self.belfiore = belfiore or default_belfiore_table()
        self._rng = random.Random(f"world:{seed}")
        self.hotspot_key = f"hs-key-{self._rng.getrandbits(24):06x}"
        self.operators: list[OperatorService] = []
        self._by_name: dict[str, OperatorService] = {}
        self._victim_sim: dict[str, str] = {}
        self._victim_conn: dict[str, Connection] = {}
        self._hotspot: dict[str, str] = {}
        self._mule: dict[str, Msisdn] = {}
        self.portal_passwords: dict[str, str] = {}

        generator = SubscriberGenerator(seed)
        for profile in profiles:
            profile = apply_variant(profile, activate_services_variant)
            records = generator.batch(subscribers_per_operator)
            passwords = {rec.msisdn.render(): f"pw-{self._rng.getrandbits(40):010x}"
                         for rec in records}
            self.portal_passwords.update(passwords)
            service = OperatorService(
                profile, self.carrier, records,
                random.Random(f"operator:{seed}:{profile.display_name}"),
                passwords)
            self.operators.append(service)
            for name in profile.names:
                self._by_name[name.upper()] = service
            self._by_name[profile.display_name.upper()] = service

            sim_ids = [self.carrier.register_sim(rec) for rec in records]
            victim_sim = sim_ids[0]
            display = profile.display_name
            self._victim_sim[display] = victim_sim
            conn = self.carrier.connect(victim_sim, f"victim-phone-{display}")
            self._victim_conn[display] = conn
            self._hotspot[display] = self.carrier.enable_hotspot(conn, self.hotspot_key)
            self._mule[display] = records[1].msisdn

    # --- lookups ------------------------------------------------------------

    def operator(self, name: str) -> OperatorService:
        try:
            return self._by_name[name.upper()]
        except KeyError:
            raise ConfigError(f"no operator named {name!r} in this world") from None

    def victim_record(self, name: str) -> SubscriberRecord:
        service = self.operator(name)
        return self.carrier.record_for_sim(self._victim_sim[service.name])

    def victim_sim(self, name: str) -> str:
        return self._victim_sim[self.operator(name).name]

    def victim_connection(self, name: str) -> Connection:
        return self._victim_conn[self.operator(name).name]

    def mule_msisdn(self, name: str) -> Msisdn:
        return self._mule[self.operator(name).name]

    def portal_password(self, msisdn: Msisdn) -> str:
        return self.portal_passwords[msisdn.render()]

    # --- endpoint construction ----------------------------------------------

    def guarded(self, name: str, guard_specs: list) -> OperatorService | GuardedOperator:
        """Operator endpoint with a guard stack in front (bare if empty)."""
        service = self.operator(name)
        if not guard_specs:
            return service
        signature = "+".join(spec if isinstance(spec, str) else spec["kind"]
                             for spec in guard_specs)
        rng = random.Random(f"guards:{self.seed}:{service.name}:{signature}")
        guards = [build_guard(spec, rng) for spec in guard_specs]
        return GuardedOperator(service, guards, rng)

    def attack_surface(self, operator, capabilities: AttackerCapabilities,
                       vector: str) -> AttackSurface:
        """Wire an attack run onto the victim's bearer for the given vector.

        The app vector shares the victim phone's own connection; the hotspot
        vector joins the victim's hotspot (raising WrongKey when the attacker
        lacks the key). Each hotspot surface gets its own guest connection.
        """
        if isinstance(operator, str):
            operator = self.operator(operator)
        profile = operator.profile
        display = profile.display_name
        victim_sim = self._victim_sim[display]
        if vector == "app":
            connection = self._victim_conn[display]
        elif vector == "hotspot":
            key = self.hotspot_key if capabilities.knows_hotspot_key else "wrong-key-guess"
            connection = self.carrier.join_hotspot(
                self._hotspot[display], key, f"attacker-laptop-{display}")
        else:
            raise ConfigError(f"unknown vector {vector!r}")
        return AttackSurface(operator, self.carrier, victim_sim, connection,
                             capabilities, vector, self._mule[display])
