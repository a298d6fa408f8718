"""Subscriber ground truth and the seeded generator that fabricates it.

A SubscriberRecord is everything the carrier knows about one SIM: identity,
SIM codes, balance and history. Records are internally consistent: the stored
tax code always equals the derivation from the other identity fields, which
is exactly the consistency the tax-code exploit relies on.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from datetime import date
from functools import lru_cache
from importlib import resources

from .errors import ConstructionError
from .fiscal import BELFIORE_PATTERN, derive_tax_code
from .msisdn import Msisdn


@dataclass
class SubscriberRecord:
    """Ground-truth personal, SIM and historical data for one SIM."""

    name: str
    surname: str
    sex: str
    birth_date: date
    birth_place_code: str
    birth_place_name: str
    address: str
    tax_code: str
    msisdn: Msisdn
    pin: str
    puk: str
    credit: int
    active_offers: list[str] = field(default_factory=list)
    call_history: list[tuple[Msisdn, int]] = field(default_factory=list)
    sms_senders: list[tuple[Msisdn, int]] = field(default_factory=list)
    voicemail: list[str] = field(default_factory=list)

    def validate(self) -> None:
        """Check the record's internal consistency rules."""
        if self.sex not in ("M", "F"):
            raise ConstructionError(f"sex must be M or F, got {self.sex!r}")
        if not BELFIORE_PATTERN.match(self.birth_place_code):
            raise ConstructionError(f"birth place code {self.birth_place_code!r} malformed")
        expected = derive_tax_code(self.name, self.surname, self.sex,
                                   self.birth_date, self.birth_place_code)
        if self.tax_code != expected:
            raise ConstructionError(
                f"tax code {self.tax_code} does not match derivation {expected}")
        if self.credit < 0:
            raise ConstructionError("credit must be >= 0")
        if not (self.pin.isdigit() and len(self.pin) == 4):
            raise ConstructionError(f"pin {self.pin!r} must be 4 digits")
        if not (self.puk.isdigit() and len(self.puk) == 8):
            raise ConstructionError(f"puk {self.puk!r} must be 8 digits")


@lru_cache(maxsize=1)
def load_corpora() -> dict:
    raw = resources.files("selflog.data").joinpath("corpora.json").read_text("utf-8")
    return json.loads(raw)


class SubscriberGenerator:
    """Deterministic subscriber fabric over the shipped corpora.

    The same seed always yields the same sequence of records. MSISDNs are
    unique per generator instance; first names come from sex-specific lists,
    so the name alone pins down the sex (the attacker kit exploits this when
    rebuilding tax codes).
    """

    def __init__(self, seed: int | str, corpora: dict | None = None,
                 belfiore: dict[str, str] | None = None):
        self._rng = random.Random(f"subscribers:{seed}")
        self._corpora = corpora or load_corpora()
        if belfiore is None:
            raw = resources.files("selflog.data").joinpath("belfiore.json").read_text("utf-8")
            belfiore = json.loads(raw)["places"]
        self._belfiore = belfiore
        self._used_msisdns: set[str] = set()

    def _fresh_msisdn(self) -> Msisdn:
        rng = self._rng
        while True:
            npa = rng.choice(self._corpora["mobile_npas"])
            subscriber = f"{rng.randrange(10**6, 10**7)}"
            number = Msisdn("39", npa, subscriber)
            if number.render() not in self._used_msisdns:
                self._used_msisdns.add(number.render())
                return number

    def _history(self, count: int) -> list[tuple[Msisdn, int]]:
        rng = self._rng
        ticks = sorted(rng.sample(range(1, 400), count))
        return [(self._fresh_msisdn(), tick) for tick in ticks]

    def generate(self) -> SubscriberRecord:
        rng = self._rng
        sex = rng.choice("MF")
        name = rng.choice(self._corpora["male_names" if sex == "M" else "female_names"])
        surname = rng.choice(self._corpora["surnames"])
        birth_date = date(rng.randint(1950, 2004), rng.randint(1, 12), rng.randint(1, 28))
        place = rng.choice(self._corpora["places"])
        place_code = self._belfiore[place]
        street = rng.choice(self._corpora["streets"])
        address = f"{street} {rng.randint(1, 199)}, {place.title()}"
        record = SubscriberRecord(
            name=name,
            surname=surname,
            sex=sex,
            birth_date=birth_date,
            birth_place_code=place_code,
            birth_place_name=place,
            address=address,
            tax_code=derive_tax_code(name, surname, sex, birth_date, place_code),
            msisdn=self._fresh_msisdn(),
            pin=f"{rng.randrange(10**4):04d}",
            puk=f"{rng.randrange(10**8):08d}",
            credit=rng.randint(1000, 5000),
            active_offers=rng.sample(self._corpora["offers"], rng.randint(1, 3)),
            call_history=self._history(rng.randint(2, 5)),
            sms_senders=self._history(rng.randint(2, 5)),
            voicemail=[f"vm-{rng.randrange(10**6):06d}" for _ in range(rng.randint(0, 2))],
        )
        record.validate()
        return record

    def batch(self, count: int) -> list[SubscriberRecord]:
        return [self.generate() for _ in range(count)]
