"""MSISDN handling: the mobile number that identifies a SIM's traffic.

A mobile number splits into country code, numbering-plan area and subscriber
number. Parsing is driven by a country-code table shipped as a JSON fixture;
the split is what lets the sim (and the attacker) tell country and operator
apart from a harvested number.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import MalformedNumber, UnknownCountryCode

_SEPARATORS = re.compile(r"[ \-.]")
_DIGITS = re.compile(r"^\+(\d{8,15})$")


@dataclass(frozen=True, order=True)
class Msisdn:
    """A subscriber number split into its three E.164-style parts."""

    country_code: str
    npa: str
    subscriber: str

    def __post_init__(self) -> None:
        for part in (self.country_code, self.npa, self.subscriber):
            if not part or not part.isdigit():
                raise MalformedNumber(f"msisdn part {part!r} must be nonempty digits")
        if not 1 <= len(self.country_code) <= 3:
            raise MalformedNumber(f"country code {self.country_code!r} must be 1-3 digits")

    def render(self) -> str:
        """Canonical form: '+' followed by the concatenated digit parts."""
        return f"+{self.country_code}{self.npa}{self.subscriber}"

    def __str__(self) -> str:
        return self.render()


@lru_cache(maxsize=None)
def country_code_table(path: str | None = None) -> dict[str, int]:
    """Country code -> NPA digit count, loaded from the packaged fixture."""
    if path is None:
        raw = resources.files("selflog.data").joinpath("country_codes.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    data = json.loads(raw)
    return {code: entry["npa_len"] for code, entry in data["codes"].items()}


def normalize(text: str) -> str:
    """Strip space/dash/dot separators; keep the leading '+'."""
    return _SEPARATORS.sub("", text.strip())


def parse_msisdn(text: str, table: dict[str, int] | None = None) -> Msisdn:
    """Split a '+<digits>' string into its three parts via the code table.

    The longest matching country code wins (E.164 codes are prefix-free, so
    at most one can match). Raises MalformedNumber for anything that is not
    '+' followed by 8-15 digits, UnknownCountryCode when no prefix matches.
    """
    if table is None:
        table = country_code_table()
    cleaned = normalize(text)
    m = _DIGITS.match(cleaned)
    if not m:
        raise MalformedNumber(f"{text!r} is not '+' followed by 8-15 digits")
    digits = m.group(1)
    for width in (3, 2, 1):
        code = digits[:width]
        if code in table:
            npa_len = table[code]
            rest = digits[width:]
            if len(rest) <= npa_len:
                raise MalformedNumber(f"{text!r} too short after country code {code}")
            return Msisdn(code, rest[:npa_len], rest[npa_len:])
    raise UnknownCountryCode(f"no table entry matches {text!r}")
