"""Italian fiscal-code (codice fiscale) derivation.

The 16-character code is a pure function of name, surname, sex, birth date
and the 4-character cadastral (Belfiore) code of the birth place:

  - 3 letters from the surname: consonants, then vowels, padded with 'X'
  - 3 letters from the first name: with four or more consonants the 1st, 3rd
    and 4th are taken, otherwise same rule as the surname
  - 2 digits of the birth year, a month letter, the day (+40 for women)
  - the cadastral code
  - a check character over the first 15 (odd/even value tables, sum mod 26)

This is why leaking name, surname, birth date and birth place is equivalent
to leaking the fiscal code itself.
"""

from __future__ import annotations

import json
import re
import unicodedata
from datetime import date
from functools import lru_cache
from importlib import resources

from .errors import InvalidDate, UntransliterableName

VOWELS = "AEIOU"

MONTH_LETTERS = {
    1: "A", 2: "B", 3: "C", 4: "D", 5: "E", 6: "H",
    7: "L", 8: "M", 9: "P", 10: "R", 11: "S", 12: "T",
}

# Check-character value tables (Decreto MEF 12/03/1974).
ODD_VALUES = {
    "0": 1, "1": 0, "2": 5, "3": 7, "4": 9, "5": 13, "6": 15, "7": 17, "8": 19, "9": 21,
    "A": 1, "B": 0, "C": 5, "D": 7, "E": 9, "F": 13, "G": 15, "H": 17, "I": 19, "J": 21,
    "K": 2, "L": 4, "M": 18, "N": 20, "O": 11, "P": 3, "Q": 6, "R": 8, "S": 12, "T": 14,
    "U": 16, "V": 10, "W": 22, "X": 25, "Y": 24, "Z": 23,
}
EVEN_VALUES = {
    "0": 0, "1": 1, "2": 2, "3": 3, "4": 4, "5": 5, "6": 6, "7": 7, "8": 8, "9": 9,
    "A": 0, "B": 1, "C": 2, "D": 3, "E": 4, "F": 5, "G": 6, "H": 7, "I": 8, "J": 9,
    "K": 10, "L": 11, "M": 12, "N": 13, "O": 14, "P": 15, "Q": 16, "R": 17, "S": 18,
    "T": 19, "U": 20, "V": 21, "W": 22, "X": 23, "Y": 24, "Z": 25,
}

BELFIORE_PATTERN = re.compile(r"^[A-Z]\d{3}$")


def transliterate(name: str) -> str:
    """Uppercase A-Z form of a name: diacritics stripped, non-letters dropped."""
    decomposed = unicodedata.normalize("NFD", name)
    stripped = "".join(c for c in decomposed if unicodedata.category(c) != "Mn")
    letters = "".join(c for c in stripped.upper() if "A" <= c <= "Z")
    if not letters:
        raise UntransliterableName(f"{name!r} has no A-Z representation")
    return letters


def _split(letters: str) -> tuple[str, str]:
    consonants = "".join(c for c in letters if c not in VOWELS)
    vowels = "".join(c for c in letters if c in VOWELS)
    return consonants, vowels


def surname_code(surname: str) -> str:
    consonants, vowels = _split(transliterate(surname))
    return (consonants + vowels + "XXX")[:3]


def name_code(name: str) -> str:
    consonants, vowels = _split(transliterate(name))
    if len(consonants) >= 4:
        return consonants[0] + consonants[2] + consonants[3]
    return (consonants + vowels + "XXX")[:3]


def date_code(birth_date: date, sex: str) -> str:
    if sex not in ("M", "F"):
        raise InvalidDate(f"sex must be 'M' or 'F', got {sex!r}")
    day = birth_date.day + (40 if sex == "F" else 0)
    return f"{birth_date.year % 100:02d}{MONTH_LETTERS[birth_date.month]}{day:02d}"


def check_char(partial: str) -> str:
    """Check character over the first 15 code characters (positions 1-indexed)."""
    if len(partial) != 15:
        raise ValueError(f"check character needs 15 characters, got {len(partial)}")
    total = sum(
        ODD_VALUES[ch] if pos % 2 == 1 else EVEN_VALUES[ch]
        for pos, ch in enumerate(partial, start=1)
    )
    return chr(ord("A") + total % 26)


def derive_tax_code(name: str, surname: str, sex: str, birth_date: date | str,
                    belfiore_code: str) -> str:
    """Compute the 16-character fiscal code from its five inputs.

    Raises UntransliterableName for names without letters and InvalidDate for
    dates that do not exist on the calendar. The cadastral code must match
    the letter+3-digit pattern.
    """
    if isinstance(birth_date, str):
        try:
            birth_date = date.fromisoformat(birth_date)
        except ValueError as exc:
            raise InvalidDate(str(exc)) from None
    code = belfiore_code.upper()
    if not BELFIORE_PATTERN.match(code):
        raise ValueError(f"cadastral code {belfiore_code!r} must match letter+3 digits")
    partial = surname_code(surname) + name_code(name) + date_code(birth_date, sex) + code
    return partial + check_char(partial)


class BelfioreTable:
    """Birth-place name -> cadastral code lookup (public data, attacker input)."""

    def __init__(self, places: dict[str, str]):
        for name, code in places.items():
            if not BELFIORE_PATTERN.match(code):
                raise ValueError(f"cadastral code {code!r} for {name!r} is malformed")
        self._places = {name.upper(): code for name, code in places.items()}

    def lookup(self, place_name: str) -> str | None:
        return self._places.get(place_name.upper())

    def __contains__(self, place_name: str) -> bool:
        return place_name.upper() in self._places

    def __len__(self) -> int:
        return len(self._places)


@lru_cache(maxsize=1)
def default_belfiore_table() -> BelfioreTable:
    raw = resources.files("selflog.data").joinpath("belfiore.json").read_text("utf-8")
    return BelfioreTable(json.loads(raw)["places"])
