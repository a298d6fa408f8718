"""Number parsing, rendering and the parse/render round trip."""

from __future__ import annotations

import random

import pytest

from selflog.errors import MalformedNumber, UnknownCountryCode
from selflog.msisdn import Msisdn, country_code_table, normalize, parse_msisdn


def test_italian_number_splits_into_three_parts():
    number = parse_msisdn("+39 333 1234567")
    assert number.country_code == "39"
    assert number.npa == "333"
    assert number.subscriber == "1234567"
    assert number.render() == "+393331234567"


def test_separators_are_normalized():
    assert normalize("+39 333-123.4567") == "+393331234567"
    assert parse_msisdn("+39-333-1234567") == parse_msisdn("+393331234567")


def test_too_short_is_malformed():
    with pytest.raises(MalformedNumber):
        parse_msisdn("+1")


@pytest.mark.parametrize("text", ["393331234567", "+39abc1234567", "",
                                  "+3933312345678901", "+39"])
def test_malformed_inputs(text):
    with pytest.raises(MalformedNumber):
        parse_msisdn(text)


def test_unknown_country_code():
    with pytest.raises(UnknownCountryCode):
        parse_msisdn("+999333123456")


def test_parts_must_be_nonempty_digits():
    with pytest.raises(MalformedNumber):
        Msisdn("39", "", "1234567")
    with pytest.raises(MalformedNumber):
        Msisdn("39", "3a3", "1234567")
    with pytest.raises(MalformedNumber):
        Msisdn("1234", "333", "1234567")


def test_parse_render_round_trip_over_random_valid_numbers():
    table = country_code_table()
    rng = random.Random(90125)
    for _ in range(500):
        code = rng.choice(sorted(table))
        npa = "".join(rng.choice("0123456789") for _ in range(table[code]))
        remaining = 15 - len(code) - len(npa)
        sub_len = rng.randint(max(1, 8 - len(code) - len(npa)), remaining)
        subscriber = "".join(rng.choice("0123456789") for _ in range(sub_len))
        number = Msisdn(code, npa, subscriber)
        assert parse_msisdn(number.render()) == number


def test_render_parse_normalizes_spacing():
    number = parse_msisdn("+44 7911 123456")
    assert number.render() == normalize("+44 7911 123456")
