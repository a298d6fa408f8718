"""Rating engine: synthetic trace sets must reproduce the published grid."""

from __future__ import annotations

import pytest

from selflog.errors import IncompleteTraces
from selflog.guards import GuardKind
from selflog.rating import AttackOutcome, Rating, capability_lattice, rate


def outcomes_where(success_rule) -> list[AttackOutcome]:
    """Full-lattice outcome set with success decided by the given rule."""
    items = []
    for vector in ("app", "hotspot"):
        for caps in capability_lattice():
            items.append(AttackOutcome(vector, caps, success_rule(vector, caps)))
    return items


def test_lattice_has_sixteen_subsets():
    lattice = capability_lattice()
    assert len(lattice) == 16
    assert frozenset() in lattice
    assert frozenset({"spoof_headers", "extract_certificate", "read_sms",
                      "human_in_loop"}) in lattice


def test_header_control_rating():
    outcomes = outcomes_where(lambda v, c: "spoof_headers" in c)
    assert rate(GuardKind.HEADER_CONTROL, outcomes) == Rating("Low", "Low", "High")


def test_in_app_certificate_rating():
    outcomes = outcomes_where(lambda v, c: v == "app" and "extract_certificate" in c)
    assert rate(GuardKind.IN_APP_CERTIFICATE, outcomes) == Rating(
        "Medium", "Medium", "Medium")


def test_sms_authentication_rating():
    outcomes = outcomes_where(lambda v, c: "read_sms" in c)
    assert rate(GuardKind.SMS_AUTHENTICATION, outcomes) == Rating(
        "High", "Medium", "Low")


def test_password_authentication_rating():
    outcomes = outcomes_where(lambda v, c: False)
    assert rate(GuardKind.PASSWORD_AUTHENTICATION, outcomes) == Rating(
        "High", "High", "Low")


def test_captcha_rating():
    outcomes = outcomes_where(lambda v, c: v == "hotspot" and "human_in_loop" in c)
    assert rate(GuardKind.CAPTCHA, outcomes) == Rating("Medium", "High", "Medium")


def test_incomplete_traces_rejected():
    outcomes = outcomes_where(lambda v, c: False)[:-1]
    with pytest.raises(IncompleteTraces):
        rate(GuardKind.CAPTCHA, outcomes)


def test_single_vector_coverage_allowed_when_requested():
    outcomes = [AttackOutcome("app", caps, False) for caps in capability_lattice()]
    rating = rate(GuardKind.PASSWORD_AUTHENTICATION, outcomes, vectors=("app",))
    assert rating.strong == "High"


def test_guard_that_blocks_nothing_rates_low():
    outcomes = outcomes_where(lambda v, c: True)
    rating = rate(GuardKind.HEADER_CONTROL, outcomes)
    assert rating.effective == "Low" and rating.strong == "Low"
