"""Grade countermeasures from attack traces into the three-axis rating grid.

Each guard is scored Low/Medium/High on three axes from the outcomes of
attack runs across the whole capability lattice:

  strength      what it costs to defeat the guard with an *automatable*
                attack: a commodity capability (header spoofing) means Low, a
                privileged on-device capability (certificate extraction, SMS
                read permission) means Medium, and no automated defeat at all
                means High. A defeat that needs a live human (captcha solving
                over a hotspot) is not automatable and does not cap strength.
  effectiveness Low when the check rides solely on client-supplied mutable
                data (equivalently: a commodity spoof defeats it); Medium
                when the guard leaves a gap - a channel it cannot cover
                (browsers cannot carry app signatures) or an identity gap (a
                bare human with no privileged access passes); High otherwise.
  friction      step count of the legitimate flow: High for zero steps with
                no channel gap, Medium for one step or a channel gap, Low for
                two or more.

These thresholds are a modeling choice tuned to reproduce the published
five-guard grid; they are reported as commentary alongside the ratings.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import IncompleteTraces
from .guards import BROWSER_APPLICABLE, FRICTION_SCORES, GuardKind

GRADED_CAPABILITIES = ("spoof_headers", "extract_certificate", "read_sms", "human_in_loop")
COMMODITY_CAPABILITIES = frozenset({"spoof_headers"})
HUMAN_ONLY = frozenset({"human_in_loop"})

LOW, MEDIUM, HIGH = "Low", "Medium", "High"


@dataclass(frozen=True)
class Rating:
    effective: str
    strong: str
    frictionless: str

    def as_dict(self) -> dict[str, str]:
        return {"effective": self.effective, "strong": self.strong,
                "frictionless": self.frictionless}


@dataclass(frozen=True)
class AttackOutcome:
    """One rated cell: which capabilities were held, and did any data leak."""

    vector: str
    capabilities: frozenset[str]
    success: bool


def capability_lattice() -> list[frozenset[str]]:
    """All 16 subsets of the graded capabilities, smallest first."""
    subsets: list[frozenset[str]] = []
    for size in range(len(GRADED_CAPABILITIES) + 1):
        for combo in combinations(GRADED_CAPABILITIES, size):
            subsets.append(frozenset(combo))
    return subsets


def _minimal_sets(sets: set[frozenset[str]]) -> list[frozenset[str]]:
    return [s for s in sets if not any(other < s for other in sets)]


def rate(guard_kind: GuardKind | str, outcomes: list[AttackOutcome],
         vectors: tuple[str, ...] = ("app", "hotspot")) -> Rating:
    """Derive the three-axis rating for one guard from its trace set.

    Raises IncompleteTraces unless the outcomes cover every (vector,
    capability-subset) cell of the lattice.
    """
    kind = GuardKind(guard_kind)
    covered = {(o.vector, o.capabilities) for o in outcomes}
    required = {(v, caps) for v in vectors for caps in capability_lattice()}
    missing = required - covered
    if missing:
        raise IncompleteTraces(f"{len(missing)} lattice cells missing, e.g. {sorted(missing)[0]}")

    defeats = {o.capabilities for o in outcomes if o.success}
    minimal = _minimal_sets(defeats)
    automated_minimal = [d for d in minimal if "human_in_loop" not in d]

    if any(d <= COMMODITY_CAPABILITIES for d in automated_minimal):
        strong = LOW
    elif automated_minimal:
        strong = MEDIUM
    else:
        strong = HIGH

    channel_gap = not BROWSER_APPLICABLE[kind]
    if any(d <= COMMODITY_CAPABILITIES for d in automated_minimal):
        effective = LOW
    elif channel_gap or any(d <= HUMAN_ONLY for d in minimal):
        effective = MEDIUM
    else:
        effective = HIGH

    score = FRICTION_SCORES[kind]
    if score == 0 and not channel_gap:
        frictionless = HIGH
    elif score <= 1 or channel_gap:
        frictionless = MEDIUM
    else:
        frictionless = LOW

    return Rating(effective=effective, strong=strong, frictionless=frictionless)
