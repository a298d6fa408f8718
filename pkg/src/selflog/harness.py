"""Scenario execution: run the attack matrix, compare against golden grids.

A scenario file fixes the seed, the operator profiles, the guard stacks, the
attacker capability configurations and the vectors. The runner executes every
(guard stack, operator, vector, capabilities) cell on an isolated world seeded
from the master seed and the cell index, builds the harvest matrix from the
unguarded baseline cells, and feeds the guarded cells to the rating engine.
Reports are plain data with a stable JSON rendering, so equal seeds mean equal
bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .attacker import AttackerCapabilities, Harvest, run_app_attack, run_hotspot_attack
from .errors import ConfigError, GoldenFormatError
from .guards import GUARD_LABELS, GuardKind
from .profiles import (
    FIELD_LABELS,
    OP_LABELS,
    PASSIVE_FIELDS,
    REPORTED_ACTIVE_OPS,
    SELF_LOGIN_ROW_LABEL,
    OperatorProfile,
    SelfLoginMode,
    load_packaged_profile,
    load_profile,
)
from .rating import AttackOutcome, capability_lattice, rate
from .world import World

SCHEMA_VERSION = 1

ROW_LABELS = tuple(
    [FIELD_LABELS[name] for name in PASSIVE_FIELDS]
    + [OP_LABELS[op] for op in REPORTED_ACTIVE_OPS]
    + [SELF_LOGIN_ROW_LABEL]
)

REPORT_COMMENTARY = (
    "One operator requires TLS on its data APIs; the transport abstraction "
    "subsumes it and it is not simulated cryptographically.",
    "Rating thresholds are a modeling choice tuned to reproduce the published "
    "five-guard grid; see the rating engine documentation.",
    "Population-level exposure claims (share of affected subscribers) are not "
    "computed by this harness; they depend on market data outside its scope.",
)

VALID_VECTORS = ("app", "hotspot")
CAPABILITY_FLAGS = ("spoof_headers", "extract_certificate", "read_sms",
                    "human_in_loop", "knows_password", "knows_hotspot_key")


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario: everything run_matrix needs, and nothing mutable."""

    seed: int
    subscribers_per_operator: int = 25
    operators: tuple[str, ...] = ("mo1", "mo2", "mo3", "mo4", "mo5", "mo6_mo7")
    guard_stacks: tuple[tuple, ...] = ((),)
    attacker_configs: tuple = ("lattice",)
    vectors: tuple[str, ...] = ("app", "hotspot")
    activate_services_variant: str = "table"
    include_traces: bool = False

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        try:
            seed = int(data["seed"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("scenario needs an integer 'seed'") from None
        operators = tuple(data.get("operators", cls.operators))
        if not operators:
            raise ConfigError("scenario needs at least one operator")
        vectors = tuple(data.get("vectors", ("app", "hotspot")))
        if not vectors or any(v not in VALID_VECTORS for v in vectors):
            raise ConfigError(f"vectors must be a nonempty subset of {VALID_VECTORS}")
        subscribers = int(data.get("subscribers_per_operator", 25))
        if subscribers < 2:
            raise ConfigError("subscribers_per_operator must be at least 2")
        stacks = data.get("guard_stacks", [[]])
        guard_stacks = []
        for stack in stacks:
            for spec in stack:
                kind = spec if isinstance(spec, str) else spec.get("kind")
                try:
                    GuardKind(kind)
                except ValueError:
                    raise ConfigError(f"unknown guard kind {kind!r}") from None
            guard_stacks.append(tuple(spec if isinstance(spec, str) else dict(spec)
                                      for spec in stack))
        attacker_configs = data.get("attacker_configs", "lattice")
        if attacker_configs != "lattice":
            parsed = []
            for entry in attacker_configs:
                unknown = set(entry) - set(CAPABILITY_FLAGS)
                if unknown:
                    raise ConfigError(f"unknown capability flags {sorted(unknown)}")
                parsed.append(tuple(sorted((k, bool(v)) for k, v in entry.items())))
            attacker_configs = tuple(parsed)
        else:
            attacker_configs = ("lattice",)
        variant = data.get("activate_services_variant", "table")
        if variant not in ("table", "text"):
            raise ConfigError(f"activate_services_variant must be 'table' or 'text', "
                              f"got {variant!r}")
        return cls(
            seed=seed,
            subscribers_per_operator=subscribers,
            operators=operators,
            guard_stacks=tuple(guard_stacks),
            attacker_configs=attacker_configs,
            vectors=vectors,
            activate_services_variant=variant,
            include_traces=bool(data.get("include_traces", False)),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ScenarioConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(data)

    def attacker_capability_list(self) -> list[AttackerCapabilities]:
        """Expand the config into concrete capability objects.

        The 'lattice' keyword yields all 16 combinations of the graded flags;
        hotspot-vector runs presuppose key knowledge, so the lattice carries
        knows_hotspot_key throughout. knows_password stays false everywhere.
        """
        if self.attacker_configs == ("lattice",):
            return [
                AttackerCapabilities(
                    spoof_headers="spoof_headers" in caps,
                    extract_certificate="extract_certificate" in caps,
                    read_sms="read_sms" in caps,
                    human_in_loop="human_in_loop" in caps,
                    knows_hotspot_key=True,
                )
                for caps in capability_lattice()
            ]
        return [AttackerCapabilities(**dict(entry)) for entry in self.attacker_configs]

    def resolve_profiles(self) -> list[OperatorProfile]:
        profiles = []
        for ref in self.operators:
            if "/" in ref or ref.endswith(".json") or Path(ref).exists():
                profiles.append(load_profile(ref))
            else:
                profiles.append(load_packaged_profile(ref))
        return profiles


def default_scenario() -> ScenarioConfig:
    raw = resources.files("selflog.data").joinpath("scenarios/default.json").read_text("utf-8")
    return ScenarioConfig.from_dict(json.loads(raw))


def packaged_golden_dir():
    return resources.files("selflog.data").joinpath("golden")


@dataclass
class Report:
    """Run output: matrix, ratings, optional traces, and verify diffs."""

    seed: int
    matrix: dict
    ratings: dict
    diffs: list = field(default_factory=list)
    commentary: tuple[str, ...] = REPORT_COMMENTARY
    lint: list = field(default_factory=list)
    traces: dict | None = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        payload = {
            "schema_version": self.schema_version,
            "seed": self.seed,
            "matrix": self.matrix,
            "ratings": self.ratings,
            "diffs": self.diffs,
            "commentary": list(self.commentary),
            "lint": self.lint,
        }
        if self.traces is not None:
            payload["traces"] = self.traces
        return payload

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        return cls(
            seed=data["seed"],
            matrix=data["matrix"],
            ratings=data["ratings"],
            diffs=list(data.get("diffs", [])),
            commentary=tuple(data.get("commentary", ())),
            lint=list(data.get("lint", [])),
            traces=data.get("traces"),
            schema_version=data.get("schema_version", SCHEMA_VERSION),
        )


def _stack_signature(stack: tuple) -> str:
    if not stack:
        return "unguarded"
    return "+".join(spec if isinstance(spec, str) else spec["kind"] for spec in stack)


def _caps_signature(caps: AttackerCapabilities) -> str:
    flags = sorted(caps.flag_set())
    return "+".join(flags) if flags else "none"


def _cell_key(display: str, vector: str, caps: AttackerCapabilities, stack_sig: str) -> str:
    return f"{display}|{vector}|caps:{_caps_signature(caps)}|stack:{stack_sig}"


def _matrix_column(profile: OperatorProfile, harvest: Harvest, cell_key: str) -> dict:
    """Derive one operator's 19 cells from its unguarded baseline harvest."""
    column: dict[str, dict] = {}

    def ref(trace_id: str | None) -> list[str]:
        return [f"{cell_key}/{trace_id}"] if trace_id else []

    if profile.self_login is SelfLoginMode.DISABLED:
        for label in ROW_LABELS:
            column[label] = {"value": "PasswordRequired", "refs": ref(harvest.auth_ref)}
        return column

    for field_name in PASSIVE_FIELDS:
        label = FIELD_LABELS[field_name]
        refs = ref(harvest.field_refs.get(field_name))
        if field_name in harvest.notified:
            value = "Y-notified"
        elif field_name in harvest.obfuscated:
            value = "Y-obfuscated"
        elif field_name in harvest.fields_obtained:
            value = "Y"
        elif field_name in harvest.derived:
            value = "N-derivable"
            refs = [f"{cell_key}/{harvest.field_refs[src]}"
                    for src in ("name", "surname", "birth_date", "birth_place")
                    if src in harvest.field_refs]
        else:
            value = "N"
        column[label] = {"value": value, "refs": refs}

    for op in REPORTED_ACTIVE_OPS:
        outcome = harvest.op_outcome(op)
        column[OP_LABELS[op]] = {
            "value": "Y" if outcome == "ok" else "N",
            "refs": ref(harvest.op_refs.get(op)),
        }

    always = profile.self_login is SelfLoginMode.ALWAYS_ACTIVE
    column[SELF_LOGIN_ROW_LABEL] = {
        "value": "Y" if always else "N",
        "refs": ref(harvest.auth_ref),
    }
    return column


def run_matrix(config: ScenarioConfig) -> Report:
    """Execute every scenario cell and assemble the report."""
    profiles = config.resolve_profiles()
    caps_list = config.attacker_capability_list()
    columns = [profile.display_name for profile in profiles]

    baselines: dict[str, tuple[Harvest, str]] = {}
    outcomes: dict[GuardKind, list[AttackOutcome]] = {}
    traces: dict[str, list[dict]] = {}
    cell_index = 0

    for stack in config.guard_stacks:
        stack_sig = _stack_signature(stack)
        rated_kind = (GuardKind(stack[0] if isinstance(stack[0], str) else stack[0]["kind"])
                      if len(stack) == 1 else None)
        for profile in profiles:
            display = profile.display_name
            for vector in config.vectors:
                for caps in caps_list:
                    cell_index += 1
                    world = World(
                        f"{config.seed}:{cell_index}",
                        [profile],
                        subscribers_per_operator=config.subscribers_per_operator,
                        activate_services_variant=config.activate_services_variant,
                    )
                    endpoint = world.guarded(display, list(stack))
                    attack = run_app_attack if vector == "app" else run_hotspot_attack
                    harvest = attack(world, endpoint, caps)
                    key = _cell_key(display, vector, caps, stack_sig)
                    if config.include_traces:
                        traces[key] = [entry.to_dict() for entry in harvest.trace]
                    if (not stack and vector == "app" and not caps.flag_set()
                            and display not in baselines):
                        baselines[display] = (harvest, key)
                    if rated_kind is not None:
                        outcomes.setdefault(rated_kind, []).append(AttackOutcome(
                            vector, caps.flag_set(), bool(harvest.fields_obtained)))

    cells: dict[str, dict] = {label: {} for label in ROW_LABELS}
    for profile in profiles:
        display = profile.display_name
        if display not in baselines:
            raise ConfigError(
                "matrix needs an unguarded app-vector cell with no capabilities; "
                "include the empty guard stack, the app vector and a bare attacker")
        harvest, key = baselines[display]
        for label, cell in _matrix_column(profile, harvest, key).items():
            cells[label][display] = cell

    ratings = {}
    for kind, kind_outcomes in outcomes.items():
        ratings[GUARD_LABELS[kind]] = rate(kind, kind_outcomes,
                                           vectors=config.vectors).as_dict()
    ratings = {label: ratings[label] for label in sorted(ratings)}

    matrix = {"rows": list(ROW_LABELS), "columns": columns, "cells": cells}
    return Report(
        seed=config.seed,
        matrix=matrix,
        ratings=ratings,
        lint=lint_privacy_defaults(profiles),
        traces=traces if config.include_traces else None,
    )


# --- golden comparison ------------------------------------------------------


def _load_golden(golden_dir, name: str, required: tuple[str, ...]) -> dict:
    try:
        raw = golden_dir.joinpath(name).read_text(encoding="utf-8")
        data = json.loads(raw)
    except (OSError, json.JSONDecodeError, FileNotFoundError) as exc:
        raise GoldenFormatError(f"{name}: {exc}") from exc
    missing = [key for key in required if key not in data]
    if missing:
        raise GoldenFormatError(f"{name}: missing keys {missing}")
    return data


def verify(report: Report, golden_dir=None) -> list[dict]:
    """Cell-by-cell structural diff of a report against the golden grids."""
    if golden_dir is None:
        golden_dir = packaged_golden_dir()
    elif isinstance(golden_dir, str):
        golden_dir = Path(golden_dir)
    table1 = _load_golden(golden_dir, "table1.json", ("rows", "columns", "cells"))
    table2 = _load_golden(golden_dir, "table2.json", ("ratings",))

    diffs: list[dict] = []
    actual_cells = report.matrix.get("cells", {})
    for row in table1["rows"]:
        for column in table1["columns"]:
            expected = table1["cells"].get(row, {}).get(column)
            actual = actual_cells.get(row, {}).get(column, {}).get("value")
            if expected != actual:
                diffs.append({"kind": "matrix", "row": row, "column": column,
                              "expected": expected, "actual": actual})
    for guard, expected_axes in table2["ratings"].items():
        actual_axes = report.ratings.get(guard, {})
        for axis, expected in expected_axes.items():
            actual = actual_axes.get(axis)
            if expected != actual:
                diffs.append({"kind": "rating", "guard": guard, "axis": axis,
                              "expected": expected, "actual": actual})
    return diffs


# --- rendering ----------------------------------------------------------------


def render(report: Report, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if fmt in ("md", "markdown"):
        return _render_markdown(report)
    raise ConfigError(f"unknown render format {fmt!r}")


def _render_markdown(report: Report) -> str:
    lines = ["# Self-login harvest matrix", ""]
    columns = report.matrix["columns"]
    lines.append("| Vulnerability | " + " | ".join(columns) + " |")
    lines.append("|" + "---|" * (len(columns) + 1))
    for row in report.matrix["rows"]:
        values = [report.matrix["cells"][row][col]["value"] for col in columns]
        lines.append(f"| {row} | " + " | ".join(values) + " |")
    lines += ["", "# Countermeasure ratings", ""]
    lines.append("| Countermeasure | Effective | Strong | Frictionless |")
    lines.append("|---|---|---|---|")
    for guard, axes in report.ratings.items():
        lines.append(f"| {guard} | {axes['effective']} | {axes['strong']} "
                     f"| {axes['frictionless']} |")
    if report.diffs:
        lines += ["", "# Diffs against golden", ""]
        for diff in report.diffs:
            lines.append(f"- {json.dumps(diff, sort_keys=True)}")
    if report.lint:
        lines += ["", "# Privacy-by-default findings", ""]
        for finding in report.lint:
            lines.append(f"- {finding['operator']}: {finding['finding']}")
    lines += ["", "# Commentary", ""]
    for note in report.commentary:
        lines.append(f"- {note}")
    return "\n".join(lines) + "\n"


# --- privacy-by-default lint ---------------------------------------------------


FINDING_DEFAULT_ON = "default-on, deactivatable"
FINDING_ALWAYS_ACTIVE = "always active, not deactivatable"


def lint_privacy_defaults(profiles: list[OperatorProfile]) -> list[dict]:
    """Flag profiles whose self-login starts enabled without explicit opt-in."""
    findings = []
    for profile in profiles:
        if profile.self_login is SelfLoginMode.DEFAULT_ON_DEACTIVATABLE:
            findings.append({"operator": profile.display_name,
                             "finding": FINDING_DEFAULT_ON})
        elif profile.self_login is SelfLoginMode.ALWAYS_ACTIVE:
            findings.append({"operator": profile.display_name,
                             "finding": FINDING_ALWAYS_ACTIVE})
    return findings
