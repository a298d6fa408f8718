"""Command-line entry point.

Subcommands: ``run`` executes the scenario matrix and renders a report,
``verify`` compares a run against the golden grids (exit status 1 on any
diff), ``lint`` audits profiles for privacy-by-default violations, and
``attack`` fires a single attack vector and prints the harvest. The
``SELFLOG_SEED`` environment variable overrides the scenario seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from .attacker import (
    AttackerCapabilities,
    run_app_attack,
    run_hotspot_attack,
)
from .errors import SelflogError
from .guards import GuardKind
from .harness import (
    CAPABILITY_FLAGS,
    ScenarioConfig,
    default_scenario,
    lint_privacy_defaults,
    render,
    run_matrix,
    verify,
)
from .profiles import load_profile, load_shipped_profiles
from .world import World


def _load_config(path: str | None, env: dict | None = None) -> ScenarioConfig:
    env = os.environ if env is None else env
    config = ScenarioConfig.from_file(path) if path else default_scenario()
    override = env.get("SELFLOG_SEED")
    if override is not None:
        config = dataclasses.replace(config, seed=int(override))
    return config


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    report = run_matrix(config)
    document = render(report, args.format)
    if args.out:
        Path(args.out).write_text(document, encoding="utf-8")
    else:
        sys.stdout.write(document)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    report = run_matrix(config)
    report.diffs = verify(report, args.golden)
    if report.diffs:
        for diff in report.diffs:
            print(json.dumps(diff, sort_keys=True))
        print(f"FAIL: {len(report.diffs)} diff(s) against golden grids")
        return 1
    print("OK: report matches the golden grids")
    return 0


def _cmd_lint(args: argparse.Namespace) -> int:
    if args.profiles:
        paths = sorted(Path(args.profiles).glob("*.json"))
        profiles = [load_profile(path) for path in paths]
    else:
        profiles = load_shipped_profiles()
    findings = lint_privacy_defaults(profiles)
    for finding in findings:
        print(f"{finding['operator']}: {finding['finding']}")
    if not findings:
        print("no findings")
    return 0


def _cmd_attack(args: argparse.Namespace) -> int:
    seed = int(os.environ.get("SELFLOG_SEED", args.seed))
    flags = dict.fromkeys(args.cap or (), True)
    if args.vector == "hotspot":
        # Hotspot runs presuppose the shared key, as granted access implies.
        flags.setdefault("knows_hotspot_key", True)
    capabilities = AttackerCapabilities(**flags)
    world = World(seed, load_shipped_profiles(),
                  subscribers_per_operator=args.subscribers)
    endpoint = world.guarded(args.operator, [{"kind": g} for g in (args.guard or [])])
    attack = run_app_attack if args.vector == "app" else run_hotspot_attack
    harvest = attack(world, endpoint, capabilities)
    print(json.dumps(harvest.to_dict(), indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selflog",
        description="Self-login privacy testbed: attack matrix, golden "
                    "verification, profile lint and single attacks.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute the scenario matrix and render a report")
    run_p.add_argument("--config", help="scenario JSON (default: packaged scenario)")
    run_p.add_argument("--format", choices=("json", "md"), default="json")
    run_p.add_argument("--out", help="write the report here instead of stdout")
    run_p.set_defaults(func=_cmd_run)

    verify_p = sub.add_parser("verify", help="run and compare against the golden grids")
    verify_p.add_argument("--config", help="scenario JSON (default: packaged scenario)")
    verify_p.add_argument("--golden", help="golden directory (default: packaged)")
    verify_p.set_defaults(func=_cmd_verify)

    lint_p = sub.add_parser("lint", help="audit profiles for privacy-by-default violations")
    lint_p.add_argument("--profiles", help="directory of profile JSON files "
                                           "(default: shipped profiles)")
    lint_p.set_defaults(func=_cmd_lint)

    attack_p = sub.add_parser("attack", help="run one attack vector and print the harvest")
    attack_p.add_argument("--operator", required=True, help="operator name, e.g. MO4")
    attack_p.add_argument("--vector", choices=("app", "hotspot"), default="app")
    attack_p.add_argument("--cap", action="append", choices=CAPABILITY_FLAGS,
                          help="grant one attacker capability (repeatable)")
    attack_p.add_argument("--guard", action="append",
                          choices=[kind.value for kind in GuardKind],
                          help="stack a guard in front of the operator (repeatable)")
    attack_p.add_argument("--seed", type=int, default=3901)
    attack_p.add_argument("--subscribers", type=int, default=25)
    attack_p.set_defaults(func=_cmd_attack)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SelflogError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
