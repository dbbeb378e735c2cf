"""Command-line interface: ``scg <subcommand> ...``.

Exit codes: 0 success; 1 not an NE / verification failed; 2 cycle found;
3 step limit; 4 construction inapplicable; 64 usage error; 66 unreadable
or malformed input file; 69 profile cap exceeded.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from scg import constructions, counterexamples, formats, generate
from scg.dynamics import fip_scan, run_dynamics
from scg.model import ResourceLimitError, enumerate_nash, is_nash

EX_USAGE = 64
EX_NOINPUT = 66
EX_UNAVAILABLE = 69


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _read_instance(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return formats.parse_instance(text)
    except formats.ParseError as exc:
        raise InputError(f"{path}: {exc}") from None


def _profile(text: str, instance):
    try:
        return formats.parse_profile(text, instance)
    except formats.ParseError as exc:
        raise UsageError(str(exc)) from None


def cmd_check_ne(args) -> int:
    instance = _read_instance(args.instance)
    profile = _profile(args.profile, instance)
    check = is_nash(instance, profile)
    if check:
        print(f"NE {formats.format_profile(profile)}")
        return 0
    print(f"NOT NE {formats.format_profile(profile)}")
    print("deviators: " + ",".join(str(i) for i in check.deviators))
    return 1


def cmd_brute_ne(args) -> int:
    instance = _read_instance(args.instance)
    found = enumerate_nash(instance)
    for profile in found:
        print(formats.format_profile(profile))
    print(f"count {len(found)}")
    return 0


def _read_schedule(path: str | None):
    if path is None:
        raise UsageError("--scheduler file needs --schedule-file")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    entries = []
    for token in text.replace(",", " ").split():
        try:
            if ":" in token:
                player, resource = token.split(":")
                entries.append((int(player), int(resource)))
            else:
                entries.append(int(token))
        except ValueError:
            raise InputError(f"{path}: bad schedule entry {token!r}") from None
    return entries


def cmd_dynamics(args) -> int:
    instance = _read_instance(args.instance)
    start = _profile(args.start, instance) if args.start else (1,) * instance.player_count
    if args.scheduler == "file":
        scheduler = _read_schedule(args.schedule_file)
    else:
        scheduler = args.scheduler.replace("-", "_")
    try:
        result = run_dynamics(instance, start, scheduler, args.mode, seed=args.seed, max_steps=args.max_steps)
    except (ValueError, IndexError) as exc:
        raise InputError(f"schedule rejected: {exc}") from None
    doc = formats.trace_to_document(instance, result, args.scheduler, args.mode, args.seed)
    text = formats.serialize_trace(doc)
    if args.trace:
        Path(args.trace).write_text(text)
        print(f"{result.status} steps={len(result.trace)} final={formats.format_profile(result.final_state)}")
    else:
        sys.stdout.write(text)
    return {"converged_to_NE": 0, "cycle_detected": 2, "step_limit": 3}[result.status]


def cmd_fip_scan(args) -> int:
    instance = _read_instance(args.instance)
    free = _profile(args.free, None) if args.free else None
    base = _profile(args.base, instance) if args.base else None
    try:
        verdict = fip_scan(instance, args.mode, free_players=free, base=base)
    except (ValueError, IndexError) as exc:
        raise UsageError(str(exc)) from None
    if verdict.acyclic:
        print(f"ACYCLIC states={verdict.states_explored}")
        return 0
    print(f"CYCLE length={len(verdict.witness_cycle)} states={verdict.states_explored}")
    print(f"start {formats.format_profile(verdict.witness_start)}")
    for s in verdict.witness_cycle:
        print(
            f"{s.time} player {s.mover}: {s.from_resource} -> {s.to_resource} "
            f"({formats.format_rational(s.payoff_before)} -> {formats.format_rational(s.payoff_after)})"
        )
    return 2


def cmd_construct(args) -> int:
    instance = _read_instance(args.instance)
    try:
        report = constructions.FAMILIES[args.family](instance)
    except constructions.NotApplicable as exc:
        print(f"inapplicable: {exc}")
        return 4
    print(formats.format_profile(report.profile))
    print(f"method {report.method}")
    print(f"verified {str(report.verified).lower()}")
    return 0 if report.verified else 1


def cmd_counterexample(args) -> int:
    canonical = counterexamples.BUILDERS[args.name]()
    report = counterexamples.verify_counterexample(canonical)
    print(report)
    passed = report.passed
    if args.name == "three-color":
        verdict = counterexamples.three_color_fip_scan(canonical)
        print(
            "  fip-scan over A, B, C, D: "
            + ("ACYCLIC" if verdict.acyclic else f"CYCLE length={len(verdict.witness_cycle)}")
        )
        passed &= not verdict.acyclic
    if args.emit:
        Path(args.emit).write_text(formats.serialize_instance(canonical.instance))
    return 0 if passed else 1


def cmd_gen(args) -> int:
    try:
        instance = generate.generate_instance(
            args.family,
            args.n,
            args.r,
            args.seed,
            identical_resources=args.identical_resources,
            non_user_specific=args.non_user_specific,
            degree=args.degree,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sys.stdout.write(formats.serialize_instance(instance))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scg", description="Spatial congestion game workbench.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check-ne", help="test one profile for equilibrium")
    p.add_argument("-i", "--instance", required=True)
    p.add_argument("-p", "--profile", required=True, help="comma-separated resources, e.g. 1,2,1")
    p.set_defaults(func=cmd_check_ne)

    p = sub.add_parser("brute-ne", help="list every pure NE")
    p.add_argument("-i", "--instance", required=True)
    p.set_defaults(func=cmd_brute_ne)

    p = sub.add_parser("dynamics", help="run improvement dynamics and write a trace")
    p.add_argument("-i", "--instance", required=True)
    p.add_argument("--start")
    p.add_argument("--scheduler", choices=("round-robin", "random", "file"), default="round-robin")
    p.add_argument("--schedule-file", help="entries 'player' or 'player:resource'")
    p.add_argument("--mode", choices=("better", "best"), default="better")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--trace")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("fip-scan", help="search the improvement digraph for a cycle")
    p.add_argument("-i", "--instance", required=True)
    p.add_argument("--mode", choices=("better", "best"), default="better")
    p.add_argument("--free", help="comma-separated players allowed to move (others held at --base)")
    p.add_argument("--base")
    p.set_defaults(func=cmd_fip_scan)

    p = sub.add_parser("construct", help="build an NE for a special graph family")
    p.add_argument("-i", "--instance", required=True)
    p.add_argument("--family", choices=tuple(constructions.FAMILIES), required=True)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("counterexample", help="build and verify a canonical counter-example")
    p.add_argument("--name", choices=tuple(counterexamples.BUILDERS), required=True)
    p.add_argument("--emit", help="also write the instance document here")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("gen", help="print a seeded random instance")
    p.add_argument("--family", choices=generate.FAMILIES, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-r", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--degree", type=int, help="degree for the bipartite family")
    p.add_argument("--identical-resources", action="store_true")
    p.add_argument("--non-user-specific", action="store_true")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"scg: error: {exc}", file=sys.stderr)
        return EX_USAGE
    except InputError as exc:
        print(f"scg: {exc}", file=sys.stderr)
        return EX_NOINPUT
    except ResourceLimitError as exc:
        print(f"scg: {exc}", file=sys.stderr)
        return EX_UNAVAILABLE


if __name__ == "__main__":
    sys.exit(main())
