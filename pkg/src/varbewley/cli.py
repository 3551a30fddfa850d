"""Command-line front end: ``validate``, ``audit`` and ``dominance``."""

from __future__ import annotations

import argparse
import json
import sys

from .model import ProfileError, ValidationError
from .preference import EPS_DEC
from .report import (
    EXIT_INVALID,
    EXIT_VERIFICATION,
    dominance_report,
    dumps,
    load_document,
    load_profile,
    parse_acts,
    run_audit,
)
from .witness import VerificationFailed


def _load(path: str):
    """Profile or an error message with the exit status to use."""
    try:
        return load_profile(path), None
    except FileNotFoundError:
        return None, f"error: no such profile file: {path}"
    except json.JSONDecodeError as exc:
        return None, f"error: {path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
    except ProfileError as exc:
        lines = [f"error: {path}: {len(exc.errors)} problem(s)"]
        lines += [f"  [{e.invariant}] {e.message}" for e in exc.errors]
        return None, "\n".join(lines)


def cmd_validate(args) -> int:
    profile, err = _load(args.profile)
    if err:
        print(err, file=sys.stderr)
        return 1
    print(f"ok: {len(profile.states)} states, {profile.n_agents} agents, "
          f"outcome dimension {profile.outcome_dim}")
    return 0


def _emit(text: str, output) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_audit(args) -> int:
    profile, err = _load(args.profile)
    if err:
        print(err, file=sys.stderr)
        return EXIT_INVALID
    try:
        result = run_audit(profile, args.seed, args.grid, args.samples, args.tolerance)
    except VerificationFailed as exc:
        print(f"error: internal verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION
    if args.text:
        _emit(result.text() + "\n", args.output)
    else:
        _emit(dumps(result.report), args.output)
        print(result.text(), file=sys.stderr)
    return result.exit_code


def cmd_dominance(args) -> int:
    profile, err = _load(args.profile)
    if err:
        print(err, file=sys.stderr)
        return EXIT_INVALID
    if not 0 <= args.agent <= profile.n_agents:
        print(f"error: unknown agent {args.agent}; choose 0..{profile.n_agents}", file=sys.stderr)
        return EXIT_INVALID
    try:
        acts = parse_acts(load_document(args.acts), profile) if args.acts else list(profile.acts)
    except FileNotFoundError:
        print(f"error: no such acts file: {args.acts}", file=sys.stderr)
        return EXIT_INVALID
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, ValidationError) as exc:
        print(f"error: malformed acts: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if len(acts) < 2:
        print("error: at least two acts are needed", file=sys.stderr)
        return EXIT_INVALID
    doc = dominance_report(profile, args.agent, acts, args.tolerance)
    if args.text:
        for p in doc["pairs"]:
            print(f"{p['f']} vs {p['g']}: {p['relation']}")
            print(f"  {p['f']} >= {p['g']}: margin {p['f_over_g']['margin']:.6g} "
                  f"at {p['f_over_g']['argmin_prior']}")
            print(f"  {p['g']} >= {p['f']}: margin {p['g_over_f']['margin']:.6g} "
                  f"at {p['g_over_f']['argmin_prior']}")
    else:
        sys.stdout.write(dumps(doc))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varbewley", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a profile document")
    p.add_argument("profile")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("audit", help="run the aggregation audit and print a JSON report")
    p.add_argument("profile")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=None, help="lattice resolution for the oracle")
    p.add_argument("--samples", type=int, default=10_000, help="sampled act pairs")
    p.add_argument("--tolerance", type=float, default=EPS_DEC, help="decision tolerance")
    p.add_argument("--output", "-o", help="write the report here instead of stdout")
    p.add_argument("--text", action="store_true", help="print the summary only")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("dominance", help="compare acts under one preference")
    p.add_argument("profile")
    p.add_argument("--agent", type=int, required=True, help="0 is the social preference")
    p.add_argument("--acts", help="acts document (defaults to the profile's own acts)")
    p.add_argument("--tolerance", type=float, default=EPS_DEC)
    p.add_argument("--text", action="store_true")
    p.set_defaults(func=cmd_dominance)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
