"""Command-line interface: ``spa-kit {spiral,approximate,norm,sweep,check}``.

Exit codes: 0 success, 1 oracle failure, 2 argument error, 3 invariant or
schema error, 4 assumption violation, 5 numerical budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .errors import (AssumptionViolation, DimensionMismatch, InvalidCount, InvariantError,
                     RepeatedPole, SchemaError, TruncationOverflow)
from .norms import h2_norm, hinf_norm, hinf_norm_toeplitz
from .oracles import lemma_suite
from .poleselect import (PoleSelection, augment, check_assumptions, spiral_geometry_check,
                         spiral_poles, spiral_sequence)
from .spa import approximate, convergence_sweep, error_certificate, write_sweep_csv
from .tfcore import deserialize, parse_complex, parse_json

EXIT_OK = 0
EXIT_ORACLE = 1
EXIT_USAGE = 2
EXIT_INVARIANT = 3
EXIT_ASSUMPTION = 4
EXIT_BUDGET = 5


class UsageError(Exception):
    pass


# io -----------------------------------------------------------------------


def _read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _read_system(path):
    return deserialize(_read_text(path))


def _read_pole_list(path):
    """Poles from a selection document or a bare ``[[re, im], ...]`` list."""
    doc = parse_json(_read_text(path))
    raw = doc.get("poles") if isinstance(doc, dict) else doc
    if not isinstance(raw, list):
        raise SchemaError(f"{path}: expected a pole list or a document with 'poles'")
    return [parse_complex(v, f"poles[{i}]") for i, v in enumerate(raw)]


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _json(doc):
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _info(args, msg):
    if not args.quiet:
        print(msg, file=sys.stderr)


def _threads(args):
    env = os.environ.get("SPA_KIT_THREADS")
    value = env if env else args.threads
    if value is None:
        return os.cpu_count() or 1
    try:
        value = int(value)
    except ValueError:
        raise UsageError(f"invalid thread count {value!r}") from None
    if value < 1:
        raise UsageError("thread count must be >= 1")
    return value


# commands -----------------------------------------------------------------


def cmd_spiral(args):
    if args.m is not None:
        if args.m < 2 or args.m % 2:
            raise UsageError(f"m must be even and >= 2, got {args.m}")
        P = spiral_poles(args.m)
    else:
        if args.n < 2:
            raise UsageError(f"n must be >= 2, got {args.n}")
        P = spiral_sequence(args.n)
    if args.augment:
        P = augment(P, _read_pole_list(args.augment))
    _emit(_json(P.to_dict()), args.out)
    _info(args, f"{len(P)} poles, r = {P.radius:.6g}")
    return EXIT_OK


def cmd_approximate(args):
    S = _read_system(args.system)
    P = PoleSelection.from_dict(_read_text(args.poles))
    sigma = _read_pole_list(args.plant) if args.plant else None
    cert = None
    if args.certificate or sigma is not None:
        cert = error_certificate(S, P, tight_r=args.tight_r, sigma=sigma)
    A = approximate(S, P)
    doc = A.to_dict(cert if args.certificate else None)
    if sigma is not None:
        doc["plant"] = {"A5": cert.audit.a5, "delta": cert.audit.delta}
    _emit(_json(doc), args.out)
    if cert is not None:
        _info(args, f"D = {cert.D:.6g}, bound_hinf = {cert.bound_hinf:.6g}, "
                    f"bound_h2 = {cert.bound_h2:.6g}")
    return EXIT_OK


def cmd_norm(args):
    S = _read_system(args.system)
    if args.which == "h2":
        value = h2_norm(S, args.tol)
    elif args.which == "hinf":
        value = hinf_norm(S, args.tol)
    else:
        if args.T is None:
            raise UsageError("--T is required for hinf-toeplitz")
        if args.T < 1:
            raise UsageError("--T must be >= 1")
        value = hinf_norm_toeplitz(S, args.T)
    print(format(value, "#.12g"))
    return EXIT_OK


def cmd_sweep(args):
    if not 2 <= args.n_min <= args.n_max <= 1000:
        raise UsageError("need 2 <= n-min <= n-max <= 1000")
    S = _read_system(args.system)
    prior = _read_pole_list(args.augment) if args.augment else ()
    rows = convergence_sweep(S, range(args.n_min, args.n_max + 1), baseline=args.baseline,
                             prior=prior, tol=args.tol, threads=_threads(args))
    if args.out is None:
        write_sweep_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_sweep_csv(rows, fh)
    feasible = sum(r.feasible for r in rows)
    _info(args, f"{feasible} of {len(rows)} rows feasible")
    if not feasible:
        print(f"A4: no feasible row; first failure: {rows[0].reason}", file=sys.stderr)
        return EXIT_ASSUMPTION
    return EXIT_OK


def _report(records):
    ok = True
    for rec in records:
        status = "pass" if rec["passed"] else "FAIL"
        print(f"{rec['check']}: {status} count={rec['count']} "
              f"worst_margin={rec['worst_margin']!r}")
        if not rec["passed"]:
            ok = False
            print(_json({"check": rec["check"], "counterexample": rec["counterexample"]}),
                  end="", file=sys.stderr)
    return EXIT_OK if ok else EXIT_ORACLE


def cmd_check(args):
    if args.suite == "lemmas":
        if args.count < 1:
            raise UsageError("--count must be >= 1")
        return _report(lemma_suite(args.seed, args.count))
    if args.suite == "spiral-geometry":
        if args.m < 2 or args.m % 2:
            raise UsageError(f"m must be even and >= 2, got {args.m}")
        r = spiral_geometry_check(args.m)
        records = [
            {"check": "spiral_gaps", "count": args.m // 2, "passed": r.gaps_passed,
             "worst_margin": r.gap_margin,
             "counterexample": {"m": r.m, "max_gap": r.max_successive_gap,
                                "conjugate_gap": r.conjugate_gap,
                                "limit": r.winding_gap}},
            {"check": "spiral_grid", "count": 1, "passed": r.grid_passed,
             "worst_margin": r.grid_margin,
             "counterexample": {"m": r.m, "z": [r.worst_grid_point.real,
                                                r.worst_grid_point.imag],
                                "distance": r.worst_grid_distance,
                                "limit": 2.0 * r.winding_gap}},
        ]
        return _report(records)
    if args.system is None or args.poles is None:
        raise UsageError("the assumptions suite needs --system and --poles")
    S = _read_system(args.system)
    poles = _read_pole_list(args.poles)
    sigma = _read_pole_list(args.plant) if args.plant else None
    audit = check_assumptions(poles, S, sigma)
    for name, ok in zip(("A1", "A2", "A3", "A4", "A5"),
                        (audit.a1, audit.a2, audit.a3, audit.a4, audit.a5)):
        if ok is None:
            continue
        print(f"{name}: {'pass' if ok else 'FAIL'} ({audit.details[name]})")
    if audit.passed:
        return EXIT_OK
    print(_json({"check": "assumptions", "failures": audit.failures(),
                 "counterexample": {"system": json.loads(_read_text(args.system)),
                                    "poles": [[p.real, p.imag] for p in poles],
                                    "audit": audit.to_dict()}}),
          end="", file=sys.stderr)
    return EXIT_ORACLE


# parser -------------------------------------------------------------------


def _add_globals(parser, top):
    # subcommands repeat the global flags without clobbering top-level values
    def dflt(v):
        return v if top else argparse.SUPPRESS

    parser.add_argument("--tol", type=float, default=dflt(1e-8),
                        help="norm tolerance (default 1e-8)")
    parser.add_argument("--threads", type=int, default=dflt(None),
                        help="worker threads (default: all cores)")
    parser.add_argument("--quiet", action="store_true", default=dflt(False),
                        help="suppress progress messages")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spa-kit",
        description="Simple pole approximation of stable discrete-time transfer functions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spiral", help="Archimedes spiral pole selection")
    _add_globals(p, top=False)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--m", type=int, help="number of poles (even)")
    g.add_argument("--n", type=int, help="sequence index; gives 2n-2 poles")
    p.add_argument("--augment", metavar="FILE", help="prior poles to merge in")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_spiral)

    p = sub.add_parser("approximate", help="build the simple pole approximant")
    _add_globals(p, top=False)
    p.add_argument("--system", required=True, metavar="FILE")
    p.add_argument("--poles", required=True, metavar="FILE")
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--certificate", action="store_true", help="embed the error certificate")
    p.add_argument("--tight-r", action="store_true",
                   help="take r over the poles actually used")
    p.add_argument("--plant", metavar="FILE", help="plant poles for the A5 audit")
    p.set_defaults(func=cmd_approximate)

    p = sub.add_parser("norm", help="H2 or H-infinity norm of a system")
    _add_globals(p, top=False)
    p.add_argument("--system", required=True, metavar="FILE")
    p.add_argument("--which", choices=("h2", "hinf", "hinf-toeplitz"), default="h2")
    p.add_argument("--T", type=int, help="truncation length for hinf-toeplitz")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("sweep", help="convergence sweep over the spiral sequence (CSV)")
    _add_globals(p, top=False)
    p.add_argument("--system", required=True, metavar="FILE")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--baseline", choices=("none", "fir"), default="none")
    p.add_argument("--augment", metavar="FILE", help="prior poles added at every n")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="run oracle checks")
    _add_globals(p, top=False)
    p.add_argument("--suite", required=True, choices=("lemmas", "spiral-geometry", "assumptions"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--system", metavar="FILE")
    p.add_argument("--poles", metavar="FILE")
    p.add_argument("--plant", metavar="FILE")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if not args.tol > 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, InvalidCount) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssumptionViolation as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ASSUMPTION
    except TruncationOverflow as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (SchemaError, InvariantError, DimensionMismatch, RepeatedPole) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
