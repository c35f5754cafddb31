"""Command line interface: certify, sweep, periods, height, tate."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from mpmath import mp

from .certify import DEFAULT_PRECISION, DEFAULT_PRIME_BUDGET, SweepJob, certify, sweep
from .curves import CurveParams, make_curve, minimal_model
from .heights import canonical_height
from .periods import periods
from .points import Point, on_curve
from .tate import global_reduction


def _curve(args):
    return minimal_model(CurveParams(args.n, args.t))


def cmd_certify(args) -> int:
    cert = certify(args.n, args.t, args.precision, args.prime_budget)
    if args.json:
        print(cert.to_json())
    else:
        print(f"E_{cert.n}({cert.t}) delta={cert.delta} squarefree={cert.delta_squarefree} model={cert.model}")
        print(f"verdict: {cert.verdict}  branch: {cert.branch}")
        print(json.dumps(cert.evidence, indent=2, sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    job = SweepJob(args.n_min, args.n_max, args.t_min, args.t_max, Path(args.out),
                   args.precision, args.prime_budget, args.resume)
    tally: dict[str, int] = {}
    for cert in sweep(job):
        tally[cert.verdict] = tally.get(cert.verdict, 0) + 1
        if cert.verdict == "undecided":
            print(f"undecided: n={cert.n} t={cert.t}", file=sys.stderr)
    print(json.dumps(tally, sort_keys=True))
    return 0


def cmd_periods(args) -> int:
    curve, _ = _curve(args)
    pd = periods(curve, args.precision)
    digits = max(15, args.precision // 4)
    print(f"model: {curve.provenance} {curve.ainvs}")
    print(f"omega1   = {mp.nstr(pd.omega1, digits)}")
    print(f"omega2/i = {mp.nstr(pd.omega2_im, digits)}")
    print(f"q        = {mp.nstr(pd.q, digits)}")
    print(f"mu       = {mp.nstr(pd.mu, digits)}")
    print(f"error    <= {pd.error_bound:.3e}")
    return 0


def _parse_point(text: str) -> Point:
    x, y = text.split(",")
    return Point(Fraction(x.strip()), Fraction(y.strip()))


def cmd_height(args) -> int:
    curve, to_model = _curve(args)
    P = _parse_point(args.point)
    if not on_curve(make_curve(CurveParams(args.n, args.t)), P):
        print("point is not on the curve", file=sys.stderr)
        return 2
    hb = canonical_height(curve, to_model(P), args.precision)
    print(f"naive height     {hb.naive_h:.12f}")
    for p, v in sorted(hb.local_finite.items()):
        print(f"lambda_{p:<10d} {v:.12f}")
    if hb.local_arch is not None:
        print(f"lambda_inf       {hb.local_arch:.12f}")
    print(f"canonical height {hb.canonical:.12f}  (+- {hb.error_bound:.1e}, {hb.method})")
    return 0


def cmd_tate(args) -> int:
    curve, _ = _curve(args)
    gr = global_reduction(curve)
    print(f"model: {curve.provenance} {curve.ainvs}")
    for r in gr.local:
        print(f"p={r.p:<8d} {r.kodaira:<6s} c_p={r.tamagawa:<3d} v(Dmin)={r.v_min_delta:<4d} {r.reduction_kind}")
    print(f"C_E={gr.C_E}  log|Dmin|={gr.log_min_delta:.6f}  B_E={gr.B_E:.6e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecnondiv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def curve_args(p):
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--t", type=int, required=True)

    p = sub.add_parser("certify", help="certify one curve")
    curve_args(p)
    p.add_argument("--precision", type=int, default=DEFAULT_PRECISION)
    p.add_argument("--prime-budget", type=int, default=DEFAULT_PRIME_BUDGET)
    p.add_argument("--json", action="store_true", help="print the certificate as one JSON line")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("sweep", help="certify a box of (n, t) into a JSON-lines file")
    for name in ("--n-min", "--n-max", "--t-min", "--t-max"):
        p.add_argument(name, type=int, required=True)
    p.add_argument("--out", default="certs.jsonl")
    p.add_argument("--resume", action="store_true")
    p.add_argument("--precision", type=int, default=DEFAULT_PRECISION)
    p.add_argument("--prime-budget", type=int, default=DEFAULT_PRIME_BUDGET)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("periods", help="real and imaginary periods")
    curve_args(p)
    p.add_argument("--precision", type=int, default=DEFAULT_PRECISION)
    p.set_defaults(func=cmd_periods)

    p = sub.add_parser("height", help="canonical height of a point given on E_n(t)")
    curve_args(p)
    p.add_argument("--point", required=True, help="x,y with rational coordinates, e.g. 0,1")
    p.add_argument("--precision", type=int, default=DEFAULT_PRECISION)
    p.set_defaults(func=cmd_height)

    p = sub.add_parser("tate", help="reduction data at the bad primes")
    curve_args(p)
    p.set_defaults(func=cmd_tate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
