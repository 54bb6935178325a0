"""Command-line front end.

Exit codes: 0 success or claim holds; 1 claim fails (witness emitted);
2 usage error; 3 numerical failure.  POLARORDER_TOL overrides the
default comparison tolerance.  All output is deterministic for fixed
flags; --out redirects it to a file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import decide, ivp, paths, words

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _default_tol() -> float:
    env = os.environ.get("POLARORDER_TOL")
    return float(env) if env else 1e-12


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_path(spec: str) -> paths.Path:
    verts = []
    for part in spec.replace(";", " ").split():
        u, v = part.split(",")
        verts.append((float(u), float(v)))
    return paths.Path(tuple(verts))


def _trajectory(args) -> ivp.Trajectory:
    return ivp.integrate(t_max=getattr(args, "t_max", 10.0),
                         tol=getattr(args, "ivp_tol", ivp.DEFAULT_TOL))


def cmd_eval(args):
    w = words.parse_word(args.word)
    if args.exact:
        x = Fraction(args.x)
        val = words.eval_word_exact(w, x)
        _emit(f"{val} ({float(val)!r})\n", args.out)
    else:
        val = words.eval_word(w, float(Fraction(args.x)))
        _emit(f"{val!r}\n", args.out)
    return EXIT_HOLDS


def cmd_compare(args):
    cfg = words.CompareConfig(samples=args.samples, tolerance=args.tol)
    verdict = words.compare_words(words.parse_word(args.left),
                                  words.parse_word(args.right), cfg)
    _emit(verdict.to_json() + "\n", args.out)
    return EXIT_HOLDS if verdict.holds else EXIT_FAILS


def cmd_decide(args):
    verdict = decide.decide_main(args.m, args.n)
    _emit(verdict.to_json() + "\n", args.out)
    if verdict.boundary:
        return EXIT_HOLDS
    return EXIT_HOLDS if verdict.holds else EXIT_FAILS


def cmd_m_of_m(args):
    _emit(f"{decide.capital_m(args.m)!r}\n", args.out)
    return EXIT_HOLDS


def cmd_ivp(args):
    traj = _trajectory(args)
    n = int(round(args.t_max / args.step))
    ts = [round(i * args.step, 10) for i in range(n + 1)]
    _emit(traj.table_csv(ts, decimals=args.decimals), args.out)
    return EXIT_HOLDS


def cmd_integrals(args):
    traj = _trajectory(args)
    m, M = traj.exponent_integrals(args.mu)
    verdict = decide.decide_main(m, M)
    _emit(json.dumps({"mu": args.mu, "m": m, "M": M,
                      "threshold": verdict.threshold_value},
                     sort_keys=True) + "\n", args.out)
    return EXIT_HOLDS


def cmd_transport(args):
    traj = _trajectory(args)
    x = paths.transport(_parse_path(args.path), args.x, traj)
    _emit(f"{x!r}\n", args.out)
    return EXIT_HOLDS


def cmd_loop(args):
    traj = _trajectory(args)
    xs = [(i + 0.5) / args.samples for i in range(args.samples)]
    report = paths.loop_verdict(_parse_path(args.path), traj, xs, tol=args.tol)
    _emit(report.to_json() + "\n", args.out)
    return EXIT_HOLDS if report.holds else EXIT_FAILS


def cmd_grid(args):
    traj = _trajectory(args)
    grid = paths.emit_grid(args.width, args.height, args.delta, traj,
                           t_origin=args.t_origin)
    _emit(grid.to_json() + "\n", args.out)
    return EXIT_HOLDS


def cmd_verify_grid(args):
    if args.grid:
        with open(args.grid) as fh:
            grid = paths.GridSpec.from_json(fh.read())
    else:
        grid = paths.grid_from_diagonals()
    report = paths.verify_grid(grid, samples=args.samples, tol=args.tol)
    _emit(report.to_csv(), args.out)
    if not report.holds:
        sq = report.worst
        sys.stderr.write(f"square ({sq.i},{sq.j}) fails: min gap {sq.min_gap!r} "
                         f"at x={sq.witness_x!r}\n")
        return EXIT_FAILS
    return EXIT_HOLDS


def cmd_dyck(args):
    report = decide.dyck_check(args.bits)
    _emit(report.to_json() + "\n", args.out)
    return EXIT_HOLDS if report.satisfied else EXIT_FAILS


def cmd_enumerate(args):
    pairs = decide.enumerate_dyck(args.max_len)
    lines = [f"{words.PolarWord.from_bits(a)} >= {words.PolarWord.from_bits(b)}"
             for a, b in pairs]
    _emit("\n".join(lines) + ("\n" if lines else ""), args.out)
    return EXIT_HOLDS


def cmd_reproduce(args):
    if args.table != "ivp":
        raise ValueError(f"unknown table {args.table!r}")
    traj = ivp.integrate(t_max=10.0, tol=ivp.DEFAULT_TOL)
    _emit(traj.table_csv(), args.out)
    return EXIT_HOLDS


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="polarorder",
        description="Polarization words over erasure channels: evaluation, "
                    "ordering, the alignment flow, path transport, grids.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        p.add_argument("--out", default=None, help="write output to this path")
        return p

    p = add("eval", cmd_eval, help="evaluate a word at a capacity")
    p.add_argument("--word", required=True)
    p.add_argument("--x", required=True, help="capacity in [0,1]; fractions allowed")
    p.add_argument("--exact", action="store_true",
                   help="exact rational evaluation (integer exponents only)")

    p = add("compare", cmd_compare, help="sampled order comparison of two words")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--samples", type=int, default=4097)
    p.add_argument("--tol", type=float, default=_default_tol())

    p = add("decide", cmd_decide, help="half-point threshold test for 0^m 1^n vs 1^m 0^n")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--n", type=float, required=True)

    p = add("m-of-m", cmd_m_of_m, help="threshold exponent M(m)")
    p.add_argument("--m", type=float, required=True)

    p = add("ivp", cmd_ivp, help="integrate the alignment flow, emit CSV")
    p.add_argument("--t-max", dest="t_max", type=float, default=10.0)
    p.add_argument("--tol", dest="ivp_tol", type=float, default=ivp.DEFAULT_TOL)
    p.add_argument("--step", type=float, default=0.1, help="output spacing")
    p.add_argument("--decimals", type=int, default=5,
                   help="fixed decimals; negative for full precision")

    p = add("integrals", cmd_integrals, help="exponent masses m(mu), M(mu)")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--t-max", dest="t_max", type=float, default=10.0)
    p.add_argument("--tol", dest="ivp_tol", type=float, default=ivp.DEFAULT_TOL)

    p = add("transport", cmd_transport, help="carry a capacity along a path")
    p.add_argument("--path", required=True,
                   help="semicolon-separated u,v vertices, e.g. '0,0;2,0;2,2'")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--t-max", dest="t_max", type=float, default=10.0)
    p.add_argument("--tol", dest="ivp_tol", type=float, default=ivp.DEFAULT_TOL)

    p = add("loop", cmd_loop, help="loop inequality verdict")
    p.add_argument("--path", required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--t-max", dest="t_max", type=float, default=10.0)
    p.add_argument("--ivp-tol", dest="ivp_tol", type=float, default=ivp.DEFAULT_TOL)

    p = add("grid", cmd_grid, help="emit a flow-aligned grid as JSON")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--t-origin", dest="t_origin", type=float, default=0.0)
    p.add_argument("--t-max", dest="t_max", type=float, default=10.0)
    p.add_argument("--tol", dest="ivp_tol", type=float, default=ivp.DEFAULT_TOL)

    p = add("verify-grid", cmd_verify_grid, help="check a grid's local inequalities")
    p.add_argument("--grid", default=None, help="GridSpec JSON file; "
                   "defaults to the bundled reference grid")
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--tol", type=float, default=1e-9)

    p = add("dyck", cmd_dyck, help="exact prefix test of a bit string")
    p.add_argument("--bits", required=True)

    p = add("enumerate", cmd_enumerate, help="all prefix-test pairs up to a length")
    p.add_argument("--max-len", dest="max_len", type=int, required=True)

    p = add("reproduce", cmd_reproduce, help="reproduce reference tables")
    p.add_argument("--table", required=True, choices=["ivp"])
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (ArithmeticError, ivp.IntegrationError, ivp.BoundsViolationError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
