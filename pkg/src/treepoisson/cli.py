"""Command-line driver.

Exit codes: 0 success, 1 verification failed, 2 usage error, 3 domain error
(bad files, structural violations), 4 numeric-regime error (forbidden or
out-of-range parameters).

Complex numbers are written ``re,im``; pass negative values with ``=``,
e.g. ``--z=-1.5,0``.
"""

from __future__ import annotations

import argparse
import io
import sys

import numpy as np

from . import formats
from .boundary import (
    boundary_measure,
    check_eigen_characterization,
    limit_recover_clopen,
    limit_recover_vertex,
    roundtrip_measure,
)
from .errors import DomainError, RegimeError
from .hoelder import function_growth_envelope, measure_growth_envelope
from .measure import ClopenSet, dirac, random_measure, rotation_invariant
from .poisson import poisson_transform, relative_eigen_residual
from .tree import Tree, build_from_parents, build_regular

EXIT_FAIL, EXIT_USAGE, EXIT_DOMAIN, EXIT_REGIME = 1, 2, 3, 4


def parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 1:
        parts.append("0")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}") from None


def parse_seed(text: str) -> int:
    seed = int(text, 0)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def _emit(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        formats.write_atomic(path, text)


def _load_tree(path: str) -> Tree:
    return formats.loads_tree(formats.read_text(path))


def _csv(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(r) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------- #
# commands
# ---------------------------------------------------------------------- #


def cmd_gen_tree(args) -> int:
    if args.regular:
        q, D = args.regular
        tree = build_regular(q, D)
    else:
        text = formats.read_text(args.parents)
        pairs = [tuple(int(x) for x in line.split()) for line in text.splitlines() if line.strip()]
        if any(len(p) != 2 for p in pairs):
            raise DomainError("parents file needs '<child> <parent>' per line")
        tree = build_from_parents(pairs)
    _emit(args.output, formats.dumps_tree(tree))
    return 0


def cmd_gen_measure(args) -> int:
    tree = _load_tree(args.tree)
    if args.dirac is not None:
        mu = dirac(tree, args.dirac)
    elif args.rotation_invariant:
        mu = rotation_invariant(tree, args.center)
    else:
        mu = random_measure(tree, args.seed)
    _emit(args.output, formats.dumps_measure(mu))
    return 0


def cmd_transform(args) -> int:
    tree = _load_tree(args.tree)
    mu = formats.loads_measure(formats.read_text(args.measure), tree)
    _emit(args.output, formats.dumps_vfun(poisson_transform(args.z, mu)))
    return 0


def cmd_invert(args) -> int:
    tree = _load_tree(args.tree)
    f = formats.loads_vfun(formats.read_text(args.vfun), tree)
    report = check_eigen_characterization(args.z, f)
    _emit(args.output, formats.dumps_edges(report.coefficients))
    print(f"compat_violation {formats.fmt(report.compat_violation)}")
    print(f"root_condition_gap {formats.fmt(report.root_condition_gap)}")
    print(f"eigenfunction {'yes' if report.ok(args.tol) else 'no'}")
    return 0


def cmd_verify(args) -> int:
    tree = _load_tree(args.tree)
    mu = formats.loads_measure(formats.read_text(args.measure), tree)
    f = poisson_transform(args.z, mu)
    scale = max(1.0, float(np.abs(np.asarray(mu.cylinder, dtype=complex)).max()))
    roundtrip = roundtrip_measure(args.z, mu) / scale
    residual = float(np.nanmax(relative_eigen_residual(f, args.z), initial=0.0))
    print(f"roundtrip_max_rel {formats.fmt(roundtrip)}")
    print(f"eigen_residual_max_rel {formats.fmt(residual)}")
    ok = roundtrip <= args.tol and residual <= args.tol
    print("PASS" if ok else "FAIL")
    return 0 if ok else EXIT_FAIL


def cmd_limit_table(args) -> int:
    tree = _load_tree(args.tree)
    if args.measure:
        mu = formats.loads_measure(formats.read_text(args.measure), tree)
        f = poisson_transform(args.z, mu)
    else:
        f = formats.loads_vfun(formats.read_text(args.vfun), tree)
        mu = boundary_measure(args.z, f)
    if args.vertex is not None:
        table = limit_recover_vertex(args.z, f, args.vertex, args.kmax)
        truth = complex(mu.cylinder[args.vertex])
    else:
        U = ClopenSet(tree, [int(v) for v in args.clopen.split(",") if v.strip()])
        table = limit_recover_clopen(args.z, f, U, args.kmax)
        truth = complex(sum(complex(mu.cylinder[v]) for v in U.antichain))
    err = table.errors(truth)
    ratio = table.error_ratios(truth)
    rows = []
    for k, est, e, r in zip(table.steps, table.estimates, err, ratio):
        rows.append(
            [str(int(k)), formats.fmt(est.real), formats.fmt(est.imag), formats.fmt(e),
             "" if np.isnan(r) else formats.fmt(r)]
        )
    _emit(args.output, _csv(["k", "estimate_re", "estimate_im", "abs_error", "error_ratio"], rows))
    return 0


def cmd_envelope(args) -> int:
    tree = _load_tree(args.tree)
    if args.measure:
        mu = formats.loads_measure(formats.read_text(args.measure), tree)
        env = measure_growth_envelope(mu)
        header = ["n", "a_n", "K_hat"]
    else:
        f = formats.loads_vfun(formats.read_text(args.vfun), tree)
        env = function_growth_envelope(f)
        header = ["n", "b_n", "G_hat"]
    running = env.running_rates()
    rows = [[str(n), formats.fmt(a), formats.fmt(r)] for n, (a, r) in enumerate(zip(env.level_maxima, running))]
    _emit(args.output, _csv(header, rows))
    print(f"scale {formats.fmt(env.scale)}")
    print(f"rate {formats.fmt(env.rate)}")
    if args.theta is not None and args.measure:
        admissible = tree.q_max == 0 or args.theta * env.rate * tree.q_max < 1
        print(f"theta_admissible {'yes' if admissible else 'no'}")
    return 0


# ---------------------------------------------------------------------- #
# parser
# ---------------------------------------------------------------------- #


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treepoisson", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-tree", help="write a tree file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--regular", nargs=2, type=int, metavar=("Q", "DEPTH"))
    src.add_argument("--parents", metavar="FILE", help="lines '<child> <parent>'")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen_tree)

    p = sub.add_parser("gen-measure", help="write a measure file")
    p.add_argument("--tree", required=True)
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--dirac", type=int, metavar="LEAF")
    kind.add_argument("--rotation-invariant", action="store_true")
    kind.add_argument("--random", action="store_true")
    p.add_argument("--center", type=int, default=0, help="center for --rotation-invariant")
    p.add_argument("--seed", type=parse_seed, help="64-bit seed for --random")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen_measure)

    def common(p):
        p.add_argument("--z", type=parse_complex, required=True, metavar="RE,IM")
        p.add_argument("--tree", required=True)

    p = sub.add_parser("transform", help="Poisson transform of a measure")
    common(p)
    p.add_argument("--measure", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("invert", help="boundary-value coefficients of a vertex function")
    common(p)
    p.add_argument("--vfun", required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("verify", help="round-trip and eigen-equation check")
    common(p)
    p.add_argument("--measure", required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("limit-table", help="limit recovery estimates as CSV")
    common(p)
    data = p.add_mutually_exclusive_group(required=True)
    data.add_argument("--measure")
    data.add_argument("--vfun")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--vertex", type=int)
    target.add_argument("--clopen", metavar="V1,V2,...")
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_limit_table)

    p = sub.add_parser("envelope", help="growth envelope table as CSV")
    p.add_argument("--tree", required=True)
    data = p.add_mutually_exclusive_group(required=True)
    data.add_argument("--measure")
    data.add_argument("--vfun")
    p.add_argument("--theta", type=float)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_envelope)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gen-measure" and args.random and args.seed is None:
        parser.error("--random requires --seed")
    try:
        return args.func(args)
    except RegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (DomainError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
