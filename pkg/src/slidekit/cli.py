"""``slidekit`` command line: solve, verify, generate, compare.

CSV goes to stdout, diagnostics to stderr. Exit codes: 0 ok / sat,
1 unsat or verification mismatch, 2 search limit, 3 input or resource error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench, instances, oracle
from .model import ResourceError, SlidekitError
from .search import MODES, VAL_ORDERS, VAR_ORDERS, Status

EXIT_OK, EXIT_UNSAT, EXIT_LIMIT, EXIT_INPUT = 0, 1, 2, 3


def _search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--var-order", choices=VAR_ORDERS, default="lexicographic")
    p.add_argument("--val-order", choices=VAL_ORDERS, default="ascending")
    p.add_argument("--mode", choices=MODES, default="first")
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--time-limit-ms", type=float, default=None)
    p.add_argument("--timing", action="store_true", help="fill the wall_ms column (breaks byte-identical reruns)")


def _options(args) -> bench.SolveOptions:
    return bench.SolveOptions(
        var_order=args.var_order,
        val_order=args.val_order,
        mode=args.mode,
        node_limit=args.node_limit,
        time_limit_ms=args.time_limit_ms,
        timing=args.timing,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slidekit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance file")
    p.add_argument("path")
    p.add_argument("--variant", choices=("slide", "decomposed"), default="slide")
    _search_flags(p)

    p = sub.add_parser("verify", help="check propagation and encodings against the brute-force oracle")
    p.add_argument("path")
    p.add_argument("--cap", type=int, default=oracle.DEFAULT_CAP, help="oracle search-space cap")

    p = sub.add_parser("generate", help="write generated instance files")
    p.add_argument("family", choices=instances.FAMILIES)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--l", dest="lower", type=int)
    p.add_argument("--u", dest="upper", type=int)
    p.add_argument("--density", type=float)

    p = sub.add_parser("compare", help="slide model vs decomposed baseline on every instance in a directory")
    p.add_argument("directory")
    p.add_argument("--jobs", type=int, default=1)
    _search_flags(p)
    return parser


def _solve(args) -> int:
    doc = instances.load_instance(args.path)
    row, res = bench.run(doc, Path(args.path).stem, args.variant, _options(args))
    sys.stdout.write(bench.format_rows([row]))
    if res.status is Status.LIMIT:
        return EXIT_LIMIT
    return EXIT_OK if res.status is Status.SAT else EXIT_UNSAT


def _verify(args) -> int:
    doc = instances.load_instance(args.path)
    checks = bench.verify(doc, args.cap)
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.ok for c in checks) else EXIT_UNSAT


def _generate(args) -> int:
    pairs = instances.generate(
        args.family,
        args.count,
        args.seed,
        n=args.n,
        d=args.d,
        k=args.k,
        q=args.q,
        lower=args.lower,
        upper=args.upper,
        density=args.density,
    )
    for p in bench.write_instances(pairs, args.out):
        print(p, file=sys.stderr)
    return EXIT_OK


def _compare(args) -> int:
    rows = bench.compare(args.directory, _options(args), jobs=args.jobs)
    sys.stdout.write(bench.format_rows(rows))
    return EXIT_OK


COMMANDS = {"solve": _solve, "verify": _verify, "generate": _generate, "compare": _compare}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SlidekitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
