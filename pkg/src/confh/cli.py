"""``confh`` command line.

Exit codes: 0 pass, 1 verification failure or no fit, 2 usage/input error,
3 cache corruption, 4 insufficient data.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys

from .cache import CacheCorrupt, ResultCache
from .ce import betti_table, nu
from .lie import build_lie_algebra, canonical_transit
from .manifold import (
    BUILTINS, ManifestError, ManifoldDatum, builtin, disjoint_union, ensure_valid, library, load_manifest,
    validate,
)
from .operators import OperatorError, extremal_stabilization, weyl_check_all
from .stability import (
    INSUFFICIENT, FitResult, HypothesisError, fit_quasipolynomial, freeness_probe, parse_sequence_csv,
    verify_extremal_stability, verify_homological_stability, verify_vanishing_stability,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CACHE, EXIT_INSUFFICIENT = 0, 1, 2, 3, 4
DEFAULT_CACHE = ".confh-cache"


class UsageError(Exception):
    pass


def _select_manifold(args) -> ManifoldDatum:
    if args.manifest:
        try:
            with open(args.manifest, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read manifest: {exc}") from None
        try:
            return ensure_valid(load_manifest(text))
        except ManifestError as exc:
            raise UsageError(f"invalid manifest: {exc}") from None
    if not args.manifold:
        raise UsageError("one of --manifold or --manifest is required")
    parts = args.manifold.split("+")
    try:
        ms = [builtin(p) for p in parts]
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc).strip("'\"")) from None
    m = ms[0]
    for other in ms[1:]:
        try:
            m = disjoint_union(m, other)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return m


def _cache(args) -> ResultCache | None:
    if args.no_cache:
        return None
    return ResultCache(args.cache or os.environ.get("CONFH_CACHE") or DEFAULT_CACHE)


def _table(args, m: ManifoldDatum):
    if args.n_max < 0:
        raise UsageError("--n-max must be non-negative")
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    return betti_table(m, args.n_max, threads=args.threads, cache=_cache(args),
                       modular=args.modular, seed=args.seed)


# ---------------------------------------------------------------- subcommands


def cmd_betti(args, out) -> int:
    m = _select_manifold(args)
    if args.show_algebra:
        out.write(build_lie_algebra(m).dump())
    table = _table(args, m)
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["n", "i", "dim"])
        for n in range(args.n_max + 1):
            top = nu(n, m.d) if n else 0
            row = table.row(n)
            top = max([top, *row])
            for i in range(top + 1):
                w.writerow([n, i, row.get(i, 0)])
        return EXIT_OK
    out.write(f"# dim H_i(B_n(M);Q), M = {m.name}, d = {m.d}; row n lists i = 0, 1, ...\n")
    for n in range(args.n_max + 1):
        row = table.row(n)
        top = max(row) if row else 0
        out.write(f"{n}: " + " ".join(str(row.get(i, 0)) for i in range(top + 1)) + "\n")
    return EXIT_OK


def _report_exit(status: str) -> int:
    return {"pass": EXIT_OK, "fail": EXIT_FAIL, "insufficient data": EXIT_INSUFFICIENT}[status]


def cmd_verify(args, out) -> int:
    m = _select_manifold(args)
    theorem = args.theorem
    try:
        if theorem == "weyl":
            rep = weyl_check_all(build_lie_algebra(m), canonical_transit(build_lie_algebra(m)),
                                 range(args.n_max + 1))
            out.write(f"theorem: weyl relation\nmanifold: {m.name}\ntransit: canonical\n"
                      f"weights: 0..{args.n_max}\n{rep}\n")
            out.write("commutator: identically zero\n" if rep.passed else "")
            out.write(f"status: {'pass' if rep.passed else 'fail'}\n")
            return EXIT_OK if rep.passed else EXIT_FAIL
        if theorem == "freeness":
            rep = freeness_probe(m, args.n_max)
            out.write(rep.format() + "\n")
            return EXIT_OK if rep.passed else EXIT_FAIL
        if theorem == "vanishing":
            if args.r is None:
                raise UsageError("--r is required")
            from .stability import vanishing_hypotheses
            vanishing_hypotheses(m, args.r)
            rep = verify_vanishing_stability(m, _table(args, m), args.r, args.degree or 0)
        elif theorem == "extremal":
            rep = verify_extremal_stability(m, _table(args, m), args.codim or 0)
        else:
            if args.degree is None:
                raise UsageError("--degree is required")
            rep = verify_homological_stability(m, _table(args, m), args.degree)
    except HypothesisError as exc:
        out.write(f"hypothesis violated: {exc}\n")
        return EXIT_USAGE
    out.write(rep.csv() if args.format == "csv" else rep.format() + "\n")
    return _report_exit(rep.status)


def cmd_stabmap(args, out) -> int:
    m = _select_manifold(args)
    try:
        h = extremal_stabilization(m, args.class_id, args.n, args.degree)
    except OperatorError as exc:
        raise UsageError(str(exc)) from None
    out.write(f"class: {args.class_id}\nsource dim: {h.source.dim}\ntarget dim: {h.target.dim}\n"
              f"rank: {h.rank}\n")
    out.write(h.format() + "\n")
    return EXIT_OK


def cmd_fit(args, out) -> int:
    try:
        if args.input in (None, "-"):
            text = sys.stdin.read()
        else:
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from None
    try:
        seq = parse_sequence_csv(text, args.degree)
        res = fit_quasipolynomial(seq, args.period, args.max_degree)
    except ValueError as exc:
        raise UsageError(f"malformed CSV: {exc}") from None
    if isinstance(res, FitResult):
        out.write(f"fit: {res.qp.format()}\nperiod: {res.qp.period}\ndegree: {res.degree}\n"
                  f"onset: {res.onset}\nevidence: {' '.join(map(str, res.evidence))}\n")
        return EXIT_OK
    out.write(res.status + (f" ({res.detail})" if res.detail else "") + "\n")
    return EXIT_INSUFFICIENT if res.status == INSUFFICIENT else EXIT_FAIL


def cmd_list(args, out) -> int:
    for key, m in zip(BUILTINS, library()):
        fn, pname, default = BUILTINS[key]
        sel = key if pname is None else f"{key}:{pname.upper()} (default {default})"
        out.write(f"{sel}\n  {m.summary()}\n")
    return EXIT_OK


def cmd_validate(args, out) -> int:
    try:
        with open(args.path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read manifest: {exc}") from None
    try:
        m = load_manifest(text)
    except ManifestError as exc:
        where = f" [{exc.field}]" if getattr(exc, "field", "") else ""
        out.write(f"validation: fail\n{type(exc).__name__}{where}: {exc}\n")
        return EXIT_FAIL
    report = validate(m)
    out.write(f"manifold: {m.name}\n{report}\n")
    return EXIT_OK if report.passed else EXIT_FAIL


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifold", help="builtin NAME[:PARAM]; join with + for a disjoint union")
    common.add_argument("--manifest", help="path to a JSON manifest")
    common.add_argument("--n-max", type=int, default=12)
    common.add_argument("--format", choices=("table", "csv"), default="table")
    common.add_argument("--cache", help=f"cache directory (default $CONFH_CACHE or {DEFAULT_CACHE})")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--modular", action="store_true", help="modular ranks with exact spot-checks")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="confh", description="Rational homology of unordered configuration spaces.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("betti", parents=[common], help="Betti table of B_n(M)")
    b.add_argument("--show-algebra", action="store_true", help="print the Lie algebra first")
    b.set_defaults(func=cmd_betti)

    v = sub.add_parser("verify", parents=[common], help="check a stability statement on computed data")
    v.add_argument("theorem", choices=("stability", "extremal", "vanishing", "freeness", "weyl"))
    v.add_argument("--codim", type=int)
    v.add_argument("--degree", type=int)
    v.add_argument("--r", type=int)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("stabmap", parents=[common], help="matrix of an extremal stabilization map")
    s.add_argument("--class", dest="class_id", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--degree", type=int, required=True)
    s.set_defaults(func=cmd_stabmap)

    f = sub.add_parser("fit", help="fit a quasi-polynomial to a CSV of (n, value)")
    f.add_argument("--input", help="CSV file (default: standard input)")
    f.add_argument("--period", type=int, default=1)
    f.add_argument("--max-degree", type=int, default=3)
    f.add_argument("--degree", type=int, help="select column i of an n,i,dim Betti CSV")
    f.set_defaults(func=cmd_fit)

    lp = sub.add_parser("list", help="list builtin manifolds")
    lp.set_defaults(func=cmd_list)

    vp = sub.add_parser("validate", help="validate a manifest")
    vp.add_argument("path")
    vp.set_defaults(func=cmd_validate)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"confh: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CacheCorrupt as exc:
        print(f"confh: cache corrupt: {exc}", file=sys.stderr)
        return EXIT_CACHE


def run(argv) -> tuple[int, str]:
    """Invoke in-process and capture standard output."""
    buf = io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["main", "run", "build_parser"]
