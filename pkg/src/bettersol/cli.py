"""Command-line entry point: ``bettersol <subcommand> [flags]``.

Exit codes: 0 success, 1 bad flags, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import tables
from .dist import LocationModel
from .harness import McConfig, bsp_audit, default_threads
from .location import UnivariateSample, better_of, estimate, median, trimmed_mean
from .regress import RegressionData, better_screen, lar_screen, lts_fit, sis_screen
from .dist import RngStream

SUBCOMMANDS = ("table1", "table2", "table3", "table4", "audit", "lts", "screen", "locate")


class FlagError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise FlagError(message)


def _positive_scale(text):
    v = float(text)
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError("scale must lie in (0, 1]")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=_seed, default=7, help="master seed (default 7)")
    common.add_argument("--reps", type=_positive_int, help="replications")
    common.add_argument("--scale", type=_positive_scale, default=1.0,
                        help="multiply replications by this factor in (0, 1]")
    common.add_argument("--out", type=Path, help="directory for <name>.csv / <name>.json")
    common.add_argument("--format", choices=("csv", "json", "text"), default="text",
                        help="what to print on standard output (files always get csv and json)")
    common.add_argument("--threads", type=_positive_int, default=None,
                        help="worker threads (default: available cores)")

    parser = _Parser(prog="bettersol", description=(
        "Better-solution experiments: simulation tables, paired-budget audit "
        "and one-shot estimators."))
    sub = parser.add_subparsers(dest="command", metavar="subcommand", parser_class=_Parser)
    sub.required = True
    sub.add_parser("table1", parents=[common], help="location estimator MSE (median / trimmed / better)")
    sub.add_parser("table2", parents=[common], help="subsample selection: likelihood vs Kolmogorov objective")
    sub.add_parser("table3", parents=[common], help="least trimmed squares by random subset search")
    t4 = sub.add_parser("table4", parents=[common], help="screening coverage: LAR / SIS / better")
    t4.add_argument("--p", type=_positive_int, action="append",
                    help="number of predictors (repeatable; default 100 and 1000)")
    t4.add_argument("--full", action="store_true", help="all p from 100 to 10000")

    au = sub.add_parser("audit", parents=[common], help="paired-budget audit of the subset objectives")
    au.add_argument("--objective", choices=("dK", "likelihood", "lts"), default="dK")
    au.add_argument("--case", choices=("I", "II", "III"), default="I")
    au.add_argument("--budgets", type=_positive_int, nargs=2, default=(10, 100),
                    metavar=("B_SMALL", "B_LARGE"))

    lt = sub.add_parser("lts", parents=[common], help="LTS fit of a CSV (last column is y)")
    lt.add_argument("data", type=Path)
    lt.add_argument("--m", type=_positive_int, required=True, help="subset size")
    lt.add_argument("--budget", type=_positive_int, default=500)
    lt.add_argument("--exhaustive", action="store_true")

    sc = sub.add_parser("screen", parents=[common], help="screen predictors of a CSV (last column is y)")
    sc.add_argument("data", type=Path)
    sc.add_argument("--M", type=_positive_int, default=25, help="variables to keep")

    lo = sub.add_parser("locate", parents=[common], help="location estimate of values in a file")
    lo.add_argument("data", type=Path)
    lo.add_argument("--family", default="normal", help="normal, cauchy or tN (e.g. t5)")
    return parser


def _write(art, args, stem: str):
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / f"{stem}.csv").write_text(art.to_csv())
        (args.out / f"{stem}.json").write_text(art.to_json())
    if args.format == "csv":
        sys.stdout.write(art.to_csv())
    elif args.format == "json":
        sys.stdout.write(art.to_json())
    else:
        sys.stdout.write(art.to_text())


def _run_table(args, threads) -> int:
    kwargs = {"seed": args.seed, "scale": args.scale, "threads": threads}
    if args.reps is not None:
        kwargs["reps"] = args.reps
    if args.command == "table4":
        if args.full:
            kwargs["ps"] = tables.TABLE4_P
        elif args.p:
            kwargs["ps"] = tuple(args.p)
    t0 = time.perf_counter()
    art, _ = getattr(tables, args.command)(**kwargs)
    _write(art, args, args.command)
    if args.format == "text":
        print(f"wall time {time.perf_counter() - t0:.1f}s")
    return 0


def _run_audit(args, threads) -> int:
    reps = args.reps or 10_000
    if args.objective == "lts":
        config = McConfig("lts", {"case": args.case if args.case != "III" else "I", "n": 20,
                                  "n_good": 15, "m": 11}, reps, args.seed, (), args.scale, threads)
    else:
        config = McConfig("subsample", {"case": args.case, "n": 20, "n_outlier": 5, "m": 10},
                          reps, args.seed, (), args.scale, threads)
    rep = bsp_audit(config, args.objective, budgets=tuple(args.budgets))
    doc = rep.to_dict()
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "audit.json").write_text(text)
    if args.format == "text":
        print(f"objective {args.objective}, budgets {rep.budgets[0]} vs {rep.budgets[1]}, "
              f"R={rep.total}")
        print(f"xi only good {rep.better_only}, eta only good {rep.worse_only}, "
              f"both {rep.both}, neither {rep.neither}")
        print(f"gap {rep.gap:+.4f}, 95% lower bound {rep.lower_bound:+.4f}")
    else:
        sys.stdout.write(text)
    return 0


def _load_xy(path: Path) -> RegressionData:
    arr = np.loadtxt(path, delimiter=",", ndmin=2)
    if arr.shape[1] < 2:
        raise ValueError("need at least one predictor column and a response column")
    return RegressionData(arr[:, :-1], arr[:, -1])


def _emit(doc: dict, args):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / f"{args.command}.json").write_text(text)
    sys.stdout.write(text)


def _run_lts(args) -> int:
    data = _load_xy(args.data)
    fit = lts_fit(data, args.m, B=args.budget, stream=RngStream(args.seed, 0, "cli-lts"),
                  exhaustive=args.exhaustive)
    _emit({"coefficients": fit.coefficients.tolist(), "subset": list(fit.subset.as_tuple()),
           "rss_on_subset": fit.rss_on_subset, "rank": fit.rank}, args)
    return 0


def _run_screen(args) -> int:
    data = _load_xy(args.data)
    lar, sis = lar_screen(data, args.M), sis_screen(data, args.M)
    best = better_screen(data, args.M, [lar, sis])
    _emit({r.method_tag: {"selected": list(r.selected.variables), "rss": r.rss}
           for r in (lar, sis, best)}, args)
    return 0


def _run_locate(args) -> int:
    x = UnivariateSample(np.loadtxt(args.data, ndmin=1).ravel())
    model = LocationModel.from_name(args.family)
    cands = [estimate(model, x, median(x), "median"),
             estimate(model, x, trimmed_mean(x), "trimmed")]
    best = better_of(cands, model, x)
    _emit({c.method_tag: {"value": c.value, "neg_log_lik": c.neg_log_lik} for c in cands}
          | {"better": {"value": best.value, "choice": best.method_tag}}, args)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except FlagError as exc:
        print(f"bettersol: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.reps is not None and args.reps * args.scale < 1:
        print("bettersol: error: --reps times --scale must be at least 1", file=sys.stderr)
        return 1
    threads = args.threads or default_threads()
    try:
        if args.command.startswith("table"):
            return _run_table(args, threads)
        if args.command == "audit":
            return _run_audit(args, threads)
        return {"lts": _run_lts, "screen": _run_screen, "locate": _run_locate}[args.command](args)
    except (OSError, ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"bettersol: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
