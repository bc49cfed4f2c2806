"""Deterministic Monte Carlo engine, paired-budget audit and table rendering.

Replication ``r`` of a configuration draws everything from
``RngStream(master_seed, r, purpose)``, so results do not depend on how
replications are scheduled across threads.  Aggregation walks the
per-replication records in index order.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .dist import RngStream
from .experiments import EXPERIMENTS, Record, paired_search


@dataclass(frozen=True)
class McConfig:
    experiment: str
    params: dict
    replications: int
    master_seed: int = 0
    methods: tuple = ()
    scale_factor: float = 1.0
    threads: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not 0.0 < self.scale_factor <= 1.0:
            raise ValueError("scale_factor must lie in (0, 1]")
        if self.effective_replications < 1:
            raise ValueError("scale_factor * replications must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        known = EXPERIMENTS[self.experiment][1](self.params)
        object.__setattr__(self, "methods", tuple(self.methods) or known)
        unknown = set(self.methods) - set(known)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)} for {self.experiment}")

    @property
    def effective_replications(self) -> int:
        return int(math.floor(self.replications * self.scale_factor + 1e-9))

    @property
    def purpose(self) -> str:
        # the stream identity: one independent stream family per experiment cell
        return f"{self.experiment}:{json.dumps(self.params, sort_keys=True)}"

    def echo(self) -> dict:
        return {"experiment": self.experiment, "params": dict(self.params),
                "replications": self.effective_replications,
                "master_seed": self.master_seed, "methods": list(self.methods),
                "scale_factor": self.scale_factor}


@dataclass(frozen=True)
class MethodSummary:
    n: int
    failures: int
    mse: float
    mse_mc_se: float
    mov: float
    mov_mc_se: float
    coverage: float
    coverage_mc_se: float


@dataclass
class McReport:
    config: McConfig
    methods: dict
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        """Everything except wall time, which would break byte-identical artifacts."""
        return {"config": self.config.echo(),
                "methods": {k: asdict(v) for k, v in self.methods.items()}}


def _mean_se(x: np.ndarray):
    if x.size == 0:
        return math.nan, math.nan
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return float(x.mean()), se


def _summarize_method(records) -> MethodSummary:
    ok = [r for r in records if not r.failed]
    sq = np.array([r.sq_error for r in ok if not math.isnan(r.sq_error)])
    mov = np.array([r.objective for r in ok if not math.isnan(r.objective)])
    good = np.array([r.good for r in ok if not math.isnan(r.good)])
    mse, mse_se = _mean_se(sq)
    m, m_se = _mean_se(mov)
    cov, cov_se = _mean_se(good)
    return MethodSummary(len(ok), len(records) - len(ok), mse, mse_se, m, m_se, cov, cov_se)


def _run_indexed(func, count: int, threads: int):
    if threads == 1 or count == 1:
        return [func(r) for r in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, range(count), chunksize=max(1, count // (8 * threads))))


def default_threads() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)


def run_mc(config: McConfig, order=None) -> McReport:
    """Run the replications of ``config`` and aggregate per method.

    ``order`` optionally permutes execution; the report is unaffected.
    """
    rep_fn = EXPERIMENTS[config.experiment][0]
    R = config.effective_replications
    params = dict(config.params)

    def one(r):
        stream = RngStream(config.master_seed, r, config.purpose)
        try:
            out = rep_fn(params, stream)
        except (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError):
            return {name: Record(failed=True) for name in config.methods}
        return {name: out.get(name, Record(failed=True)) for name in config.methods}

    t0 = time.perf_counter()
    sequence = list(range(R)) if order is None else [int(r) for r in order]
    if sorted(sequence) != list(range(R)):
        raise ValueError("order must be a permutation of the replication indices")
    results = _run_indexed(lambda k: one(sequence[k]), R, config.threads)
    by_index = [None] * R
    for r, rec in zip(sequence, results):
        by_index[r] = rec
    methods = {name: _summarize_method([rec[name] for rec in by_index])
               for name in config.methods}
    return McReport(config, methods, time.perf_counter() - t0)


# paired-budget audit

@dataclass(frozen=True)
class AuditReport:
    better_only: int
    worse_only: int
    both: int
    neither: int
    gap: float
    lower_bound: float
    max_violation: float
    config: McConfig = field(compare=False, default=None)
    objective: str = ""
    budgets: tuple = ()

    @property
    def total(self) -> int:
        return self.better_only + self.worse_only + self.both + self.neither

    def to_dict(self) -> dict:
        return {"better_only": self.better_only, "worse_only": self.worse_only,
                "both": self.both, "neither": self.neither, "gap": self.gap,
                "lower_bound_95": self.lower_bound, "max_violation": self.max_violation,
                "objective": self.objective, "budgets": list(self.budgets),
                "config": self.config.echo() if self.config else None}


def subset_in_good(solution, good) -> bool:
    return solution.subset.issubset(good)


def gap_lower_bound(better_only: int, worse_only: int, R: int, level: float = 0.95) -> float:
    """One-sided lower confidence bound for P(xi good) - P(eta good).

    Conditions on the discordant count a + b; the gap equals
    (a + b)/R * (2q - 1) with q = P(better only | discordant), bounded below
    by the exact (Clopper-Pearson) binomial limit.
    """
    a, b = better_only, worse_only
    if a + b == 0:
        return 0.0
    q_low = 0.0 if a == 0 else float(stats.beta.ppf(1.0 - level, a, b + 1))
    return (a + b) / R * (2.0 * q_low - 1.0)


def bsp_audit(config: McConfig, objective: str, good_predicate=subset_in_good,
              budgets=(10, 100)) -> AuditReport:
    """Compare the budget-B_large search (xi) with the budget-B_small one (eta).

    Both searches use the same draws, xi over a superset of eta's, so
    psi(xi) <= psi(eta) on every replication.
    """
    b_small, b_large = (int(b) for b in budgets)
    if not 1 <= b_small < b_large:
        raise ValueError("need 1 <= B_small < B_large")
    params = dict(config.params)

    def one(r):
        stream = RngStream(config.master_seed, r, config.purpose)
        eta, xi, good = paired_search(config.experiment, params, stream, objective,
                                      (b_small, b_large))
        g_xi = good_predicate(xi, good)
        g_eta = good_predicate(eta, good)
        if not isinstance(g_xi, (bool, np.bool_)) or not isinstance(g_eta, (bool, np.bool_)):
            raise TypeError("good_predicate must return a bool")
        return bool(g_xi), bool(g_eta), xi.objective - eta.objective

    R = config.effective_replications
    rows = _run_indexed(one, R, config.threads)
    a = sum(1 for x, e, _ in rows if x and not e)
    b = sum(1 for x, e, _ in rows if e and not x)
    both = sum(1 for x, e, _ in rows if x and e)
    neither = R - a - b - both
    violation = max(d for _, _, d in rows)
    return AuditReport(a, b, both, neither, (a - b) / R, gap_lower_bound(a, b, R),
                       float(violation), config, objective, (b_small, b_large))


# table rendering

@dataclass(frozen=True)
class Layout:
    """Where each (report, method, metric) lands in a table."""

    name: str
    experiment: str
    metrics: tuple
    row: object
    column: object
    rel_tol: float = 0.0
    abs_tol: float = 0.0
    se_widen: bool = True


def _budget_label(method: str) -> str:
    # "dK_B10" -> "dK B=10", "B100" -> "B=100"
    head, _, budget = method.rpartition("B")
    return f"{head.rstrip('_')} B={budget}".lstrip()


LAYOUTS = {
    "table1": Layout("table1", "location", ("mse",),
                     lambda p, m: f"{p.get('family', 'normal')} {m}",
                     lambda p, k: f"n={p['n']}", rel_tol=0.05),
    "table2": Layout("table2", "subsample", ("mov", "mse"),
                     lambda p, m: f"({p.get('case', 'I')}) {_budget_label(m)}",
                     lambda p, k: f"n_o={p.get('n_outlier', 5)} {k.upper()}", rel_tol=0.10),
    "table3": Layout("table3", "lts", ("mov", "mse"),
                     lambda p, m: _budget_label(m),
                     lambda p, k: f"({p.get('case', 'I')}) {k.upper()}", rel_tol=0.10,
                     se_widen=False),
    "table4": Layout("table4", "screening", ("coverage",),
                     lambda p, m: m, lambda p, k: f"p={p['p']}", abs_tol=0.03,
                     se_widen=False),
    "bic": Layout("bic", "bic", ("coverage",), lambda p, m: m, lambda p, k: "rate"),
}


@dataclass(frozen=True)
class Cell:
    row: str
    column: str
    value: float
    mc_se: float
    reference: float = math.nan
    tolerance: float = math.nan
    verdict: str = ""


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class TableArtifact:
    name: str
    rows: list
    columns: list
    cells: list
    checks: list = field(default_factory=list)
    configs: list = field(default_factory=list)
    widened: bool = False

    def cell(self, row: str, column: str) -> Cell:
        for c in self.cells:
            if c.row == row and c.column == column:
                return c
        raise KeyError((row, column))

    def verdicts(self):
        """(label, passed) for every referenced cell and every check."""
        out = [(f"{c.row} | {c.column}", c.verdict == "PASS") for c in self.cells if c.verdict]
        out += [(k.name, k.passed) for k in self.checks]
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["table", "row", "column", "value", "mc_se", "reference", "tolerance", "verdict"])
        for c in self.cells:
            w.writerow([self.name, c.row, c.column, _fmt(c.value), _fmt(c.mc_se),
                        _fmt(c.reference), _fmt(c.tolerance), c.verdict])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"table": self.name, "widened_tolerance": self.widened,
               "cells": [asdict(c) for c in self.cells],
               "checks": [asdict(k) for k in self.checks],
               "reports": self.configs}
        return json.dumps(_nan_to_none(doc), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        width = max([len(r) for r in self.rows] + [4])
        colw = max([len(c) for c in self.columns] + [10])
        lines = [self.name, " " * width + "  " + "  ".join(c.rjust(colw) for c in self.columns)]
        index = {(c.row, c.column): c for c in self.cells}
        for r in self.rows:
            vals = []
            for col in self.columns:
                c = index.get((r, col))
                vals.append((_fmt(c.value, 4) if c else "").rjust(colw))
            lines.append(r.ljust(width) + "  " + "  ".join(vals))
        lines.append("")
        if self.widened:
            lines.append("note: reduced replications; tolerance widened to 3 MC standard errors")
        for c in self.cells:
            if c.verdict:
                lines.append(f"{c.verdict}  {c.row} | {c.column}: {_fmt(c.value, 4)} "
                             f"vs {_fmt(c.reference, 4)} (tol {_fmt(c.tolerance, 3)})")
        for k in self.checks:
            lines.append(f"{'PASS' if k.passed else 'FAIL'}  check: {k.name}"
                         + (f" ({k.detail})" if k.detail else ""))
        return "\n".join(lines) + "\n"


def _fmt(x, digits=10) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), f".{digits}g")


def _nan_to_none(obj):
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, dict):
        return {k: _nan_to_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_nan_to_none(v) for v in obj]
    return obj


def tolerance(layout: Layout, reference: float, mc_se: float, widen: bool) -> float:
    tol = max(layout.rel_tol * abs(reference), layout.abs_tol)
    if layout.se_widen or widen:
        tol = max(tol, 3.0 * mc_se)
    return tol


def summarize(reports, layout, references=None) -> TableArtifact:
    """Lay reports out as a table; cells with a reference value get a verdict."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to summarize")
    if isinstance(layout, str):
        if layout not in LAYOUTS:
            raise ValueError(f"unknown layout {layout!r}")
        layout = LAYOUTS[layout]
    for rep in reports:
        if rep.config.experiment != layout.experiment:
            raise ValueError(f"layout {layout.name} expects {layout.experiment} reports, "
                             f"got {rep.config.experiment}")
    references = references or {}
    widened = any(rep.config.scale_factor < 1.0 for rep in reports)
    rows, columns, cells = [], [], []
    for rep in reports:
        p = rep.config.params
        for method in rep.config.methods:
            s = rep.methods[method]
            row = layout.row(p, method)
            if row not in rows:
                rows.append(row)
            for metric in layout.metrics:
                col = layout.column(p, metric)
                if col not in columns:
                    columns.append(col)
                value = getattr(s, metric)
                se = getattr(s, metric + "_mc_se")
                ref = references.get((row, col), math.nan)
                if math.isnan(ref):
                    cells.append(Cell(row, col, value, se))
                    continue
                tol = tolerance(layout, ref, se, widened)
                ok = abs(value - ref) <= tol
                cells.append(Cell(row, col, value, se, ref, tol, "PASS" if ok else "FAIL"))
    return TableArtifact(layout.name, rows, columns, cells, [],
                         [r.to_dict() for r in reports], widened)
