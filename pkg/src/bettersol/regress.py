"""Regression-side selection: least trimmed squares and best-subset / screening objectives."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .linalg import as_matrix, least_squares
from .subsample import (ObjectiveKind, SubsetIndex, best_within, draw_subsets,
                        evaluate_draws, exhaustive_subset_search)

BIC_BUDGET = 10**6
LAR_TIE = 1e-10


class LarBreakdown(RuntimeError):
    """Active-set Gram matrix lost positive definiteness."""


@dataclass(frozen=True)
class RegressionData:
    X: np.ndarray
    y: np.ndarray
    standardized: bool = False

    def __post_init__(self):
        X = as_matrix(self.X)
        y = np.asarray(self.y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has length {y.shape[0]}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def standardize(self) -> "RegressionData":
        """Centre the columns and scale them to unit Euclidean norm; centre y."""
        if self.standardized:
            return self
        X = self.X - self.X.mean(axis=0)
        norms = np.linalg.norm(X, axis=0)
        X = X / np.where(norms > 0, norms, 1.0)
        return RegressionData(X, self.y - self.y.mean(), True)

    def rows(self, subset) -> "RegressionData":
        idx = subset.indices if isinstance(subset, SubsetIndex) else np.asarray(subset)
        return RegressionData(self.X[idx], self.y[idx], False)


@dataclass(frozen=True)
class LtsFit:
    subset: SubsetIndex
    coefficients: np.ndarray
    rss_on_subset: float
    rank: int = -1


@dataclass(frozen=True, order=True)
class VariableSubset:
    variables: tuple = ()

    def __post_init__(self):
        v = tuple(int(j) for j in self.variables)
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("variables must be strictly increasing")
        if v and v[0] < 0:
            raise ValueError("negative variable index")
        object.__setattr__(self, "variables", v)

    @classmethod
    def of(cls, variables) -> "VariableSubset":
        return cls(tuple(sorted({int(j) for j in variables})))

    def __len__(self):
        return len(self.variables)

    def __contains__(self, j):
        return int(j) in self.variables

    def covers(self, support) -> bool:
        return set(support) <= set(self.variables)


@dataclass(frozen=True)
class ScreeningResult:
    selected: VariableSubset
    method_tag: str
    rss: float
    order: tuple = field(default=(), compare=False)


# least trimmed squares

def lts_row_objective(data: RegressionData, subset):
    """LS fit on the row subset: returns (rss, coefficients)."""
    idx = subset.indices if isinstance(subset, SubsetIndex) else np.asarray(subset)
    if idx.size == 0:
        raise ValueError("empty subset")
    fit = least_squares(data.X[idx], data.y[idx])
    return fit.rss, fit.coefficients


class LtsObjective:
    """Subset objective handle over row subsets."""

    kind = ObjectiveKind.LTS_RSS

    def __init__(self, data: RegressionData):
        self.data = data
        self.n = data.n
        self._X = np.ascontiguousarray(data.X)
        self._y = np.ascontiguousarray(data.y)

    def batch(self, subsets):
        rss, coef, ok = kernels.lts_batch(self._X, self._y, np.ascontiguousarray(subsets))
        for b in np.flatnonzero(~ok):
            rss[b], coef[b] = lts_row_objective(self.data, subsets[b])
        return rss, coef

    def __call__(self, subset):
        return lts_row_objective(self.data, subset)


def trimmed_rss(data: RegressionData, beta, m: int) -> float:
    """Sum of the m smallest squared residuals at beta (ties ordered by row index)."""
    if not 1 <= m <= data.n:
        raise ValueError(f"need 1 <= m <= n, got m={m}")
    r = data.y - data.X @ np.asarray(beta, dtype=float)
    r2 = r * r
    order = np.argsort(r2, kind="stable")
    return float(np.sum(r2[order[:m]]))


def lts_fit(data: RegressionData, m: int, B: int = 500, stream=None,
            exhaustive: bool = False) -> LtsFit:
    """LTS estimate as least squares on the best row subset of size m."""
    if m > data.n:
        raise ValueError(f"m={m} exceeds n={data.n}")
    if m < data.p:
        warnings.warn(f"m={m} < p={data.p}: subset fits are rank deficient "
                      "(minimum-norm solutions used)", RuntimeWarning, stacklevel=2)
    objective = LtsObjective(data)
    if exhaustive:
        sol = exhaustive_subset_search(objective, data.n, m)
    else:
        if stream is None:
            raise ValueError("random search needs a stream")
        subsets = draw_subsets(data.n, m, B, stream)
        values, coefs = evaluate_draws(objective, subsets)
        sol = best_within(objective, subsets, values, coefs, B)
    fit = least_squares(data.X[sol.subset.indices], data.y[sol.subset.indices])
    return LtsFit(sol.subset, np.asarray(sol.theta_hat), float(sol.objective), fit.rank)


# best subset / screening objectives

def _subset_rss(data: RegressionData, variables) -> float:
    cols = list(variables.variables if isinstance(variables, VariableSubset) else variables)
    if not cols:
        return float(data.y @ data.y)
    return least_squares(data.X[:, cols], data.y).rss


def bic_objective(data: RegressionData, subset, lam: float | None = None) -> float:
    """(1 + |A| lam / n) * RSS(A); lam defaults to log n (BIC), other values give GIC."""
    if lam is None:
        lam = math.log(data.n)
    k = len(subset.variables if isinstance(subset, VariableSubset) else subset)
    return (1.0 + k * lam / data.n) * _subset_rss(data, subset)


def rss_screening_objective(data: RegressionData, subset) -> float:
    """Residual sum of squares of the minimum-norm LS fit on the selected columns."""
    return _subset_rss(data, subset)


def _all_subsets(p: int, max_size: int):
    for k in range(max_size + 1):
        yield from itertools.combinations(range(p), k)


def bic_table(data: RegressionData, max_size: int | None = None, lam: float | None = None):
    """Objective value of every subset up to ``max_size``; size-then-lexicographic order."""
    max_size = data.p if max_size is None else max_size
    total = sum(math.comb(data.p, k) for k in range(max_size + 1))
    if total > BIC_BUDGET:
        raise ValueError(f"{total} subsets exceeds the exhaustive budget {BIC_BUDGET}")
    subsets = list(_all_subsets(data.p, max_size))
    values = np.array([bic_objective(data, s, lam) for s in subsets])
    return subsets, values


def best_subset_bic(data: RegressionData, max_size: int | None = None,
                    search="exhaustive", lam: float | None = None) -> VariableSubset:
    """BIC-optimal subset; ties go to the smaller, then lexicographically first, subset.

    ``search`` is ``"exhaustive"`` or ``("random", B, stream)``; random search
    draws a size uniformly from 0..max_size, then a uniform subset of it.
    """
    data = data.standardize()
    max_size = data.p if max_size is None else max_size
    if search == "exhaustive":
        subsets, values = bic_table(data, max_size, lam)
        return VariableSubset(subsets[int(np.argmin(values))])
    kind, B, stream = search
    if kind != "random":
        raise ValueError(f"unknown search {search!r}")
    rng = stream.generator() if hasattr(stream, "generator") else stream
    best, best_key = None, None
    for _ in range(B):
        k = int(rng.integers(0, max_size + 1))
        cols = tuple(sorted(rng.choice(data.p, size=k, replace=False).tolist()))
        key = (bic_objective(data, cols, lam), k, cols)
        if best_key is None or key < best_key:
            best, best_key = cols, key
    return VariableSubset(best)


def sis_screen(data: RegressionData, M: int) -> ScreeningResult:
    """Keep the M columns with the largest absolute marginal correlation."""
    data = data.standardize()
    if M > data.p:
        raise ValueError(f"M={M} exceeds p={data.p}")
    score = np.abs(data.X.T @ data.y)
    order = np.argsort(-score, kind="stable")[:M]
    sel = VariableSubset.of(order)
    return ScreeningResult(sel, "SIS", rss_screening_objective(data, sel), tuple(int(j) for j in order))


def _first_within(values: np.ndarray, target: float, tol: float) -> int:
    # lowest column index among near-ties
    return int(np.flatnonzero(values <= target + tol)[0])


def lar_steps(X: np.ndarray, y: np.ndarray, M: int):
    """Yield ``(active, mu)`` after each least angle regression step, up to M active."""
    n, p = X.shape
    c = X.T @ y
    absc = np.abs(c)
    active = [_first_within(-absc, -absc.max(), LAR_TIE)]
    is_active = np.zeros(p, dtype=bool)
    is_active[active[0]] = True
    mu = np.zeros(n)
    yield list(active), mu
    while len(active) < M:
        c = X.T @ (y - mu)
        C = np.abs(c[active]).max()
        s = np.sign(c[active])
        XA = X[:, active] * s
        G = XA.T @ XA
        try:
            L = np.linalg.cholesky(G)
        except np.linalg.LinAlgError as exc:
            raise LarBreakdown(f"active Gram not positive definite at step {len(active)}") from exc
        g1 = np.linalg.solve(L.T, np.linalg.solve(L, np.ones(len(active))))
        AA = 1.0 / math.sqrt(g1.sum())
        u = XA @ (AA * g1)
        a = X.T @ u
        with np.errstate(divide="ignore", invalid="ignore"):
            g_minus = (C - c) / (AA - a)
            g_plus = (C + c) / (AA + a)
        g_minus = np.where(g_minus > LAR_TIE, g_minus, np.inf)
        g_plus = np.where(g_plus > LAR_TIE, g_plus, np.inf)
        gam = np.minimum(g_minus, g_plus)
        gam[is_active] = np.inf
        gmin = gam.min()
        if not np.isfinite(gmin):
            raise LarBreakdown(f"no variable can enter at step {len(active)}")
        j = _first_within(gam, gmin, LAR_TIE)
        mu = mu + gam[j] * u
        active.append(j)
        is_active[j] = True
        yield list(active), mu


def lar_path_order(X: np.ndarray, y: np.ndarray, M: int) -> list:
    """Activation order of the first M variables along the least angle regression path."""
    active = []
    for active, _ in lar_steps(X, y, M):
        pass
    return active


def lar_screen(data: RegressionData, M: int) -> ScreeningResult:
    """First M variables activated by least angle regression (no lasso drops)."""
    data = data.standardize()
    if not 1 <= M < data.n:
        raise ValueError(f"need 1 <= M < n, got M={M}")
    if M > data.p:
        raise ValueError(f"M={M} exceeds p={data.p}")
    order = lar_path_order(data.X, data.y, M)
    sel = VariableSubset.of(order)
    return ScreeningResult(sel, "LAR", rss_screening_objective(data, sel), tuple(order))


def better_screen(data: RegressionData, M: int, results) -> ScreeningResult:
    """The screening result with the smaller RSS (first wins ties)."""
    results = list(results)
    if not results:
        raise ValueError("no screening results")
    data = data.standardize()
    best, best_rss = None, math.inf
    for res in results:
        if len(res.selected) != M:
            raise ValueError(f"{res.method_tag} selected {len(res.selected)} variables, expected {M}")
        r = rss_screening_objective(data, res.selected)
        if best is None or r < best_rss:
            best, best_rss = res, r
    return ScreeningResult(best.selected, f"better({best.method_tag})", best_rss, best.order)
