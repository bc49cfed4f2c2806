"""Best-subsample selection for contaminated location models.

Two subset objectives are provided: the profile negative log-likelihood of
the subsample and the minimum Kolmogorov distance between the subsample's
empirical CDF and the location family.  Subsets are searched either by
random draws or, for small problems, exhaustively.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from . import kernels
from .dist import LocationModel, RngStream, cdf, log_pdf
from .location import UnivariateSample, _as_sample

NLL_TOL = 1e-8
KS_TOL = 1e-10
KS_GRID = 512
KS_GRID_TOL = 1e-7
EXHAUSTIVE_BUDGET = 10**7
S_NORMAL_SELF = 0.5 * math.log(2.0 * math.pi) + 0.5


class ObjectiveKind(enum.Enum):
    PROFILE_NLL = "ProfileNLL"
    KOLMOGOROV = "KolmogorovDistance"
    LTS_RSS = "LtsRss"


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class SubsetIndex:
    """Sorted, duplicate-free indices into a universe of ``universe_size`` items."""

    indices: np.ndarray
    universe_size: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        if idx.size and (idx[0] < 0 or idx[-1] >= self.universe_size):
            raise ValueError("subset indices out of range")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("subset indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, indices, universe_size: int) -> "SubsetIndex":
        return cls(np.unique(np.asarray(indices, dtype=np.int64)), universe_size)

    @classmethod
    def full(cls, n: int) -> "SubsetIndex":
        return cls(np.arange(n, dtype=np.int64), n)

    def __len__(self):
        return self.indices.size

    def issubset(self, other: "SubsetIndex") -> bool:
        return bool(np.all(np.isin(self.indices, other.indices)))

    def as_tuple(self):
        return tuple(int(i) for i in self.indices)


@dataclass(frozen=True)
class SubsampleSolution:
    subset: SubsetIndex
    theta_hat: object
    objective: float
    objective_kind: ObjectiveKind
    draw_index: int = -1


@dataclass(frozen=True)
class ContaminationDiagnostic:
    epsilon: float
    tau: float
    alpha_max: float
    separation_holds: bool
    margin: float
    infimum_gap: float


def _subset_values(subset, sample: UnivariateSample) -> np.ndarray:
    idx = subset.indices if isinstance(subset, SubsetIndex) else np.asarray(subset)
    if idx.size == 0:
        raise ValueError("empty subset")
    if isinstance(subset, SubsetIndex) and subset.universe_size != len(sample):
        raise ValueError("subset universe does not match the sample size")
    return sample.values[idx]


def _fam_args(model: LocationModel):
    return int(model.family), float(model.df), float(model.scale)


def profile_nll_objective(model: LocationModel, subset, sample):
    """inf over theta of -sum_{i in subset} log f(X_i, theta), and the minimiser."""
    v = _subset_values(subset, _as_sample(sample))
    psi, theta = kernels.nll_min(np.ascontiguousarray(v[None, :]), *_fam_args(model), NLL_TOL)
    return float(psi[0]), float(theta[0])


def ks_distance(subset_values, model: LocationModel, theta: float) -> float:
    """sup_x |H(x) - F_theta(x)| for the empirical CDF H of sorted values."""
    v = np.asarray(subset_values, dtype=float)
    if v.size == 0:
        raise ValueError("empty input")
    return float(kernels.ks_dist(np.ascontiguousarray(v), *_fam_args(model), float(theta)))


def _ks_grid_min(v: np.ndarray, model: LocationModel):
    """Grid of KS_GRID points then golden-section inside the best cell."""
    fam, df, scale = _fam_args(model)
    lo, hi = v[0] - 3.0 * scale, v[-1] + 3.0 * scale
    grid = np.linspace(lo, hi, KS_GRID)
    F = cdf(model, grid[:, None], v[None, :])
    m = v.size
    i = np.arange(m)
    d = np.maximum(((i + 1) / m - F).max(axis=1), (F - i / m).max(axis=1))
    k = int(np.argmin(d))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, KS_GRID - 1)]
    res = optimize.minimize_scalar(lambda t: ks_distance(v, model, t), bounds=(a, b),
                                   method="bounded", options={"xatol": KS_GRID_TOL})
    if res.fun <= d[k]:
        return float(res.fun), float(res.x)
    return float(d[k]), float(grid[k])


def ks_objective(model: LocationModel, subset, sample, method: str = "bisect"):
    """inf over theta of the Kolmogorov distance of the subsample; returns (value, theta).

    ``method="bisect"`` uses that the distance is the maximum of an increasing
    and a decreasing function of theta, so the infimum is at their crossing.
    ``method="grid"`` is the generic grid-then-golden-section search.
    """
    v = np.sort(_subset_values(subset, _as_sample(sample)))
    if method == "grid":
        return _ks_grid_min(v, model)
    if method != "bisect":
        raise ValueError(f"unknown method {method!r}")
    d, theta = kernels.ks_min(np.ascontiguousarray(v[None, :]), *_fam_args(model), KS_TOL)
    return float(d[0]), float(theta[0])


class ProfileNLL:
    """Subset objective handle: profile NLL of the subsample."""

    kind = ObjectiveKind.PROFILE_NLL

    def __init__(self, model: LocationModel, sample):
        self.model = model
        self.sample = _as_sample(sample)
        self.n = len(self.sample)

    def batch(self, subsets: np.ndarray):
        V = np.ascontiguousarray(self.sample.values[subsets])
        return kernels.nll_min(V, *_fam_args(self.model), NLL_TOL)

    def __call__(self, subset):
        return profile_nll_objective(self.model, subset, self.sample)


class KolmogorovDistance:
    """Subset objective handle: minimum Kolmogorov distance of the subsample."""

    kind = ObjectiveKind.KOLMOGOROV

    def __init__(self, model: LocationModel, sample):
        self.model = model
        self.sample = _as_sample(sample)
        self.n = len(self.sample)

    def batch(self, subsets: np.ndarray):
        V = np.sort(self.sample.values[subsets], axis=1)
        return kernels.ks_min(np.ascontiguousarray(V), *_fam_args(self.model), KS_TOL)

    def __call__(self, subset):
        return ks_objective(self.model, subset, self.sample)


def _generator(stream):
    return stream.generator() if isinstance(stream, RngStream) else stream


def draw_subsets(n: int, m: int, B: int, stream) -> np.ndarray:
    """B uniform size-m subsets of range(n), one partial Fisher-Yates shuffle each.

    Row b depends only on the first (b + 1) * m integers of the stream, so a
    larger budget extends a smaller one drawn from the same stream.
    """
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    if B < 1:
        raise ValueError("B must be >= 1")
    rng = _generator(stream)
    draws = rng.integers(0, n - np.arange(m), size=(B, m), dtype=np.int64)
    return kernels.fisher_yates(n, m, np.ascontiguousarray(draws))


def _solution(objective, subsets, values, thetas, k) -> SubsampleSolution:
    theta = thetas[k]
    theta = float(theta) if np.ndim(theta) == 0 else np.array(theta)
    return SubsampleSolution(SubsetIndex(subsets[k], objective.n), theta,
                             float(values[k]), objective.kind, int(k))


def evaluate_draws(objective, subsets: np.ndarray):
    values, thetas = objective.batch(np.ascontiguousarray(subsets, dtype=np.int64))
    return np.asarray(values, dtype=float), thetas


def best_within(objective, subsets, values, thetas, budget: int) -> SubsampleSolution:
    """Minimiser among the first ``budget`` draws; earliest draw wins ties."""
    k = int(np.argmin(values[:budget]))
    return _solution(objective, subsets, values, thetas, k)


def random_subset_search(objective, n: int, m: int, B: int, stream) -> SubsampleSolution:
    """Best of B random size-m subsets (subsets may recur across draws)."""
    if m > n:
        raise ValueError(f"m={m} exceeds n={n}")
    subsets = draw_subsets(n, m, B, stream)
    values, thetas = evaluate_draws(objective, subsets)
    return best_within(objective, subsets, values, thetas, B)


def exhaustive_subset_search(objective, n: int, m: int, chunk: int = 65536) -> SubsampleSolution:
    """Global minimiser over all size-m subsets, lexicographic tie-break."""
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    total = math.comb(n, m)
    if total > EXHAUSTIVE_BUDGET:
        raise ValueError(f"C({n},{m}) = {total} subsets exceeds the budget {EXHAUSTIVE_BUDGET}")
    combos = itertools.combinations(range(n), m)
    best = None
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        block = block.reshape(-1, m)
        values, thetas = evaluate_draws(objective, block)
        k = int(np.argmin(values))
        if best is None or values[k] < best.objective:
            best = _solution(objective, block, values, thetas, k)
    return best


def _quad_line(func, center: float, half_width: float, tol: float) -> float:
    """Integral over the real line, split into a core interval and two tails."""
    total = 0.0
    pieces = ((-np.inf, center - half_width), (center - half_width, center + half_width),
              (center + half_width, np.inf))
    for a, b in pieces:
        out = integrate.quad(func, a, b, epsabs=tol / 3, epsrel=1e-12, limit=200,
                             full_output=1)
        if len(out) > 3:
            raise QuadratureError(f"quadrature did not converge on ({a}, {b}): {out[3]}")
        total += out[0]
    return total


def kl_risk(model: LocationModel, theta: float, theta0: float, tol: float = 1e-8) -> float:
    """-int log f(x, theta) f(x, theta0) dx by adaptive quadrature."""
    def integrand(x):
        return -log_pdf(model, theta, x) * math.exp(log_pdf(model, theta0, x))
    return _quad_line(integrand, theta0, 40.0 * model.scale, tol)


@dataclass(frozen=True)
class OutlierLaw:
    """Normal(mean, variance) outlier law; variance 0 is a point mass at ``mean``."""

    mean: float
    variance: float


def _outlier_risk(theta: float, outlier: OutlierLaw, tol: float) -> float:
    base = LocationModel.normal()
    if outlier.variance == 0:
        return float(-log_pdf(base, theta, outlier.mean))
    sd = math.sqrt(outlier.variance)
    law = LocationModel.normal(sd)

    def integrand(x):
        return -log_pdf(base, theta, x) * math.exp(log_pdf(law, outlier.mean, x))
    return _quad_line(integrand, outlier.mean, 40.0 * sd, tol)


def likelihood_separation_check(outlier: OutlierLaw, epsilon: float, tau: float,
                                theta0: float = 0.0) -> ContaminationDiagnostic:
    """Check whether the likelihood objective separates good from contaminated subsets.

    Normal(theta, 1) base model.  Evaluates
    ``inf_theta (1 - a) s(theta, theta0) + a s_g(theta) - s(theta0, theta0)``
    at ``a = epsilon / (1 - tau)``.  For ``epsilon = tau = 1/2`` the condition
    reduces to Var(outlier) > 1 and the margin reported is ``variance - 1``.
    """
    if not 0.0 <= epsilon <= 0.5:
        raise ValueError("epsilon must lie in [0, 1/2]")
    if not 0.5 <= tau <= 1.0 - epsilon:
        raise ValueError("tau must lie in [1/2, 1 - epsilon]")
    if outlier.variance < 0:
        raise ValueError("outlier variance must be >= 0")
    alpha = epsilon / (1.0 - tau)
    base = LocationModel.normal()
    tol = 1e-10
    s_self = kl_risk(base, theta0, theta0, tol)

    def h(theta):
        return ((1.0 - alpha) * kl_risk(base, theta, theta0, tol)
                + alpha * _outlier_risk(theta, outlier, tol))

    lo = min(theta0, outlier.mean) - 10.0
    hi = max(theta0, outlier.mean) + 10.0
    res = optimize.minimize_scalar(h, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-9})
    gap = float(min(res.fun, h(theta0), h(outlier.mean)) - s_self)
    if epsilon == 0.5 and tau == 0.5:
        margin = outlier.variance - 1.0
        holds = outlier.variance > 1.0
    else:
        margin = gap
        holds = gap > 0.0
    return ContaminationDiagnostic(epsilon, tau, alpha, bool(holds), float(margin), gap)


def subsample_mle(model: LocationModel, subset, sample) -> float:
    """Maximum-likelihood location on the selected subsample."""
    return profile_nll_objective(model, subset, sample)[1]


__all__ = [
    "ContaminationDiagnostic", "KolmogorovDistance", "ObjectiveKind", "OutlierLaw",
    "ProfileNLL", "QuadratureError", "SubsampleSolution", "SubsetIndex",
    "best_within", "draw_subsets", "evaluate_draws", "exhaustive_subset_search",
    "kl_risk", "ks_distance", "ks_objective", "likelihood_separation_check",
    "profile_nll_objective", "random_subset_search", "subsample_mle",
]
