"""Location estimators and the greater-likelihood selector."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dist import LocationModel, log_pdf


@dataclass(frozen=True)
class UnivariateSample:
    values: np.ndarray
    sorted_cache: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("sample is empty")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample contains non-finite values")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "sorted_cache", np.sort(v))

    def __len__(self):
        return self.values.size

    def shifted(self, c: float) -> "UnivariateSample":
        return UnivariateSample(self.values + c)


def _as_sample(sample) -> UnivariateSample:
    return sample if isinstance(sample, UnivariateSample) else UnivariateSample(sample)


@dataclass(frozen=True)
class LocationEstimate:
    value: float
    method_tag: str
    neg_log_lik: float = math.nan


def neg_log_lik(model: LocationModel, theta: float, sample) -> float:
    """-sum_i log f(X_i, theta)."""
    s = _as_sample(sample)
    return float(-np.sum(log_pdf(model, theta, s.values)))


def median(sample) -> float:
    s = _as_sample(sample).sorted_cache
    n = s.size
    mid = n // 2
    if n % 2:
        return float(s[mid])
    return float(0.5 * (s[mid - 1] + s[mid]))


def trimmed_mean(sample, keep_fraction: float = 0.5, rounding: str = "floor") -> float:
    """Mean after removing k values from each tail, k = n (1 - keep_fraction) / 2 rounded.

    ``rounding="floor"`` rounds down; ``"nearest"`` rounds to the nearest
    integer with halves going down (n = 15 trims 4 per tail, n = 10 trims 2).
    """
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError(f"keep_fraction must lie in (0, 1], got {keep_fraction}")
    s = _as_sample(sample).sorted_cache
    n = s.size
    # epsilon guards products like 10 * 0.2 / 2 = 0.9999...
    half = n * (1.0 - keep_fraction) / 2.0
    if rounding == "floor":
        k = int(math.floor(half + 1e-12))
    elif rounding == "nearest":
        k = max(0, int(math.ceil(half - 0.5 - 1e-12)))
    else:
        raise ValueError(f"unknown rounding {rounding!r}")
    if n - 2 * k < 1:
        raise ValueError("trimming leaves no observations")
    return float(np.mean(s[k:n - k]))


def estimate(model: LocationModel, sample, value: float, tag: str) -> LocationEstimate:
    return LocationEstimate(float(value), tag, neg_log_lik(model, value, sample))


def better_of(candidates, model: LocationModel, sample) -> LocationEstimate:
    """Candidate with the greatest likelihood; first one wins ties."""
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no candidates to choose from")
    s = _as_sample(sample)
    best, best_nll = None, math.inf
    for cand in candidates:
        nll = neg_log_lik(model, cand.value, s)
        if best is None or nll < best_nll:
            best, best_nll = cand, nll
    if best.neg_log_lik != best_nll:
        best = LocationEstimate(best.value, best.method_tag, best_nll)
    return best
