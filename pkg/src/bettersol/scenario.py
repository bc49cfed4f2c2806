"""Seeded generators for the simulated data regimes.

Good observations always occupy indices ``0..n_good-1``; selection methods
never look at the layout.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dist import LocationModel, RngStream, sample
from .location import UnivariateSample
from .subsample import SubsetIndex


@dataclass(frozen=True)
class PointMass:
    value: float = 1.0


@dataclass(frozen=True)
class NormalOutliers:
    mean: float = 1.0
    variance: float = 1.0


@dataclass(frozen=True)
class ContaminationScenario:
    n_good: int
    n_outlier: int
    good_model: LocationModel = field(default_factory=LocationModel.normal)
    theta0: float = 0.0
    outlier: PointMass | NormalOutliers = field(default_factory=PointMass)
    layout: str = "GoodFirst"

    def __post_init__(self):
        if self.n_good < 0 or self.n_outlier < 0 or self.n_good + self.n_outlier < 1:
            raise ValueError("need n_good, n_outlier >= 0 and a nonempty sample")
        if self.layout != "GoodFirst":
            raise ValueError(f"unsupported layout {self.layout!r}")

    @property
    def n(self) -> int:
        return self.n_good + self.n_outlier

    @property
    def epsilon(self) -> float:
        return self.n_outlier / self.n


# outlier laws of the three contamination cases of the subsample study
def location_case(case: str, n: int = 20, n_outlier: int = 5,
                  case3_variance: float = 9.0) -> ContaminationScenario:
    """Case ``I`` (constant 1), ``II`` (N(1, 0.5^2)) or ``III`` (N(1, case3_variance))."""
    laws = {
        "I": PointMass(1.0),
        "II": NormalOutliers(1.0, 0.25),
        "III": NormalOutliers(1.0, case3_variance),
    }
    return ContaminationScenario(n - n_outlier, n_outlier, LocationModel.normal(), 0.0,
                                 laws[case.upper()])


def gen_location(scenario: ContaminationScenario, stream):
    """Returns (sample, good_indices)."""
    rng = stream.generator() if isinstance(stream, RngStream) else stream
    good = sample(scenario.good_model, scenario.theta0, rng, scenario.n_good)
    k = scenario.n_outlier
    law = scenario.outlier
    if isinstance(law, PointMass):
        bad = np.full(k, float(law.value))
    else:
        bad = law.mean + math.sqrt(law.variance) * rng.standard_normal(k)
    values = np.concatenate([good, bad])
    return UnivariateSample(values), SubsetIndex(np.arange(scenario.n_good), scenario.n)


@dataclass(frozen=True)
class Equicorrelation:
    rho: float = 0.0


@dataclass(frozen=True)
class InterceptShift:
    delta: float = 5.0
    noise_variance: float = 1.0


@dataclass(frozen=True)
class Nonlinear:
    """y = 2 x1 - 2 x2 + 3 x1^2 + noise (the only formula supported, tag ``quad``)."""

    tag: str = "quad"
    noise_variance: float = 9.0


@dataclass(frozen=True)
class RegressionScenario:
    n: int
    n_good: int
    beta: tuple
    covariance: Equicorrelation | tuple = field(default_factory=Equicorrelation)
    outlier_rule: InterceptShift | Nonlinear | None = None
    noise_variance: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if not 0 <= self.n_good <= self.n:
            raise ValueError("need 0 <= n_good <= n")
        if self.n_good < self.n and self.outlier_rule is None:
            raise ValueError("outlier rows need an outlier rule")
        if isinstance(self.covariance, Equicorrelation):
            if not 0.0 <= self.covariance.rho < 1.0:
                raise ValueError("one-factor equicorrelation needs 0 <= rho < 1")
        else:
            cov = np.asarray(self.covariance, dtype=float)
            if cov.shape != (self.p, self.p) or not np.allclose(cov, cov.T):
                raise ValueError("covariance must be a symmetric p x p matrix")
            np.linalg.cholesky(cov)  # raises when not positive definite
            object.__setattr__(self, "covariance", tuple(map(tuple, cov)))

    @property
    def p(self) -> int:
        return len(self.beta)


def lts_case(case: str, n: int = 20, n_good: int = 15,
             case2_noise_variance: float = 9.0) -> RegressionScenario:
    """Regression outlier cases: ``I`` intercept shift by 5, ``II`` quadratic."""
    rule = InterceptShift(5.0, 1.0) if case.upper() == "I" else Nonlinear("quad", case2_noise_variance)
    return RegressionScenario(n, n_good, (0.0, 0.0), ((1.0, 0.5), (0.5, 1.0)), rule)


def draw_design(rng: np.random.Generator, n: int, p: int, covariance) -> np.ndarray:
    """n rows i.i.d. N(0, covariance)."""
    if isinstance(covariance, Equicorrelation):
        rho = covariance.rho
        shared = rng.standard_normal((n, 1))
        own = rng.standard_normal((n, p))
        # one shared factor: exact equicorrelation, O(p) per row
        return math.sqrt(rho) * shared + math.sqrt(1.0 - rho) * own
    L = np.linalg.cholesky(np.asarray(covariance, dtype=float))
    return rng.standard_normal((n, p)) @ L.T


def gen_regression(scenario: RegressionScenario, stream):
    """Returns (RegressionData, good_indices)."""
    from .regress import RegressionData

    rng = stream.generator() if isinstance(stream, RngStream) else stream
    n, p = scenario.n, scenario.p
    X = draw_design(rng, n, p, scenario.covariance)
    e = rng.standard_normal(n)
    beta = np.asarray(scenario.beta)
    y = X @ beta + math.sqrt(scenario.noise_variance) * e
    bad = slice(scenario.n_good, n)
    rule = scenario.outlier_rule
    if isinstance(rule, InterceptShift):
        y[bad] = rule.delta + X[bad] @ beta + math.sqrt(rule.noise_variance) * e[bad]
    elif isinstance(rule, Nonlinear):
        if rule.tag != "quad":
            raise ValueError(f"unknown nonlinear rule {rule.tag!r}")
        x1, x2 = X[bad, 0], X[bad, 1]
        y[bad] = 2 * x1 - 2 * x2 + 3 * x1**2 + math.sqrt(rule.noise_variance) * e[bad]
    return RegressionData(X, y), SubsetIndex(np.arange(scenario.n_good), n)


SCREEN_N = 50
SCREEN_RHO = 0.05
SCREEN_SUPPORT = (0, 1, 2)


def gen_screening(p: int, stream, n: int = SCREEN_N, rho: float = SCREEN_RHO,
                  signal: float = 3.0):
    """Raw (unstandardised) screening data: beta_1 = beta_2 = beta_3 = signal, rest 0."""
    from .regress import RegressionData

    if p < 3:
        raise ValueError("screening design needs p >= 3")
    rng = stream.generator() if isinstance(stream, RngStream) else stream
    X = draw_design(rng, n, p, Equicorrelation(rho))
    y = signal * X[:, :3].sum(axis=1) + rng.standard_normal(n)
    return RegressionData(X, y)


# structured-text (JSON) round trip for scenario descriptors

_TYPES = {cls.__name__: cls for cls in (
    PointMass, NormalOutliers, Equicorrelation, InterceptShift, Nonlinear,
    ContaminationScenario, RegressionScenario)}


def _encode(obj):
    if isinstance(obj, LocationModel):
        return {"type": "LocationModel", "family": obj.family.name, "df": obj.df,
                "scale": obj.scale}
    if type(obj).__name__ in _TYPES:
        out = {"type": type(obj).__name__}
        for k in obj.__dataclass_fields__:
            out[k] = _encode(getattr(obj, k))
        return out
    if isinstance(obj, tuple):
        return [_encode(v) for v in obj]
    return obj


def _decode(obj):
    if isinstance(obj, list):
        return tuple(_decode(v) for v in obj)
    if not isinstance(obj, dict):
        return obj
    kind = obj.get("type")
    fields = {k: _decode(v) for k, v in obj.items() if k != "type"}
    if kind == "LocationModel":
        from .dist import Family
        return LocationModel(Family[fields["family"]], fields["df"], fields["scale"])
    if kind in _TYPES:
        return _TYPES[kind](**fields)
    return fields


def scenario_to_json(scenario) -> str:
    return json.dumps(_encode(scenario), sort_keys=True)


def scenario_from_json(text: str):
    return _decode(json.loads(text))


__all__ = [
    "ContaminationScenario", "Equicorrelation", "InterceptShift", "Nonlinear",
    "NormalOutliers", "PointMass", "RegressionScenario", "draw_design",
    "gen_location", "gen_regression", "gen_screening", "location_case", "lts_case",
    "scenario_from_json", "scenario_to_json",
]
