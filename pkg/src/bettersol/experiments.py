"""One-replication simulation bodies used by the Monte Carlo harness.

Each experiment maps ``(params, stream)`` to ``{method: Record}``.  Methods of
one experiment share the replication's data and random subsets, and smaller
search budgets reuse the leading draws of the largest one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import LocationModel, RngStream, sample
from .location import (UnivariateSample, better_of, estimate, median,
                       trimmed_mean)
from .regress import (bic_table, better_screen, lar_screen, sis_screen,
                      LtsObjective)
from .scenario import (SCREEN_SUPPORT, Equicorrelation, RegressionScenario,
                       gen_location, gen_regression, gen_screening,
                       location_case, lts_case)
from .subsample import (KolmogorovDistance, ProfileNLL, best_within,
                        draw_subsets, evaluate_draws, subsample_mle)
from .dist import LOG_SQRT_2PI

GOOD_RADIUS = 0.25


@dataclass
class Record:
    sq_error: float = math.nan
    objective: float = math.nan
    good: float = math.nan
    failed: bool = False


def location_methods(params):
    return ("median", "trimmed", "better")


def location_rep(params, stream: RngStream):
    """Median, trimmed mean and the greater-likelihood choice between them."""
    model = LocationModel.from_name(params.get("family", "normal"))
    theta0 = float(params.get("theta0", 0.0))
    radius = float(params.get("good_radius", GOOD_RADIUS))
    x = UnivariateSample(sample(model, theta0, stream.generator(), int(params["n"])))
    med = estimate(model, x, median(x), "median")
    trim = estimate(model, x, trimmed_mean(x, float(params.get("keep_fraction", 0.5)),
                                       params.get("trim_rounding", "floor")), "trimmed")
    best = better_of([med, trim], model, x)
    out = {}
    for name, est in (("median", med), ("trimmed", trim), ("better", best)):
        err = est.value - theta0
        out[name] = Record(err * err, est.neg_log_lik, float(abs(err) <= radius))
    return out


def _budgets(params):
    return tuple(sorted(int(b) for b in params.get("budgets", (10, 100))))


def subsample_methods(params):
    return tuple(f"{obj}_B{B}" for obj in ("likelihood", "dK") for B in _budgets(params))


def _subsample_data(params, stream):
    scen = location_case(params.get("case", "I"), int(params.get("n", 20)),
                         int(params.get("n_outlier", 5)),
                         float(params.get("case3_variance", 9.0)))
    rng = stream.generator()
    x, good = gen_location(scen, rng)
    return scen, x, good, rng


def likelihood_mov(psi: float, m: int, scale: float = 1.0, kind: str = "variance") -> float:
    """Reported objective for the Normal likelihood search.

    ``"variance"`` maps the profile NLL to the subsample variance
    ``sum (x - mean)^2 / (m - 1)``, an increasing affine function of it.
    ``"nll"`` reports the profile NLL itself.
    """
    if kind == "nll":
        return psi
    ss = 2.0 * scale * scale * (psi - m * (math.log(scale) + LOG_SQRT_2PI))
    return ss / (m - 1)


def subsample_rep(params, stream: RngStream):
    """Random subset search with both objectives over shared draws."""
    scen, x, good, rng = _subsample_data(params, stream)
    model = scen.good_model
    m = int(params.get("m", 10))
    budgets = _budgets(params)
    subsets = draw_subsets(scen.n, m, budgets[-1], rng)
    goodset = set(good.as_tuple())
    out = {}
    for name, objective in (("likelihood", ProfileNLL(model, x)),
                            ("dK", KolmogorovDistance(model, x))):
        values, thetas = evaluate_draws(objective, subsets)
        for B in budgets:
            sol = best_within(objective, subsets, values, thetas, B)
            est = subsample_mle(model, sol.subset, x)
            if name == "likelihood":
                mov = likelihood_mov(sol.objective, m, model.scale,
                                     params.get("likelihood_mov", "variance"))
            else:
                mov = sol.objective
            err = est - scen.theta0
            out[f"{name}_B{B}"] = Record(err * err, mov,
                                         float(set(sol.subset.as_tuple()) <= goodset))
    return out


def lts_methods(params):
    return tuple(f"B{B}" for B in _budgets({"budgets": params.get("budgets", (100, 200, 300))}))


def lts_rep(params, stream: RngStream):
    scen = lts_case(params.get("case", "I"), int(params.get("n", 20)),
                    int(params.get("n_good", 15)),
                    float(params.get("case2_noise_variance", 9.0)))
    rng = stream.generator()
    data, good = gen_regression(scen, rng)
    m = int(params.get("m", 11))
    budgets = _budgets({"budgets": params.get("budgets", (100, 200, 300))})
    objective = LtsObjective(data)
    subsets = draw_subsets(data.n, m, budgets[-1], rng)
    values, coefs = evaluate_draws(objective, subsets)
    beta = np.asarray(scen.beta)
    goodset = set(good.as_tuple())
    out = {}
    for B in budgets:
        sol = best_within(objective, subsets, values, coefs, B)
        d = np.asarray(sol.theta_hat) - beta
        out[f"B{B}"] = Record(float(d @ d), sol.objective,
                              float(set(sol.subset.as_tuple()) <= goodset))
    return out


def screening_methods(params):
    return ("LAR", "SIS", "better")


def screening_rep(params, stream: RngStream):
    p = int(params["p"])
    M = int(params.get("M", 25))
    data = gen_screening(p, stream.generator(), int(params.get("n", 50)),
                         float(params.get("rho", 0.05))).standardize()
    lar = lar_screen(data, M)
    sis = sis_screen(data, M)
    best = better_screen(data, M, [lar, sis])
    out = {}
    for name, res in (("LAR", lar), ("SIS", sis), ("better", best)):
        out[name] = Record(math.nan, res.rss, float(res.selected.covers(SCREEN_SUPPORT)))
    return out


def bic_methods(params):
    return ("bic", "separation")


def bic_rep(params, stream: RngStream):
    """BIC over every subset; ``separation`` is good when the true support is the strict minimiser."""
    p = int(params.get("p", 8))
    d = int(params.get("d", 3))
    n = int(params.get("n", 2000))
    signal = float(params.get("signal", 3.0))
    beta = tuple([signal] * d + [0.0] * (p - d))
    scen = RegressionScenario(n, n, beta, Equicorrelation(float(params.get("rho", 0.0))))
    data, _ = gen_regression(scen, stream.generator())
    data = data.standardize()
    subsets, values = bic_table(data)
    truth = tuple(range(d))
    k_true = subsets.index(truth)
    others = np.delete(values, k_true)
    k = int(np.argmin(values))
    return {
        "bic": Record(math.nan, float(values[k]), float(subsets[k] == truth)),
        "separation": Record(math.nan, float(values[k_true]), float(values[k_true] < others.min())),
    }


def paired_search(experiment: str, params, stream: RngStream, objective: str, budgets):
    """Best solutions within the small and large budget over one shared draw sequence.

    Returns ``(eta, xi, good)``; xi searches a superset of eta's draws, so
    its objective is never larger.
    """
    b_small, b_large = budgets
    if experiment == "subsample":
        scen, x, good, rng = _subsample_data(params, stream)
        handles = {"likelihood": ProfileNLL, "dK": KolmogorovDistance}
        if objective not in handles:
            raise ValueError(f"objective {objective!r} does not apply to {experiment}")
        obj = handles[objective](scen.good_model, x)
        n, m = scen.n, int(params.get("m", 10))
    elif experiment == "lts":
        scen = lts_case(params.get("case", "I"), int(params.get("n", 20)),
                        int(params.get("n_good", 15)),
                        float(params.get("case2_noise_variance", 9.0)))
        rng = stream.generator()
        data, good = gen_regression(scen, rng)
        if objective != "lts":
            raise ValueError(f"objective {objective!r} does not apply to {experiment}")
        obj = LtsObjective(data)
        n, m = data.n, int(params.get("m", 11))
    else:
        raise ValueError(f"no subset search in experiment {experiment!r}")
    subsets = draw_subsets(n, m, b_large, rng)
    values, thetas = evaluate_draws(obj, subsets)
    eta = best_within(obj, subsets, values, thetas, b_small)
    xi = best_within(obj, subsets, values, thetas, b_large)
    return eta, xi, good


EXPERIMENTS = {
    "location": (location_rep, location_methods),
    "subsample": (subsample_rep, subsample_methods),
    "lts": (lts_rep, lts_methods),
    "screening": (screening_rep, screening_methods),
    "bic": (bic_rep, bic_methods),
}
