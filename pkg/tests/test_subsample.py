import itertools
import math

import numpy as np
import pytest
from scipy import special

from bettersol.dist import LocationModel, RngStream, sample
from bettersol.location import UnivariateSample
from bettersol.subsample import (KolmogorovDistance, ObjectiveKind, OutlierLaw,
                                 ProfileNLL, SubsetIndex, S_NORMAL_SELF,
                                 best_within, draw_subsets, evaluate_draws,
                                 exhaustive_subset_search, kl_risk, ks_distance,
                                 ks_objective, likelihood_separation_check,
                                 profile_nll_objective, random_subset_search,
                                 subsample_mle)

NORMAL = LocationModel.normal()
CAUCHY = LocationModel.cauchy()
HALF_MINUS_PHI = 0.5 - special.ndtr(-1.0)  # 0.341345


def _brute_ks(v, model, thetas):
    from bettersol.dist import cdf
    v = np.sort(v)
    m = v.size
    best = np.inf
    for t in thetas:
        F = cdf(model, t, v)
        best = min(best, max(np.max(np.arange(1, m + 1) / m - F), np.max(F - np.arange(m) / m)))
    return best


class TestSubsetIndex:
    def test_validation(self):
        with pytest.raises(ValueError):
            SubsetIndex([0, 5], 5)
        with pytest.raises(ValueError):
            SubsetIndex([2, 1], 5)
        with pytest.raises(ValueError):
            SubsetIndex([1, 1], 5)
        s = SubsetIndex.of([3, 1, 3], 5)
        assert s.as_tuple() == (1, 3) and len(s) == 2
        assert s.issubset(SubsetIndex.full(5))
        assert not SubsetIndex.full(5).issubset(s)


class TestProfileNll:
    def test_normal_closed_form(self):
        psi, theta = profile_nll_objective(NORMAL, SubsetIndex([0, 1], 2), [0.0, 2.0])
        assert theta == pytest.approx(1.0)
        assert psi == pytest.approx(math.log(2 * math.pi) + 1.0, abs=1e-12)

    def test_constant_subset(self):
        psi, theta = profile_nll_objective(NORMAL, SubsetIndex.full(4), [1.5] * 4)
        assert theta == pytest.approx(1.5)
        assert psi == pytest.approx(2 * math.log(2 * math.pi), abs=1e-12)

    def test_cauchy_symmetric_pair(self):
        psi, theta = profile_nll_objective(CAUCHY, SubsetIndex.full(2), [-1.0, 1.0])
        assert psi == pytest.approx(2 * math.log(2 * math.pi), abs=1e-9)
        # the optimum is quartic-flat at 0, so theta is only loosely pinned
        assert abs(theta) < 5e-3

    @pytest.mark.parametrize("model", [LocationModel.student_t(5), CAUCHY], ids=["t5", "cauchy"])
    def test_heavy_tail_matches_dense_scan(self, model):
        from bettersol.location import neg_log_lik
        rng = np.random.default_rng(7)
        for _ in range(10):
            v = rng.standard_cauchy(8) * 3
            psi, theta = profile_nll_objective(model, SubsetIndex.full(8), v)
            grid = np.linspace(v.min() - 5, v.max() + 5, 20001)
            dense = min(neg_log_lik(model, t, v) for t in grid)
            assert psi <= dense + 1e-9
            assert psi == pytest.approx(neg_log_lik(model, theta, v), abs=1e-9)

    def test_empty_and_mismatch(self):
        with pytest.raises(ValueError):
            profile_nll_objective(NORMAL, [], [1.0, 2.0])
        with pytest.raises(ValueError):
            profile_nll_objective(NORMAL, SubsetIndex([0], 3), [1.0, 2.0])


class TestKolmogorov:
    def test_single_point(self):
        assert ks_distance([0.0], NORMAL, 0.0) == pytest.approx(0.5)
        d, theta = ks_objective(CAUCHY, SubsetIndex.full(1), [4.2])
        assert d == pytest.approx(0.5, abs=1e-9)
        assert theta == pytest.approx(4.2, abs=1e-6)

    def test_symmetric_pair(self):
        assert ks_distance([-1.0, 1.0], NORMAL, 0.0) == pytest.approx(HALF_MINUS_PHI, abs=1e-12)
        for method in ("bisect", "grid"):
            d, theta = ks_objective(NORMAL, SubsetIndex.full(2), [-1.0, 1.0], method=method)
            assert d == pytest.approx(HALF_MINUS_PHI, abs=1e-6)
            assert theta == pytest.approx(0.0, abs=1e-5)
        brute = _brute_ks(np.array([-1.0, 1.0]), NORMAL, np.linspace(-1, 1, 100001))
        assert brute == pytest.approx(HALF_MINUS_PHI, abs=1e-6)

    def test_large_sample_distance_small(self):
        x = sample(NORMAL, 0.0, RngStream(9, 0, "gc"), 10**4)
        assert ks_distance(np.sort(x), NORMAL, 0.0) <= 0.02
        x = sample(NORMAL, 0.0, RngStream(9, 1, "ks"), 200)
        d, _ = ks_objective(NORMAL, SubsetIndex.full(200), x)
        assert d <= 0.10

    @pytest.mark.parametrize("model", [NORMAL, LocationModel.student_t(5), CAUCHY],
                             ids=["normal", "t5", "cauchy"])
    def test_bisection_agrees_with_grid_and_brute_force(self, model):
        rng = np.random.default_rng(11)
        for _ in range(5):
            v = np.sort(rng.standard_normal(10) + rng.integers(0, 2, 10) * 2)
            d_b, t_b = ks_objective(model, SubsetIndex.full(10), v)
            d_g, _ = ks_objective(model, SubsetIndex.full(10), v, method="grid")
            brute = _brute_ks(v, model, np.linspace(t_b - 0.05, t_b + 0.05, 2001))
            assert d_b == pytest.approx(d_g, abs=1e-6)
            assert d_b <= brute + 1e-9
            assert 0.0 <= d_b <= 1.0

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            ks_objective(NORMAL, SubsetIndex.full(2), [0.0, 1.0], method="newton")


class TestSearch:
    def test_draws_are_prefix_stable(self):
        small = draw_subsets(20, 10, 10, RngStream(1, 0, "p").generator())
        large = draw_subsets(20, 10, 100, RngStream(1, 0, "p").generator())
        assert np.array_equal(small, large[:10])

    def test_draws_valid(self):
        S = draw_subsets(9, 4, 500, RngStream(2).generator())
        assert np.all(np.diff(S, axis=1) > 0) and S.min() >= 0 and S.max() < 9
        with pytest.raises(ValueError):
            draw_subsets(3, 4, 1, RngStream(2))
        with pytest.raises(ValueError):
            draw_subsets(3, 2, 0, RngStream(2))

    def test_budget_one_and_full(self):
        x = UnivariateSample(np.arange(6.0))
        obj = ProfileNLL(NORMAL, x)
        sol = random_subset_search(obj, 6, 3, 1, RngStream(3).generator())
        first = draw_subsets(6, 3, 1, RngStream(3).generator())[0]
        assert sol.subset.as_tuple() == tuple(first)
        full = random_subset_search(obj, 6, 6, 5, RngStream(3).generator())
        assert full.subset.as_tuple() == tuple(range(6))
        assert full.objective_kind is ObjectiveKind.PROFILE_NLL

    def test_exhaustive_examples(self):
        x = UnivariateSample([0.0, 0.1, -0.1, 50.0])
        assert exhaustive_subset_search(ProfileNLL(NORMAL, x), 4, 3).subset.as_tuple() == (0, 1, 2)
        assert exhaustive_subset_search(ProfileNLL(NORMAL, x), 4, 4).subset.as_tuple() == (0, 1, 2, 3)

    def test_exhaustive_kolmogorov_prefers_spread(self):
        # Against a unit-scale Normal, a cluster of width 0.2 is a poor fit:
        # its best distance is 1 - Phi(0.1), while a subset holding the far
        # point reaches 1/3 (one third of the mass sits where F is ~0 or ~1).
        x = UnivariateSample([0.0, 0.1, -0.1, 50.0])
        obj = KolmogorovDistance(NORMAL, x)
        cluster, _ = obj(SubsetIndex([0, 1, 2], 4))
        assert cluster == pytest.approx(special.ndtr(-0.1), abs=1e-9)
        sol = exhaustive_subset_search(obj, 4, 3)
        assert sol.objective == pytest.approx(1.0 / 3.0, abs=1e-9)
        assert sol.subset.as_tuple() == (0, 1, 3)  # lexicographically first of the ties

    def test_exhaustive_unique_subset(self):
        x = UnivariateSample([3.0, 1.0, 2.0])
        assert exhaustive_subset_search(ProfileNLL(NORMAL, x), 3, 3).subset.as_tuple() == (0, 1, 2)

    def test_exhaustive_matches_enumeration_and_ties_lexicographic(self):
        x = UnivariateSample([1.0, 1.0, 1.0, 5.0, 9.0])
        obj = ProfileNLL(NORMAL, x)
        sol = exhaustive_subset_search(obj, 5, 2, chunk=3)
        assert sol.subset.as_tuple() == (0, 1)
        rng = np.random.default_rng(5)
        x = UnivariateSample(rng.standard_cauchy(8))
        obj = KolmogorovDistance(NORMAL, x)
        sol = exhaustive_subset_search(obj, 8, 4, chunk=7)
        vals = [obj(SubsetIndex(np.array(c), 8))[0] for c in itertools.combinations(range(8), 4)]
        assert sol.objective == pytest.approx(min(vals), abs=1e-12)

    def test_random_search_finds_exhaustive_optimum(self):
        x = UnivariateSample(np.random.default_rng(6).standard_normal(8))
        obj = KolmogorovDistance(NORMAL, x)
        best = exhaustive_subset_search(obj, 8, 4).objective
        hits = sum(abs(random_subset_search(obj, 8, 4, 10**4, RngStream(s).generator()).objective - best) <= 1e-12
                   for s in range(20))
        assert hits == 20

    def test_best_within_prefix_monotone(self):
        x = UnivariateSample(np.random.default_rng(8).standard_normal(20))
        obj = ProfileNLL(NORMAL, x)
        S = draw_subsets(20, 10, 100, RngStream(4).generator())
        values, thetas = evaluate_draws(obj, S)
        objs = [best_within(obj, S, values, thetas, B).objective for B in (1, 10, 50, 100)]
        assert objs == sorted(objs, reverse=True)
        sol = best_within(obj, S, values, thetas, 100)
        assert sol.objective == pytest.approx(obj(sol.subset)[0], abs=1e-9)

    def test_subsample_mle(self):
        x = UnivariateSample([0.0, 2.0, 100.0])
        assert subsample_mle(NORMAL, SubsetIndex([0, 1], 3), x) == pytest.approx(1.0)


class TestSeparation:
    def test_kl_risk_normal(self):
        assert kl_risk(NORMAL, 0.0, 0.0) == pytest.approx(1.418939, abs=1e-6)
        assert kl_risk(NORMAL, 1.0, 0.0) == pytest.approx(1.918939, abs=1e-6)
        assert S_NORMAL_SELF == pytest.approx(1.418939, abs=1e-6)

    @pytest.mark.parametrize("model", [NORMAL, LocationModel.student_t(5), CAUCHY],
                             ids=["normal", "t5", "cauchy"])
    def test_kl_risk_minimised_at_truth(self, model):
        base = kl_risk(model, 0.0, 0.0)
        for t in (-2.0, -0.3, 0.1, 1.5):
            assert kl_risk(model, t, 0.0) > base

    def test_normal_outlier_criterion(self):
        narrow = likelihood_separation_check(OutlierLaw(1.0, 0.25), 0.5, 0.5)
        wide = likelihood_separation_check(OutlierLaw(1.0, 3.0), 0.5, 0.5)
        point = likelihood_separation_check(OutlierLaw(1.0, 0.0), 0.5, 0.5)
        assert not narrow.separation_holds and narrow.margin == pytest.approx(-0.75)
        assert wide.separation_holds and wide.margin == pytest.approx(2.0)
        assert not point.separation_holds
        # at epsilon = tau = 1/2 the infimum gap is half the variance excess
        assert wide.infimum_gap == pytest.approx(1.0, abs=1e-6)
        assert narrow.infimum_gap == pytest.approx(-0.375, abs=1e-6)

    def test_general_alpha(self):
        d = likelihood_separation_check(OutlierLaw(3.0, 1.0), 0.2, 0.6)
        assert d.alpha_max == pytest.approx(0.5)
        assert math.isfinite(d.margin) and d.separation_holds == (d.margin > 0)

    def test_validation(self):
        with pytest.raises(ValueError):
            likelihood_separation_check(OutlierLaw(1.0, 1.0), 0.6, 0.5)
        with pytest.raises(ValueError):
            likelihood_separation_check(OutlierLaw(1.0, 1.0), 0.3, 0.8)
        with pytest.raises(ValueError):
            likelihood_separation_check(OutlierLaw(1.0, -1.0), 0.5, 0.5)
