"""Acceptance criteria 1-9, each at its stated tolerance.

Every criterion prints one PASS/FAIL line (also collected in the terminal
summary).  Criterion 9 reruns 1-8 with several worker threads and compares
the results bit for bit.
"""
import itertools
import json
import math
import time

import numpy as np
import pytest

from bettersol import tables
from bettersol.dist import LocationModel, RngStream, sample
from bettersol.harness import McConfig, bsp_audit, run_mc
from bettersol.location import UnivariateSample
from bettersol.regress import RegressionData, lts_fit, lts_row_objective, trimmed_rss
from bettersol.subsample import (OutlierLaw, SubsetIndex, ks_objective,
                                 likelihood_separation_check, profile_nll_objective)

pytestmark = pytest.mark.slow

SEED = 7
THREADS_ALT = 4
_FINGERPRINTS = {}


def _fingerprint(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=float)


def _cells(art, keep=lambda c: True):
    return [c for c in art.cells if c.verdict and keep(c)]


def _cell_summary(cells):
    bad = [f"{c.row} | {c.column}: {c.value:.4g} vs {c.reference:.4g}" for c in cells
           if c.verdict != "PASS"]
    head = f"{len(cells) - len(bad)}/{len(cells)} cells in tolerance"
    return head + ("" if not bad else "; out: " + "; ".join(bad))


def _check_summary(checks):
    bad = [f"{k.name} ({k.detail})" for k in checks if not k.passed]
    head = f"{len(checks) - len(bad)}/{len(checks)} checks"
    return head + ("" if not bad else "; failed: " + "; ".join(bad))


def _art_print(art):
    return [[c.row, c.column, c.value, c.mc_se] for c in art.cells]


# each criterion: threads -> (passed, detail, fingerprint payload)

def criterion1(threads):
    art, _ = tables.table1(SEED, 10_000, 1.0, threads)
    cells = _cells(art)
    ok = all(c.verdict == "PASS" for c in cells) and all(k.passed for k in art.checks)
    return ok, f"{_cell_summary(cells)}; Cauchy ordering {_check_summary(art.checks)}", _art_print(art)


def criterion2(threads):
    art, _ = tables.table2(SEED, 10_000, 1.0, threads)
    named = _cells(art, lambda c: c.row.startswith("(I) ") and c.column.startswith("n_o=5 "))
    others = _cells(art, lambda c: c not in named)
    ok = all(c.verdict == "PASS" for c in named) and all(k.passed for k in art.checks)
    detail = (f"case (I) n_o=5: {_cell_summary(named)}; direction {_check_summary(art.checks)}"
              f"; other cells (not graded): {sum(c.verdict == 'PASS' for c in others)}/{len(others)}")
    return ok, detail, _art_print(art)


def criterion3(threads):
    art, _ = tables.table3(SEED, 10_000, 1.0, threads)
    named = _cells(art, lambda c: c.column.startswith("(I) "))
    order = [k for k in art.checks if k.name.startswith("(I) ")]
    extra = [k for k in art.checks if k not in order]
    ok = all(c.verdict == "PASS" for c in named) and all(k.passed for k in order)
    detail = (f"case (I): {_cell_summary(named)}; decreasing {_check_summary(order)}"
              f"; case (II) (not graded): {_check_summary(extra)}")
    return ok, detail, _art_print(art)


def criterion4(threads):
    art, _ = tables.table4(SEED, 1000, 1.0, threads, tables.TABLE4_DESK_P)
    cells = _cells(art)
    ok = all(c.verdict == "PASS" for c in cells) and all(k.passed for k in art.checks)
    return ok, f"{_cell_summary(cells)}; {_check_summary(art.checks)}", _art_print(art)


def criterion5(threads):
    worst_identity, worst_beaten, count = 0.0, 0.0, 0
    for i in range(50):
        rng = RngStream(SEED, i, "lts-oracle").generator()
        n = int(rng.integers(5, 13))
        m = int(rng.integers(3, n))  # p + 1 <= m <= n - 1 with p = 2
        X = rng.standard_normal((n, 2))
        y = X @ rng.standard_normal(2) + rng.standard_t(2, n)
        data = RegressionData(X, y)
        fit = lts_fit(data, m, exhaustive=True)
        worst_identity = max(worst_identity,
                             abs(trimmed_rss(data, fit.coefficients, m) - fit.rss_on_subset))
        for rows in itertools.combinations(range(n), m):
            _, coef = lts_row_objective(data, np.array(rows))
            worst_beaten = max(worst_beaten, fit.rss_on_subset - trimmed_rss(data, coef, m))
        count += 1
    ok = worst_identity <= 1e-9 and worst_beaten <= 1e-9
    detail = (f"{count} instances; max |trimmed_rss - psi| = {worst_identity:.2e}; "
              f"max improvement by any subset fit = {max(worst_beaten, 0.0):.2e}")
    return ok, detail, [worst_identity, worst_beaten]


def criterion6(threads):
    model = LocationModel.normal()
    x = UnivariateSample(sample(model, 0.0, RngStream(SEED, 0, "separation-limit"), 20_000))
    good = SubsetIndex(np.arange(10_000), 20_000)
    psi, _ = profile_nll_objective(model, good, x)
    per_point = psi / 10_000
    ks, _ = ks_objective(model, good, x)
    narrow = likelihood_separation_check(OutlierLaw(1.0, 0.25), 0.5, 0.5)
    wide = likelihood_separation_check(OutlierLaw(1.0, 3.0), 0.5, 0.5)
    a = abs(per_point - 1.418939) <= 0.02
    b = (not narrow.separation_holds) and wide.separation_holds
    c = ks <= 0.03
    detail = (f"(a) psi/m = {per_point:.5f} vs 1.418939 {'ok' if a else 'off'}; "
              f"(b) var 0.25 holds={narrow.separation_holds}, var 3 holds={wide.separation_holds}; "
              f"(c) d_K = {ks:.4f}")
    return a and b and c, detail, [per_point, ks, narrow.margin, wide.margin]


def _audit_config(threads):
    return McConfig("subsample", {"case": "I", "n": 20, "n_outlier": 5, "m": 10},
                    10_000, SEED, (), 1.0, threads)


def criterion7(threads):
    cfg = _audit_config(threads)
    dk = bsp_audit(cfg, "dK", budgets=(10, 100))
    lk = bsp_audit(cfg, "likelihood", budgets=(10, 100))
    ok = dk.lower_bound >= 0.0 and lk.gap < 0.0
    # the same audit with the estimate-ball predicate, for the record
    ball = lambda sol, good: bool(abs(sol.theta_hat) <= 0.25)  # noqa: E731
    dk_b = bsp_audit(cfg, "dK", ball, (10, 100))
    lk_b = bsp_audit(cfg, "likelihood", ball, (10, 100))
    detail = (f"subset-in-good predicate: d_K gap {dk.gap:+.4f} (95% lower {dk.lower_bound:+.4f}), "
              f"likelihood gap {lk.gap:+.4f} (needs < 0); "
              f"|theta-hat| <= 0.25 predicate (not graded): d_K {dk_b.gap:+.4f} "
              f"(lower {dk_b.lower_bound:+.4f}), likelihood {lk_b.gap:+.4f}")
    return ok, detail, [dk.to_dict(), lk.to_dict(), dk_b.gap, lk_b.gap]


def criterion8(threads):
    rep = run_mc(McConfig("bic", {"p": 8, "d": 3, "n": 2000, "signal": 3.0},
                          200, SEED, (), 1.0, threads))
    rate = rep.methods["separation"].coverage
    lam = math.log(2000)
    from scipy import stats
    theory = (1 - stats.chi2.sf(lam / (1 + lam / 2000), 1)) ** 5
    detail = (f"P(psi(A0) < all others) = {rate:.3f} over 200 reps (needs >= 0.99); "
              f"independent-null approximation {theory:.3f}")
    return rate >= 0.99, detail, [rate, rep.methods["bic"].coverage]


CRITERIA = {1: criterion1, 2: criterion2, 3: criterion3, 4: criterion4,
            5: criterion5, 6: criterion6, 7: criterion7, 8: criterion8}


def _run(k, acceptance):
    t0 = time.perf_counter()
    ok, detail, payload = CRITERIA[k](1)
    _FINGERPRINTS[k] = _fingerprint(payload)
    detail = f"{detail} [{time.perf_counter() - t0:.0f}s]"
    acceptance[k] = (ok, detail)
    print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, acceptance):
    _run(k, acceptance)


def test_criterion_9_determinism(acceptance):
    mismatched = []
    for k, func in CRITERIA.items():
        if k not in _FINGERPRINTS:
            _FINGERPRINTS[k] = _fingerprint(func(1)[2])
        if _fingerprint(func(THREADS_ALT)[2]) != _FINGERPRINTS[k]:
            mismatched.append(k)
    ok = not mismatched
    detail = (f"criteria 1-8 rerun with {THREADS_ALT} threads: "
              + ("bit-identical" if ok else f"differences in {mismatched}"))
    acceptance[9] = (ok, detail)
    print(f"\nCRITERION 9: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail
