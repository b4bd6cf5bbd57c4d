import math
import os

import numpy as np
import pytest
from scipy.linalg import expm

from psdcompare import mcsim
from psdcompare.matcore import SymMatrix, ValidationError
from psdcompare.mcsim import lemmas, scenarios, verify


def test_wishart_draws_are_psd():
    sc = scenarios.wishart(4, 6)
    y = sc.draw(0, 0, 50)
    assert y.shape == (50, 4, 4)
    assert np.all(np.linalg.eigvalsh(y)[:, 0] > -1e-10)


def test_bernoulli_p1_is_deterministic():
    sc = scenarios.bernoulli_weighted(d=3, n=5, p=1.0)
    y = sc.draw(0, 0, 4)
    assert np.allclose(y - y[0], 0)
    assert np.allclose(y[0], sc.mean.entries)


def test_scalar_sum_mean():
    sc = scenarios.scalar_sum(20, 0.3)
    y = sc.draw(2, 0, 20000)[:, 0, 0]
    assert abs(y.mean() - 6) <= 4 * math.sqrt(20 * 0.3 * 0.7 / 20000)


def test_scenario_means_match_samples():
    for name, make in scenarios.builtin_scenarios().items():
        sc = make(np.eye(8)[:, :3] / 1.0, 12, 3.0) if name == "sketch-gram" else make()
        y = sc.draw(9, 0, 4000)
        se = y.std(axis=0, ddof=1) / math.sqrt(4000)
        assert np.all(np.abs(y.mean(axis=0) - sc.mean.entries) <= 5 * se + 1e-12), name


def test_trace_mgf_theta_zero_gives_dimension():
    sc = scenarios.bernoulli_weighted(d=4)
    row = verify.verify_trace_mgf(sc, [0.0], trials=200).rows[0]
    assert row.lhs == pytest.approx(4) and row.rhs == pytest.approx(4)
    iid = scenarios.wishart(3, 5)
    row = verify.verify_trace_mgf(iid, [0.0], trials=200).rows[0]
    assert row.rhs == pytest.approx(6) and row.passed


def test_trace_mgf_passes_on_builtins():
    for sc in (scenarios.bernoulli_weighted(), scenarios.wishart(3, 10), scenarios.sparse_cov(4, 20, 2.0, 1.0)):
        rep = verify.verify_trace_mgf(sc, [0.25, 0.5, 1.0], trials=4000, seed=1)
        assert rep.passed, rep.table()


def test_poly_moment_large_shift_trivial():
    sc = scenarios.bernoulli_weighted(d=3).with_shift(1e3 * np.eye(3))
    rep = verify.verify_poly_moment(sc, [4, 6], trials=500)
    assert all(r.lhs == 0 and r.rhs == 0 and r.passed for r in rep.rows)


def test_poly_moment_rejects_low_order():
    with pytest.raises(ValidationError):
        verify.verify_poly_moment(scenarios.wishart(), [3], trials=10)


def test_poly_moment_zero_shift_nontrivial():
    sc = scenarios.bernoulli_weighted().with_shift(np.zeros((5, 5)))
    rep = verify.verify_poly_moment(sc, [4, 5], trials=4000)
    assert rep.passed and all(r.rhs > 0 for r in rep.rows)


def test_tail_t0_trivial():
    rep = verify.verify_tail(scenarios.wishart(3, 10), [0.0], trials=500)
    assert rep.rows[0].rhs == 1.0 and rep.passed


def test_tail_bound_formula():
    sc = scenarios.design2_mub(16.0)
    rep = verify.verify_tail(sc, [8.0], trials=2000, elmin=sc.elmin_lb)
    assert rep.rows[0].rhs == pytest.approx(2 * math.exp(-2))
    assert rep.passed


def test_covcm_bernoulli_closed_form():
    rep = lemmas.covcm_check(lemmas.bernoulli(0.5), [1.0], [0.0])
    row = rep.rows[0]
    e = math.exp(-1)
    # Cov(W, -e^{-W}) for a fair coin: E[W f] - E W E f
    lhs = 0.5 * (-e) - 0.5 * (0.5 * (-1) + 0.5 * (-e))
    assert row.lhs == pytest.approx(lhs, rel=1e-14)
    assert row.rhs == pytest.approx(0.5 * (1 + e) / 2, rel=1e-14)
    assert row.passed and row.lhs_se == 0


def test_covcm_point_mass_and_sampled_laws():
    assert lemmas.covcm_check(lemmas.point_mass(2.0), [0.5, 1.0]).rows[0].lhs == pytest.approx(0, abs=1e-15)
    for dist in (lemmas.exponential(), lemmas.uniform01(), lemmas.two_point(0.2, 3.0, 0.7)):
        assert lemmas.covcm_check(dist, [0.5, 1, 2], [0.0, 1.0], trials=20000).passed


def test_poissonization_e11_e22():
    a = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    t = lemmas.poissonization_terms(a, 2, 1.0)
    # multinomial side by hand: counts (2,0),(1,1),(1,1),(0,2), center = I
    e = math.exp
    lhs = 0.25 * 2 * (e(-1) + e(1)) + 0.5 * 2
    assert t.lhs == pytest.approx(lhs, rel=1e-14)
    # Poisson side factorizes: 2 E e^{-(Q-1)}, Q ~ Poisson(1)
    rhs = 2 * e(1) * e(e(-1) - 1)
    assert t.rhs == pytest.approx(rhs, rel=1e-11)
    assert t.lhs <= 2 * t.rhs


def test_poissonization_theta_zero():
    t = lemmas.poissonization_terms(lemmas.random_psd_list(3, 2, 5), 2, 0.0)
    assert t.lhs == pytest.approx(2) and t.rhs == pytest.approx(2, rel=1e-11)


def test_poissonization_random_and_truncation_stability():
    a = lemmas.random_psd_list(3, 2, 5)
    assert lemmas.poissonization_check(a, 2, [0.5, 1, 2]).passed
    for th in (0.5, 1.0, 2.0):
        r12 = lemmas.poissonization_terms(a, 2, th, 1e-12).rhs
        r14 = lemmas.poissonization_terms(a, 2, th, 1e-14).rhs
        assert abs(r12 - r14) < 1e-10 * abs(r14)


def test_poissonization_budget():
    with pytest.raises(ValidationError):
        lemmas.poissonization_terms(lemmas.random_psd_list(4, 2, 0), 5, 1.0)
    with pytest.raises(ValidationError):
        lemmas.poissonization_terms([np.diag([1.0, -1.0]), np.eye(2)], 2, 1.0)


def test_trace_exp_matches_expm():
    g = np.random.default_rng(0)
    for _ in range(20):
        a = g.standard_normal((5, 5))
        m = 0.5 * (a + a.T)
        th = g.uniform(0.1, 2.0)
        want = np.trace(expm(-th * m))
        got = math.exp(verify.log_trace_exp(np.linalg.eigvalsh(m), th))
        assert abs(got - want) <= 1e-9 * want


def test_scalar_mgf_checks():
    assert lemmas.bernoulli_mgf_check(0.3, 20, np.linspace(0, 3, 13)).passed
    assert lemmas.discrete_mgf_check([0, 1, 2.5], [0.2, 0.5, 0.3], 10, [0.1, 1.0, 2.0]).passed


def test_determinism_across_worker_counts(monkeypatch):
    sc = scenarios.bernoulli_weighted()
    out = []
    for w in ("1", "3"):
        monkeypatch.setenv("PSDC_THREADS", w)
        rep = verify.verify_trace_mgf(sc, [0.5, 1.0], trials=3000, seed=4)
        tail = verify.verify_tail(sc, [0.5, 1.0], trials=3000, seed=4)
        out.append((rep.table(), tail.table()))
    assert out[0] == out[1]


@pytest.mark.slow
def test_repeatability_over_master_seeds():
    sc = scenarios.bernoulli_weighted()
    passes = sum(verify.verify_trace_mgf(sc, [0.5, 1.0, 2.0], trials=2000, seed=s).passed
                 for s in range(50))
    assert passes >= 49


def test_figure_const_step():
    schema, rows = mcsim.emit_figure_data("sum1d", n=5, weight="const", trials=100, grid=[4.5, 4.99, 5.0, 6.0])
    assert schema == ["x", "ecdf", "gauss_cdf", "tail_bound"]
    assert [r["ecdf"] for r in rows] == [0.0, 0.0, 1.0, 1.0]


def test_figure_chi2_ecdf_at_mean():
    # the sum is exactly chi-square(20); its skew puts the CDF at the mean near 0.542, not 0.5
    from scipy.stats import chi2
    _, rows = mcsim.emit_figure_data("sum1d", n=20, weight="chi2", trials=20000, grid=[20.0])
    exact = chi2.cdf(20.0, 20)
    assert abs(rows[0]["ecdf"] - exact) <= 4 * math.sqrt(exact * (1 - exact) / 20000)
    assert abs(exact - 0.5) > 0.02
    assert rows[0]["gauss_cdf"] == pytest.approx(0.5)


def test_figure_sum2x2_min_dominates():
    schema, rows = mcsim.emit_figure_data("sum2x2", n=10, weight="exponential", trials=5000)
    for r in rows:
        assert r["ecdf_min"] >= max(r["ecdf_coord1"], r["ecdf_coord2"])
    with pytest.raises(ValidationError):
        mcsim.emit_figure_data("sum3d")
