import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from psdcompare import gaussmodel as gm
from psdcompare.gaussmodel import (GOE, GUE, CompressedDiagonal, Diagonal, GaussianModel, GeneralSeries,
                                   RankOneSeries, Scalar)
from psdcompare.matcore import SymMatrix, ValidationError, random_orthonormal, random_symmetric
from psdcompare.rng import stream


def fro2(m):
    return float(np.sum(np.abs(np.asarray(m)) ** 2))


def draws(model, count, seed=0):
    return gm.sample_batch(model, seed, 0, count)


def test_shift_only_sample_is_exact():
    delta = SymMatrix.diag([1.0, -2.0, 3.0])
    assert gm.sample(GaussianModel(3, "real", delta), 5) == delta


def test_sampling_is_deterministic():
    m = GaussianModel(4, "real", None, (GOE(1.0), Scalar(0.5)))
    assert gm.sample(m, 42) == gm.sample(m, 42)
    assert not gm.sample(m, 42) == gm.sample(m, 43)


def test_field_validation():
    with pytest.raises(ValidationError):
        GaussianModel(3, "complex", None, (GOE(1.0),))
    with pytest.raises(ValidationError):
        GaussianModel(3, "real", None, (GUE(1.0),))
    with pytest.raises(ValidationError):
        GaussianModel(3, "real", None, (RankOneSeries([1.0], np.ones((1, 2))),))
    with pytest.raises(ValidationError):
        RankOneSeries([-1.0], np.ones((1, 2)))


def test_goe_entry_variances_d50():
    m = GaussianModel(50, "real", None, (GOE(1.0),))
    x = np.array([gm.sample(m, s).entries for s in range(2000)])
    diag = np.einsum("tii->ti", x).ravel()
    off = x[:, np.triu_indices(50, 1)[0], np.triu_indices(50, 1)[1]].ravel()
    for vals, target in ((diag, 2.0), (off, 1.0)):
        sq = vals ** 2
        se = sq.std(ddof=1) / math.sqrt(sq.size)
        assert abs(sq.mean() - target) <= 3 * se


def test_diagonal_structure():
    m = GaussianModel(3, "real", None, (Diagonal(1.0),))
    for s in range(20):
        e = gm.sample(m, s).entries
        assert np.all(e[~np.eye(3, dtype=bool)] == 0)


def test_var_eval_examples():
    g = np.random.default_rng(0)
    mr = random_symmetric(4, g)
    mc = random_symmetric(4, g, "complex")
    assert np.isclose(gm.var_eval(GaussianModel(4, "real", None, (Scalar(1.0),)), mr), np.trace(mr.entries) ** 2)
    assert np.isclose(gm.var_eval(GaussianModel(4, "complex", None, (GUE(1.0),)), mc), fro2(mc.entries))
    assert np.isclose(gm.var_eval(GaussianModel(2, "real", None, (GOE(1.0),)), SymMatrix.diag([1, 0])), 2.0)
    with pytest.raises(ValidationError):
        gm.var_eval(GaussianModel(2, "real", None, (GOE(1.0),)), SymMatrix.identity(3))


def test_stats_examples():
    s = gm.stats(GaussianModel(4, "real", None, (GOE(1.0),)))
    assert (s.sigma2, s.sigma_star2, s.sigma_star2_is_exact) == (5.0, 2.0, True)
    s = gm.stats(GaussianModel(7, "complex", None, (GUE(1.0),)))
    assert np.isclose(s.sigma2, 7) and s.sigma_star2 == 1.0
    s = gm.stats(GaussianModel(8, "real", None, (Diagonal(1.0),)))
    assert np.isclose(s.khinchin, math.sqrt(2 * math.log(8)))
    assert np.isclose(s.khinchin, 2.039, atol=1e-3)


def test_weak_var_estimator_recovers_closed_forms():
    assert np.isclose(gm.estimate_weak_var(GOE(1.0).series(4)), 2.0, rtol=1e-6)
    assert np.isclose(gm.estimate_weak_var(GUE(1.0).series(3)), 1.0, rtol=1e-6)
    s = Scalar(1.0).series(3)
    assert np.isclose(gm.estimate_weak_var(s), 1.0, rtol=1e-6)


def test_weak_var_estimator_dominates_random_directions():
    g = np.random.default_rng(5)
    h = np.array([random_symmetric(4, g).entries for _ in range(6)])
    est = gm.estimate_weak_var(h)
    u = g.standard_normal((2000, 4))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    vals = np.sum(np.einsum("tj,ijk,tk->ti", u, h, u) ** 2, axis=1)
    assert est >= vals.max() - 1e-9
    assert est <= np.linalg.eigvalsh(np.einsum("ijk,ikl->jl", h, h))[-1] + 1e-9


def test_commuting_weak_var_for_diagonal_coefficients():
    c = 0.7
    h = np.array([math.sqrt(c) * np.diag(np.eye(3)[i]) for i in range(3)])
    assert np.isclose(gm.commuting_weak_var(h), c)
    assert gm.commuting_weak_var(GOE(1.0).series(3)) is None


def test_congruence_identity_keeps_law():
    g = np.random.default_rng(1)
    m = GaussianModel(3, "real", SymMatrix.diag([1, 2, 3]), (GOE(1.0), Diagonal(0.5), Scalar(2.0)))
    k = gm.model_congruence(m, np.eye(3))
    assert k.shift == m.shift
    for _ in range(20):
        x = random_symmetric(3, g)
        assert np.isclose(gm.var_eval(k, x), gm.var_eval(m, x))


def test_congruence_goe_tall_isometry():
    q = random_orthonormal(5, 2, np.random.default_rng(2))
    k = gm.model_congruence(GaussianModel(5, "real", None, (GOE(1.0),)), q)
    assert k.dim == 2 and isinstance(k.components[0], GOE)
    x = random_symmetric(2, np.random.default_rng(3))
    assert np.isclose(gm.var_eval(k, x), 2 * fro2(x.entries))


def test_congruence_diagonal_coordinates_bruteforce():
    k = np.eye(3)[:, :2]
    m = gm.model_congruence(GaussianModel(3, "real", None, (Diagonal(1.0),)), k)
    assert isinstance(m.components[0], CompressedDiagonal)
    x = np.array([[1.5, 0.7], [0.7, -2.0]])
    z = draws(m, 10 ** 5, 9)
    ip = np.einsum("jk,tjk->t", x, z)
    assert np.isclose(gm.var_eval(m, x), 1.5 ** 2 + 2.0 ** 2)
    se = (ip ** 2).std(ddof=1) / math.sqrt(ip.size)
    assert abs(np.mean(ip ** 2) - gm.var_eval(m, x)) <= 4 * se


def test_congruence_refuses_non_isometry_unless_expanded():
    m = GaussianModel(3, "real", None, (GOE(1.0),))
    k = np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 2.0]])
    with pytest.raises(ValidationError):
        gm.model_congruence(m, k)
    e = gm.model_congruence(m, k, expand=True)
    x = random_symmetric(2, np.random.default_rng(4))
    # Var[<X, K^T Z K>] = Var[<K X K^T, Z>]
    assert np.isclose(gm.var_eval(e, x), 2 * fro2(k @ x.entries @ k.T))


def test_mc_expected_lmin_examples():
    m = GaussianModel(2, "real", SymMatrix.diag([1, 2]))
    assert gm.mc_expected_lmin(m, 100) == (1.0, 0.0)
    est, se = gm.mc_expected_lmin(GaussianModel(3, "real", None, (Scalar(1.0),)), 4000, 3)
    assert abs(est) <= 3 * se
    with pytest.raises(ValidationError):
        gm.mc_expected_lmin(m, 1)


def test_mc_is_independent_of_worker_count(monkeypatch):
    m = GaussianModel(4, "real", None, (GOE(1.0),))
    monkeypatch.setenv("PSDC_THREADS", "1")
    a = gm.lmin_samples(m, 3000, 7)
    monkeypatch.setenv("PSDC_THREADS", "3")
    b = gm.lmin_samples(m, 3000, 7)
    assert np.array_equal(a, b)


def test_add_independent_examples():
    a = GaussianModel(3, "real", SymMatrix.identity(3), (GOE(1.0),))
    z = GaussianModel.zero(3)
    s = gm.add_independent(a, z)
    x = random_symmetric(3, np.random.default_rng(6))
    assert s.shift == a.shift and np.isclose(gm.var_eval(s, x), gm.var_eval(a, x))
    b = gm.add_independent(GaussianModel(3, "real", None, (GOE(1.0),)),
                           GaussianModel(3, "real", None, (Scalar(1.0),)))
    assert np.isclose(gm.var_eval(b, x), 2 * fro2(x.entries) + np.trace(x.entries) ** 2)
    with pytest.raises(ValidationError):
        gm.add_independent(a, GaussianModel.zero(2))


def _random_model(g, d):
    pool = [lambda: GOE(g.uniform(0.1, 2)), lambda: Scalar(g.uniform(0.1, 2)),
            lambda: Diagonal(g.uniform(0.1, 2)),
            lambda: RankOneSeries(g.uniform(0, 1, 3), g.standard_normal((3, d))),
            lambda: GeneralSeries(np.array([random_symmetric(d, g).entries for _ in range(2)])),
            lambda: CompressedDiagonal(g.standard_normal((5, d)), g.uniform(0.1, 1))]
    picks = g.choice(len(pool), size=int(g.integers(1, 3)), replace=False)
    return GaussianModel(d, "real", None, tuple(pool[i]() for i in picks))


def test_sigma2_subadditive():
    g = np.random.default_rng(8)
    for _ in range(10):
        a, b = _random_model(g, 4), _random_model(g, 4)
        s = gm.stats(gm.add_independent(a, b), restarts=4).sigma2
        assert s <= gm.stats(a, restarts=4).sigma2 + gm.stats(b, restarts=4).sigma2 + 1e-9


COMPONENTS = [
    ("scalar", "real", lambda d, g: Scalar(1.3)),
    ("diagonal", "real", lambda d, g: Diagonal(0.8)),
    ("goe", "real", lambda d, g: GOE(1.1)),
    ("gue", "complex", lambda d, g: GUE(0.9)),
    ("rankone", "real", lambda d, g: RankOneSeries(g.uniform(0, 2, 5), g.standard_normal((5, d)))),
    ("general", "complex", lambda d, g: GeneralSeries(np.array([random_symmetric(d, g, "complex").entries
                                                                 for _ in range(3)]))),
    ("compressed", "real", lambda d, g: CompressedDiagonal(random_orthonormal(9, d, g).entries, 0.7)),
]


@pytest.mark.parametrize("name,field,make", COMPONENTS, ids=[c[0] for c in COMPONENTS])
def test_variance_function_matches_samples(name, field, make):
    d = 3
    g = np.random.default_rng(11)
    model = GaussianModel(d, field, None, (make(d, g),))
    z = draws(model, 10 ** 5, 13)
    for _ in range(20):
        x = random_symmetric(d, g, field).entries
        ip = np.real(np.einsum("jk,tjk->t", x.conj(), z))
        sq = ip ** 2
        se = sq.std(ddof=1) / math.sqrt(sq.size)
        assert abs(sq.mean() - gm.var_eval(model, x)) <= 4 * se


@pytest.mark.parametrize("model", [
    GaussianModel(6, "real", None, (GOE(1.0),)),
    GaussianModel(5, "complex", None, (GUE(1.0),)),
    GaussianModel(8, "real", None, (Diagonal(1.0),)),
], ids=["goe", "gue", "diagonal"])
def test_khinchin_sandwich(model):
    s = gm.stats(model)
    lmax = np.linalg.eigvalsh(draws(model, 20000, 17))[:, -1]
    est, se = lmax.mean(), lmax.std(ddof=1) / math.sqrt(lmax.size)
    assert est >= math.sqrt(2 * s.sigma2 / math.pi) - 3 * se
    assert est <= math.sqrt(2 * s.sigma2 * math.log(2 * model.dim)) + 3 * se


def test_monotonicity_under_added_variance():
    a = GaussianModel(4, "real", None, (GOE(0.5),))
    b = gm.add_independent(a, GaussianModel(4, "real", None, (Diagonal(0.7),)))
    za, zb = draws(a, 40000, 21), gm.sample_batch(b, 22, 0, 40000)
    for f in (lambda z: np.linalg.eigvalsh(z)[:, -1],
              lambda z: np.sum(np.exp(-np.linalg.eigvalsh(z)), axis=1)):
        fa, fb = f(za), f(zb)
        se = math.hypot(fa.std(ddof=1), fb.std(ddof=1)) / math.sqrt(40000)
        assert fa.mean() <= fb.mean() + 3 * se


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.sampled_from(["goe", "gue", "scalar", "diagonal", "orth-rankone"]),
       st.floats(0.1, 3.0))
def test_weak_variance_ordering(d, kind, c):
    if kind == "goe":
        model = GaussianModel(d, "real", None, (GOE(c),))
    elif kind == "gue":
        model = GaussianModel(d, "complex", None, (GUE(c),))
    elif kind == "scalar":
        model = GaussianModel(d, "real", None, (Scalar(c),))
    elif kind == "diagonal":
        model = GaussianModel(d, "real", None, (Diagonal(c),))
    else:
        w = np.linspace(0.2, 1.0, d) * c
        model = GaussianModel(d, "real", None, (RankOneSeries(w, np.eye(d)),))
    s = gm.stats(model)
    assert s.sigma_star2_is_exact
    assert s.sigma_star2 <= s.sigma2 + 1e-12 <= d * s.sigma_star2 + 2e-12


def test_gaussian_concentration_mgf():
    model = GaussianModel(10, "real", None, (GOE(1.0),))
    lam = gm.lmin_samples(model, 50000, 31)
    x = lam - lam.mean()
    for th in (-1.0, -0.5, 0.5, 1.0):
        v = np.exp(th * x)
        se = v.std(ddof=1) / math.sqrt(v.size)
        assert v.mean() <= math.exp(th * th * 2.0 / 2) + 4 * se


def test_goe_orthogonal_invariance():
    d = 4
    model = GaussianModel(d, "real", None, (GOE(1.0),))
    q = random_orthonormal(d, d, np.random.default_rng(3)).entries
    z = draws(model, 50000, 41)
    r = np.einsum("ji,tjk,kl->til", q, z, q)
    for a, b in ((z ** 2, r ** 2),):
        se = np.hypot(a.std(axis=0, ddof=1), b.std(axis=0, ddof=1)) / math.sqrt(a.shape[0])
        assert np.all(np.abs(a.mean(axis=0) - b.mean(axis=0)) <= 4 * se)


def test_equal_variance_functions_give_equal_moments():
    d = 3
    a = GaussianModel(d, "complex", None, (GUE(1.0),))
    b = GaussianModel(d, "complex", None, (GeneralSeries(GUE(1.0).series(d)),))
    g = np.random.default_rng(2)
    for _ in range(10):
        x = random_symmetric(d, g, "complex")
        assert np.isclose(gm.var_eval(a, x), gm.var_eval(b, x))
    za, zb = draws(a, 40000, 51), gm.sample_batch(b, 52, 0, 40000)
    ma, mb = np.abs(za) ** 2, np.abs(zb) ** 2
    se = np.hypot(ma.std(axis=0, ddof=1), mb.std(axis=0, ddof=1)) / math.sqrt(40000)
    assert np.all(np.abs(ma.mean(axis=0) - mb.mean(axis=0)) <= 4 * se + 1e-12)


def test_scaled_model():
    m = GaussianModel(3, "real", SymMatrix.identity(3), (GOE(1.0), Scalar(1.0)))
    s = m.scaled(2.0)
    x = random_symmetric(3, np.random.default_rng(0))
    assert np.isclose(gm.var_eval(s, x), 4 * gm.var_eval(m, x))
    assert np.allclose(s.shift.entries, 2 * np.eye(3))
