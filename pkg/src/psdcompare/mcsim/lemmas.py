"""Exact and Monte Carlo checks of the scalar lemmas behind the comparison proofs."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import poisson

from .. import rng as _rng
from ..matcore import SymMatrix, ValidationError, is_psd
from .verify import SIGMAS, GridRow, VerificationReport, stat_row

# ---------------------------------------------------------------------------
# weight distributions


@dataclass(frozen=True, eq=False)
class WeightDistribution:
    """Nonnegative weight law: finitely many atoms (exact) or a sampler (MC)."""

    name: str
    atoms: Optional[np.ndarray] = None
    probs: Optional[np.ndarray] = None
    sampler: Optional[Callable[[np.random.Generator, int], np.ndarray]] = None

    def __post_init__(self):
        if self.atoms is not None:
            a = np.asarray(self.atoms, dtype=float)
            p = np.asarray(self.probs, dtype=float)
            if a.shape != p.shape or np.any(a < 0) or np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
                raise ValidationError("atoms must be nonnegative with probabilities summing to 1")
            object.__setattr__(self, "atoms", a)
            object.__setattr__(self, "probs", p)
        elif self.sampler is None:
            raise ValidationError("need atoms or a sampler")

    @property
    def exact(self) -> bool:
        return self.atoms is not None


def bernoulli(p: float) -> WeightDistribution:
    return WeightDistribution(f"bernoulli({p})", np.array([0.0, 1.0]), np.array([1 - p, p]))


def two_point(a: float, b: float, q: float) -> WeightDistribution:
    """Value ``a`` with probability ``q`` and ``b`` otherwise."""
    return WeightDistribution(f"two-point({a},{b},{q})", np.array([a, b]), np.array([q, 1 - q]))


def point_mass(c: float) -> WeightDistribution:
    return WeightDistribution(f"point({c})", np.array([float(c)]), np.array([1.0]))


def uniform01() -> WeightDistribution:
    return WeightDistribution("uniform[0,1]", sampler=lambda g, n: _rng.uniform_open(g, n))


def exponential(rate: float = 1.0) -> WeightDistribution:
    return WeightDistribution(f"exponential({rate})",
                              sampler=lambda g, n: -np.log(_rng.uniform_open(g, n)) / rate)


# ---------------------------------------------------------------------------
# completely monotone covariance bound


def covcm_check(dist: WeightDistribution, thetas: Sequence[float], bs: Sequence[float] = (0.0,),
                trials: int = 10 ** 5, seed: int = 0) -> VerificationReport:
    """``Cov(W, f'(W)) <= E W^2 * E f''(W)`` for ``f(w) = exp(b - θ w)``.

    Discrete laws are enumerated exactly (zero slack); sampled laws use the
    three-sigma rule with delta-method standard errors.
    """
    rows = []
    if not dist.exact:
        w = dist.sampler(_rng.stream(seed, 0xCC), trials)
    for th in thetas:
        for b in bs:
            if dist.exact:
                a, p = dist.atoms, dist.probs
                e = np.exp(b - th * a)
                f1, f2 = -th * e, th * th * e
                ew = p @ a
                lhs = p @ (a * f1) - ew * (p @ f1)
                rhs = (p @ a ** 2) * (p @ f2)
                rows.append(GridRow(th, lhs, 0.0, rhs, 0.0, rhs, bool(lhs <= rhs)))
                continue
            e = np.exp(b - th * w)
            f1, f2 = -th * e, th * th * e
            wc, fc = w - w.mean(), f1 - f1.mean()
            lhs = float(np.mean(wc * fc))
            m2, mf = float(np.mean(w * w)), float(np.mean(f2))
            rhs = m2 * mf
            n = w.size
            se_l = float(np.std(wc * fc, ddof=1) / math.sqrt(n))
            se_r = float(np.std((w * w - m2) * mf + m2 * (f2 - mf), ddof=1) / math.sqrt(n))
            rows.append(stat_row(th, lhs, se_l, rhs, se_r))
    slack = "exact" if dist.exact else f"{SIGMAS:g}-sigma one-sided"
    grid = ",".join(f"{b:g}" for b in bs)
    return VerificationReport(dist.name, "covcm", tuple(rows), slack, seed,
                              0 if dist.exact else trials, f"b_grid={grid}")


# ---------------------------------------------------------------------------
# Poissonization


ENUM_BUDGET = 256
TRUNCATION = 1e-12


def _trace_exp(mats: np.ndarray, theta: float) -> np.ndarray:
    return np.sum(np.exp(-theta * np.linalg.eigvalsh(mats)), axis=-1)


def poisson_cutoff(lam: float, n: int, tol: float = TRUNCATION) -> int:
    """Smallest ``K`` with ``1 - P{Q <= K}^n < tol`` for ``Q ~ Poisson(lam)``."""
    k = 0
    while 1.0 - poisson.cdf(k, lam) ** n >= tol:
        k += 1
    return k


@dataclass(frozen=True)
class PoissonizationTerms:
    lhs: float
    rhs: float
    residual_bound: float  # maximum mass the truncation may have dropped from rhs


def poissonization_terms(a_list, k: int, theta: float, tol: float = TRUNCATION) -> PoissonizationTerms:
    """Exact multinomial side and truncated Poisson side of the Poissonization lemma."""
    a = np.array([SymMatrix.of(x).entries for x in a_list])
    n = a.shape[0]
    if n ** k > ENUM_BUDGET:
        raise ValidationError(f"enumeration budget exceeded: n^k = {n ** k} > {ENUM_BUDGET}")
    for x in a:
        if not is_psd(x):
            raise ValidationError("Poissonization needs psd matrices")
    center = (k / n) * a.sum(axis=0)
    # multinomial: k placements, each uniform over the n matrices
    place = np.array(list(itertools.product(range(n), repeat=k)))
    counts = np.zeros((place.shape[0], n))
    for j in range(k):
        counts[np.arange(place.shape[0]), place[:, j]] += 1
    lhs = float(np.mean(_trace_exp(np.einsum("ti,ijk->tjk", counts, a) - center, theta)))
    lam = k / n
    cut = poisson_cutoff(lam, n, tol)
    pmf = poisson.pmf(np.arange(cut + 1), lam)
    grid = np.array(list(itertools.product(range(cut + 1), repeat=n)), dtype=float)
    w = np.prod(pmf[grid.astype(int)], axis=1)
    vals = _trace_exp(np.einsum("ti,ijk->tjk", grid, a) - center, theta)
    rhs = float(w @ vals)
    fmax = float(_trace_exp(-center[None], theta)[0])  # the integrand is largest at zero counts
    return PoissonizationTerms(lhs, rhs, fmax * (1.0 - float(w.sum())))


def poissonization_check(a_list, k: int, thetas: Sequence[float],
                         tol: float = TRUNCATION) -> VerificationReport:
    """Pass iff the exact multinomial side is at most twice the truncated Poisson side."""
    rows = []
    for th in thetas:
        t = poissonization_terms(a_list, k, th, tol)
        rows.append(GridRow(th, t.lhs, 0.0, t.rhs, 0.0, 2.0 * t.rhs, bool(t.lhs <= 2.0 * t.rhs)))
    return VerificationReport(f"poissonization(n={len(a_list)},k={k})", "poissonization",
                              tuple(rows), "exact (factor 2)", 0, 0, f"truncation={tol:g}")


def random_psd_list(n: int, d: int, seed: int) -> list:
    out = []
    for i in range(n):
        b = _rng.stream(seed, 0xB0, i).standard_normal((d, d))
        out.append(SymMatrix(b @ b.T / d))
    return out


# ---------------------------------------------------------------------------
# scalar mgf


def bernoulli_mgf_check(p: float, n: int, thetas: Sequence[float]) -> VerificationReport:
    """``(1 - p + p e^{-θ})^n <= exp(-θ n p + θ² n p / 2)`` at each grid point."""
    rows = []
    for th in thetas:
        lhs = (1 - p + p * math.exp(-th)) ** n
        rhs = math.exp(-th * n * p + 0.5 * th * th * n * p)
        rows.append(GridRow(th, lhs, 0.0, rhs, 0.0, rhs, bool(lhs <= rhs)))
    return VerificationReport(f"bernoulli-mgf(p={p},n={n})", "scalar-mgf", tuple(rows), "exact")


def discrete_mgf_check(atoms, probs, n: int, thetas: Sequence[float]) -> VerificationReport:
    """Same check for ``n`` iid copies of a finite nonnegative law."""
    a, p = np.asarray(atoms, float), np.asarray(probs, float)
    m1, m2 = float(p @ a), float(p @ a ** 2)
    rows = []
    for th in thetas:
        lhs = float(p @ np.exp(-th * a)) ** n
        rhs = math.exp(-th * n * m1 + 0.5 * th * th * n * m2)
        rows.append(GridRow(th, lhs, 0.0, rhs, 0.0, rhs, bool(lhs <= rhs * (1 + 1e-12))))
    return VerificationReport("discrete-mgf", "scalar-mgf", tuple(rows), "exact")
