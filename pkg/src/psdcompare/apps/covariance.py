"""Sample covariance estimation: the four-moment sample size and sparse random vectors."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import rng as _rng
from ..compare import BoundReport, make_report
from ..gaussmodel import GOE, Diagonal, GaussianModel, Scalar
from ..matcore import SymMatrix, ValidationError


@dataclass(frozen=True)
class CovarianceProblem:
    """Target accuracy ``λ_min(K̂_n) > 1 - epsilon`` with probability ``1 - delta``.

    Supply ``beta`` (fourth-to-second moment ratio of linear marginals) for the
    general theorem, or ``zeta`` and ``C`` for sparse vectors.
    """

    d: int
    epsilon: float
    delta: float
    beta: Optional[float] = None
    zeta: Optional[float] = None
    C: Optional[float] = None

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValidationError("d must be a positive integer")
        if not 0 < self.epsilon <= 1:
            raise ValidationError("epsilon must lie in (0, 1]")
        if not 0 < self.delta < 1:
            raise ValidationError("delta must lie in (0, 1)")
        if self.beta is not None and self.beta < 1:
            raise ValidationError("beta must be at least 1")
        if self.zeta is not None and not 0 < self.zeta <= self.d:
            raise ValidationError("zeta must lie in (0, d]")
        if self.C is not None and self.C < 1:
            raise ValidationError("the fourth moment C of a standardized variable is at least 1")

    @property
    def sparse(self) -> bool:
        return self.zeta is not None


@dataclass(frozen=True)
class ScovPlan:
    n: int
    norm_bound: float  # ||X|| scale sqrt(12 β² d) from the bounded-variance lemma
    sigma_star2_ub: float  # β²


def norm_bound(beta: float, d: int) -> float:
    return math.sqrt(12.0 * beta * beta * d)


def scov_sample_size(p: CovarianceProblem) -> ScovPlan:
    """``n = ceil(24 β² max(d, log(2d/δ)) / ε²)``."""
    if p.beta is None:
        raise ValidationError("four-moment sample size needs beta")
    raw = 24.0 * p.beta ** 2 * max(p.d, math.log(2 * p.d / p.delta)) / p.epsilon ** 2
    return ScovPlan(_ceil(raw), norm_bound(p.beta, p.d), p.beta ** 2)


def _ceil(x: float) -> int:
    # guard against values like 57007.000000000004 produced by rounding
    r = round(x)
    return int(r) if abs(x - r) <= 1e-9 * max(1.0, abs(x)) else math.ceil(x)


def _sparse_params(p: CovarianceProblem) -> tuple[float, float]:
    if p.zeta is None or p.C is None:
        raise ValidationError("sparse covariance needs zeta and C")
    return float(p.zeta), float(p.C)


def sparse_cov_sample_size(p: CovarianceProblem) -> int:
    """``n = ceil(25 d max(1, 2 C log(2d/δ) / ζ) / ε²)``."""
    zeta, c = _sparse_params(p)
    raw = 25.0 * p.d * max(1.0, 2.0 * c * math.log(2 * p.d / p.delta) / zeta) / p.epsilon ** 2
    return _ceil(raw)


def sparse_cov_regime(p: CovarianceProblem) -> str:
    """``"linear"`` when the max in the sample size is 1, else ``"log"``."""
    zeta, c = _sparse_params(p)
    return "linear" if 2.0 * c * math.log(2 * p.d / p.delta) / zeta <= 1.0 else "log"


def sparse_cov_component(d: int, zeta: float, c: float) -> GaussianModel:
    """Centered Gaussian with variance ``2||M||_F^2 + (Tr M)^2 + (Cd/ζ) sum_i m_ii^2``."""
    return GaussianModel(d, "real", None, (GOE(1.0), Scalar(1.0), Diagonal(math.sqrt(c * d / zeta))))


def sparse_cov_model(d: int, zeta: float, c: float, n: int) -> GaussianModel:
    """Comparison model ``I + n^{-1/2} (G_goe + gamma I + sqrt(Cd/ζ) D)`` for ``K̂_n``."""
    comp = sparse_cov_component(d, zeta, c).scaled(1.0 / math.sqrt(n))
    return GaussianModel(d, "real", SymMatrix.identity(d), comp.components)


def sparse_cov_elmin_lb(d: int, zeta: float, c: float, n: int) -> float:
    return 1.0 - 2.0 * math.sqrt(d / n) - math.sqrt(2.0 * c * d * math.log(d) / (zeta * n))


def sparse_cov_sigma_star2_ub(d: int, zeta: float, c: float, n: int) -> float:
    return (3.0 + c * d / zeta) / n


@dataclass(frozen=True)
class SparseCovResult:
    required_n: int
    n: int
    report: BoundReport
    model: GaussianModel


def sparse_cov_report(p: CovarianceProblem, n: Optional[int] = None) -> SparseCovResult:
    """Required sample size and the analytic comparison bound at ``n`` samples."""
    zeta, c = _sparse_params(p)
    req = sparse_cov_sample_size(p)
    n = req if n is None else int(n)
    if n < 1:
        raise ValidationError("sample count must be positive")
    rep = make_report("sparse-cov", sparse_cov_elmin_lb(p.d, zeta, c, n),
                      sparse_cov_sigma_star2_ub(p.d, zeta, c, n), 2 * p.d)
    return SparseCovResult(req, n, rep, sparse_cov_model(p.d, zeta, c, n))


def mom(m, zeta: float, c: float) -> float:
    """Exact ``E (w^T M w)^2`` for the sparse vector ``w``."""
    m = SymMatrix.of(m).entries.real
    d = m.shape[0]
    diag = np.diag(m)
    off = 2.0 * (np.sum(m ** 2) - np.sum(diag ** 2)) + (diag.sum() ** 2 - np.sum(diag ** 2))
    return float(off + c * d / zeta * np.sum(diag ** 2))


# -- samplers


def two_point(c: float) -> tuple[float, float, float]:
    """Standardized two-point law with fourth moment ``c``: returns (q, a, -b).

    The variable equals ``a`` with probability ``q`` and ``-b`` otherwise, and
    ``E psi^4 = 1/(q(1-q)) - 3``.
    """
    if c < 1:
        raise ValidationError("fourth moment must be at least 1")
    q = 0.5 * (1.0 - math.sqrt(1.0 - 4.0 / (c + 3.0)))
    return q, math.sqrt((1 - q) / q), -math.sqrt(q / (1 - q))


def sample_sparse_vectors(g: np.random.Generator, count: int, d: int, zeta: float,
                          c: float = 1.0) -> np.ndarray:
    """``count`` draws of ``w = sqrt(d/ζ) (xi_i psi_i)``; ``c = 1`` gives Rademacher ``psi``."""
    xi = _rng.uniform_open(g, (count, d)) < zeta / d
    u = _rng.uniform_open(g, (count, d))
    if c == 1.0:
        psi = np.where(u < 0.5, 1.0, -1.0)
    else:
        q, a, mb = two_point(c)
        psi = np.where(u < q, a, mb)
    return math.sqrt(d / zeta) * xi * psi


def sample_covariance(g: np.random.Generator, count: int, d: int, zeta: float, c: float,
                      n: int) -> np.ndarray:
    """``count`` draws of ``K̂_n = (1/n) sum_j w_j w_j^T``."""
    out = np.empty((count, d, d))
    for t in range(count):
        w = sample_sparse_vectors(g, n, d, zeta, c)
        out[t] = w.T @ w / n
    return out
