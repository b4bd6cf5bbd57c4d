"""Random psd sums paired with their Gaussian comparison models."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .. import rng as _rng
from ..apps import covariance as cov
from ..apps import designs
from ..apps.wishart import sample_wishart
from ..compare import MomentSpec, weighted_model, weighted_sigma_star2
from ..gaussmodel import GOE, CompressedDiagonal, GaussianModel, RankOneSeries, Scalar
from ..matcore import PSD_RTOL, SymMatrix, ValidationError

Sampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True, eq=False)
class Scenario:
    """A psd random matrix ``Y`` and a centered Gaussian ``Z`` to compare it with.

    ``sampler(g, count)`` returns ``count`` draws of ``Y`` stacked along axis 0.
    ``mean`` is the exact ``E Y``; ``shift`` is the Δ used by the checks and
    defaults to ``mean``.  ``factor`` is 1 for weighted sums and 2 for iid sums.
    """

    name: str
    sampler: Sampler
    model: GaussianModel
    mean: SymMatrix
    sigma_star2: float
    factor: int = 1
    shift: Optional[SymMatrix] = None
    elmin_lb: Optional[float] = None  # analytic lower bound on E λ_min(Z + mean), if known

    def __post_init__(self):
        if self.factor not in (1, 2):
            raise ValidationError("factor must be 1 (weighted) or 2 (iid)")
        if self.model.dim != self.mean.dim:
            raise ValidationError("model and mean dimensions differ")
        if np.any(self.model.shift.entries != 0):
            raise ValidationError("scenario model must be centered")
        if self.shift is None:
            object.__setattr__(self, "shift", self.mean)

    @property
    def d(self) -> int:
        return self.mean.dim

    @property
    def dim_factor(self) -> int:
        return self.factor * self.d

    def with_shift(self, shift) -> "Scenario":
        return replace(self, shift=SymMatrix.of(shift), elmin_lb=None)

    def draw(self, seed: int, block: int, count: int) -> np.ndarray:
        y = self.sampler(_rng.stream(seed, 0x59, block), count)
        ev = np.linalg.eigvalsh(y)
        scale = np.maximum(np.max(np.abs(ev), axis=1), 1e-300)
        if np.any(ev[:, 0] < -PSD_RTOL * scale - 1e-12):
            raise ValidationError(f"scenario {self.name!r} produced a non-psd draw")
        return y


def _rank_or_general(spec: MomentSpec) -> GaussianModel:
    return weighted_model(spec).centered()


def bernoulli_weighted(d: int = 5, n: int = 20, p: float = 0.4, seed: int = 11,
                       matrices=None) -> Scenario:
    """``Y = sum_i xi_i A_i`` with ``xi_i ~ Bernoulli(p)``.

    Without explicit ``matrices`` the ``A_i`` are random unit-trace psd
    matrices ``B B^T / Tr(B B^T)`` keyed by ``seed``.
    """
    if matrices is None:
        mats = []
        for i in range(n):
            b = _rng.stream(seed, 0xA1, i).standard_normal((d, d))
            a = b @ b.T
            mats.append(a / np.trace(a))
        a = np.array(mats)
    else:
        a = np.array([SymMatrix.of(m).entries for m in matrices])
        n, d = a.shape[0], a.shape[1]
    spec = MomentSpec.bernoulli(p, tuple(SymMatrix(x) for x in a))
    s2, _ = weighted_sigma_star2(spec)
    mean = SymMatrix(p * a.sum(axis=0))

    def sampler(g, count):
        xi = (_rng.uniform_open(g, (count, n)) < p).astype(float)
        return np.einsum("ti,ijk->tjk", xi, a)

    return Scenario(f"bernoulli-weighted(d={d},n={n},p={p})", sampler, _rank_or_general(spec), mean, s2, 1)


def wishart(d: int = 3, n: int = 10) -> Scenario:
    """``Y = sum_{i<=n} g_i g_i^T`` compared with ``sqrt(n) (gamma I + G_goe)``."""
    rn = math.sqrt(n)
    model = GaussianModel(d, "real", None, (Scalar(rn), GOE(rn)))
    return Scenario(f"wishart(d={d},n={n})", lambda g, c: sample_wishart(g, c, d, n), model,
                    SymMatrix(n * np.eye(d)), 3.0 * n, 2, elmin_lb=n - 2.0 * math.sqrt(d * n))


def sparse_cov(d: int = 10, n: int = 50, zeta: float = 3.0, c: float = 1.0) -> Scenario:
    """Unnormalized sparse-vector Gram ``sum_{j<=n} w_j w_j^T``."""
    comp = cov.sparse_cov_component(d, zeta, c).scaled(math.sqrt(n))

    def sampler(g, count):
        w = cov.sample_sparse_vectors(g, count * n, d, zeta, c).reshape(count, n, d)
        return np.einsum("tij,tik->tjk", w, w)

    return Scenario(f"sparse-cov(d={d},n={n},zeta={zeta},C={c})", sampler, comp,
                    SymMatrix(n * np.eye(d)), (3.0 + c * d / zeta) * n, 2)


def sketch_gram(q, k: int, zeta: float) -> Scenario:
    """``(ΦQ)^T (ΦQ)`` for the sparse sign sketch ``Φ`` (dense draws; keep ``n`` small)."""
    q = np.asarray(q, dtype=float)
    nrow, d = q.shape
    p = zeta / k
    rk = 1.0 / math.sqrt(k)
    model = GaussianModel(d, "real", None, (GOE(rk), Scalar(rk), CompressedDiagonal(q, 1.0 / math.sqrt(zeta))))
    mu = float(np.max(np.sum(q ** 2, axis=1)))

    def sampler(g, count):
        occ = _rng.uniform_open(g, (count, k, nrow)) < p
        sign = np.where(_rng.uniform_open(g, (count, k, nrow)) < 0.5, 1.0, -1.0)
        phiq = (occ * sign / math.sqrt(zeta)) @ q
        return np.einsum("tij,tik->tjk", phiq, phiq)

    return Scenario(f"sketch-gram(n={nrow},d={d},k={k},zeta={zeta})", sampler, model,
                    SymMatrix.identity(d), 3.0 / k + mu / zeta, 2)


def scalar_sum(n: int = 20, p: float = 0.3) -> Scenario:
    """``Y = sum_{i<=n} W_i`` with ``W_i ~ Bernoulli(p)`` as a 1 x 1 matrix."""
    model = GaussianModel(1, "real", None, (RankOneSeries(np.full(n, p), np.ones((n, 1))),))

    def sampler(g, count):
        xi = _rng.uniform_open(g, (count, n)) < p
        return xi.sum(axis=1).astype(float)[:, None, None]

    return Scenario(f"scalar-sum(n={n},p={p})", sampler, model, SymMatrix([[n * p]]), n * p, 1)


def design2_mub(beta: float = 16.0, system: Optional[designs.DesignSystem] = None) -> Scenario:
    """Bernoulli subsample of a complex 2-design with ``s = beta d`` expected vectors.

    The system is replicated until the inclusion probability ``s/n`` is at
    most 1.  ``σ*²`` carries the analytic ``2β/d``.
    """
    base = system if system is not None else designs.mub_c2()
    s = beta * base.d
    sys = base.replicate(designs.replication_for(base, s))
    p = s / sys.n
    model = GaussianModel(sys.d, "complex", None, (RankOneSeries(np.full(sys.n, p), sys.vectors),))
    mean = SymMatrix(beta * np.eye(sys.d), "complex")
    return Scenario(f"design2(d={sys.d},n={sys.n},beta={beta})",
                    lambda g, c: designs.sample_subsystem_gram(g, c, sys, s), model, mean,
                    2.0 * beta / sys.d, 1, elmin_lb=designs.design_elmin_lb(beta))


def builtin_scenarios() -> dict:
    """Constructors for the built-in scenarios, keyed by name."""
    return {
        "bernoulli-weighted": bernoulli_weighted,
        "wishart": wishart,
        "sparse-cov": sparse_cov,
        "sketch-gram": sketch_gram,
        "scalar-sum": scalar_sum,
        "design2": design2_mub,
    }
