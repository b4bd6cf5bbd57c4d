"""Unit-norm systems, projective designs, and random subsampling of designs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .. import rng as _rng
from ..compare import BoundReport, MomentSpec, make_report
from ..gaussmodel import GaussianModel, RankOneSeries
from ..matcore import SymMatrix, ValidationError

UNIT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DesignSystem:
    """``n`` unit vectors in ``F^d``, stored as the rows of an ``(n, d)`` array."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vectors))
        v = v.astype(complex if np.iscomplexobj(v) else float)
        if v.ndim != 2 or v.size == 0:
            raise ValidationError("design needs a nonempty (n, d) array of vectors")
        norms = np.linalg.norm(v, axis=1)
        if np.max(np.abs(norms - 1.0)) > UNIT_TOL:
            raise ValidationError("design vectors must have unit norm")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    @property
    def field(self) -> str:
        return "complex" if np.iscomplexobj(self.vectors) else "real"

    def replicate(self, times: int) -> "DesignSystem":
        """Repeat every vector ``times`` times (a replicated t-design is still one)."""
        return DesignSystem(np.tile(self.vectors, (int(times), 1)))

    def projectors(self) -> np.ndarray:
        v = self.vectors
        return np.einsum("ij,ik->ijk", v, v.conj())


def mub_c2() -> DesignSystem:
    """The six vectors of three mutually unbiased bases of ``C^2``."""
    r = 1 / math.sqrt(2)
    return DesignSystem(np.array([
        [1, 0], [0, 1],
        [r, r], [r, -r],
        [r, 1j * r], [r, -1j * r],
    ], dtype=complex))


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal basis of the d^2-dimensional real space of d x d Hermitian matrices."""
    out = []
    for j in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[j, j] = 1.0
        out.append(e)
    s = 1 / math.sqrt(2)
    for j in range(d):
        for k in range(j + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k] = e[k, j] = s
            out.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[j, k], e[k, j] = -1j * s, 1j * s
            out.append(e)
    return np.array(out)


@dataclass(frozen=True)
class DesignCheck:
    ok: bool
    residual: float
    order: int
    mode: str


def _frame_residual(sys: DesignSystem) -> float:
    v = sys.vectors
    frame = v.T @ v.conj() / sys.n
    return float(np.linalg.norm(frame - np.eye(sys.d) / sys.d))


def _quad(sys: DesignSystem, mats: np.ndarray) -> np.ndarray:
    """Coordinates ``<M_a, u_i u_i*>`` for every probe ``M_a``, shape (n, a)."""
    v = sys.vectors
    return np.real(np.einsum("ij,ajk,ik->ia", v.conj(), mats, v, optimize=True))


def check_design(sys: DesignSystem, order: int = 2, tol: float = 1e-10,
                 probes: Optional[int] = None, seed: int = 0) -> DesignCheck:
    """Test the 1-design (tight frame) or 2-design quadrature identity.

    Order 2 compares the quadratic form ``M -> mean_i <M, u_i u_i*>^2`` with
    ``(||M||_F^2 + (Tr M)^2) / (d (d+1))`` as bilinear forms on the Hermitian
    basis, which covers every ``M``.  For ``d > 30`` (or when ``probes`` is
    given) it instead evaluates both sides on random Hermitian probes.
    """
    if order not in (1, 2):
        raise ValidationError("design order must be 1 or 2")
    if order == 1:
        r = _frame_residual(sys)
        return DesignCheck(r <= tol, r, 1, "exact")
    d = sys.d
    if probes is None and d <= 30:
        basis = hermitian_basis(d)
        c = _quad(sys, basis)
        gram = c.T @ c / sys.n
        tr = np.real(np.trace(basis, axis1=1, axis2=2))
        target = (np.eye(basis.shape[0]) + np.outer(tr, tr)) / (d * (d + 1))
        r = float(np.max(np.abs(gram - target)))
        return DesignCheck(r <= tol, r, 2, "basis")
    g = _rng.stream(seed, 0xD5)
    count = probes or 200
    a = g.standard_normal((count, d, d)) + 1j * g.standard_normal((count, d, d))
    m = 0.5 * (a + np.conj(np.swapaxes(a, 1, 2)))
    m /= np.linalg.norm(m, axis=(1, 2))[:, None, None]
    lhs = np.mean(_quad(sys, m) ** 2, axis=0)
    tr = np.real(np.trace(m, axis1=1, axis2=2))
    rhs = (1.0 + tr ** 2) / (d * (d + 1))
    r = float(np.max(np.abs(lhs - rhs)))
    return DesignCheck(r <= tol, r, 2, "probe")


@dataclass(frozen=True)
class SamplingPlan:
    """Required average sample count ``s = beta d`` with the matching tail evaluator."""

    order: int
    d: int
    delta: float
    s: float
    beta: float
    tail: Callable  # order 1: beta -> prob; order 2: (beta, t) -> prob
    elmin_lb: Optional[float] = None  # order 2: β - 2√β at the planned β
    sigma_star2_ub: Optional[float] = None  # order 2: 2β/d


def design_elmin_lb(beta: float) -> float:
    return beta - 2.0 * math.sqrt(beta)


def design_tail(d: int) -> Callable[[float, float], float]:
    return lambda beta, t: d * math.exp(-t * t * d / (4.0 * beta))


def design_sampling_plan(d: int, delta: float, order: int = 2) -> SamplingPlan:
    if not 0 < delta < 1:
        raise ValidationError("delta must lie in (0, 1)")
    if d < 1:
        raise ValidationError("dimension must be positive")
    if order == 1:
        s = d * math.log(d / delta)
        return SamplingPlan(1, d, delta, s, s / d, lambda beta: d * math.exp(-beta))
    if order == 2:
        s = 4.0 * (math.sqrt(d) + math.sqrt(math.log(d / delta))) ** 2
        beta = s / d
        return SamplingPlan(2, d, delta, s, beta, design_tail(d),
                            design_elmin_lb(beta), 2.0 * beta / d)
    raise ValidationError("design order must be 1 or 2")


def replication_for(sys: DesignSystem, s: float) -> int:
    """Smallest replication count that keeps the inclusion probability ``s/n`` at most 1."""
    return max(1, math.ceil(s / sys.n))


def subsample_spec(sys: DesignSystem, s: float) -> MomentSpec:
    """Bernoulli(s/n) inclusion weights on the projectors ``u_i u_i*``."""
    p = s / sys.n
    if not 0 < p <= 1:
        raise ValidationError(f"inclusion probability s/n = {p:.4g} must lie in (0, 1]; replicate the system")
    return MomentSpec.bernoulli(p, tuple(SymMatrix.of(x) for x in sys.projectors()))


def design2_model(sys: DesignSystem, beta: float) -> GaussianModel:
    """``beta I + sqrt(beta d / n) sum_i gamma_i u_i u_i*``."""
    p = beta * sys.d / sys.n
    return GaussianModel(sys.d, sys.field, SymMatrix(beta * np.eye(sys.d), sys.field),
                         (RankOneSeries(np.full(sys.n, p), sys.vectors),))


def design2_report(d: int, beta: float) -> BoundReport:
    """Analytic comparison bound for a subsampled complex 2-design."""
    return make_report("design2", design_elmin_lb(beta), 2.0 * beta / d, d)


def sample_subsystem_gram(g: np.random.Generator, count: int, sys: DesignSystem, s: float) -> np.ndarray:
    """``count`` draws of ``Y = sum_i xi_i u_i u_i*`` with ``xi_i ~ Bernoulli(s/n)``."""
    p = s / sys.n
    xi = (_rng.uniform_open(g, (count, sys.n)) < p).astype(float)
    v = sys.vectors
    return np.einsum("ti,ij,ik->tjk", xi, v, v.conj(), optimize=True)


def spanning_failure_rate(sys: DesignSystem, s: float, draws: int, seed: int = 0,
                          tol: float = 1e-9) -> float:
    """Fraction of Bernoulli subsamples whose Gram matrix has ``λ_min <= tol``."""

    def block(i, count):
        y = sample_subsystem_gram(_rng.stream(seed, 0xD2, i), count, sys, s)
        return np.linalg.eigvalsh(y)[:, 0]

    lam = _rng.concat_blocks(_rng.map_blocks(block, draws))
    return float(np.mean(lam <= tol))
