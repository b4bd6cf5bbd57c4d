"""Sparse random sketches and their subspace-injection guarantees."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .. import rng as _rng
from ..compare import BoundReport, make_report
from ..gaussmodel import GOE, CompressedDiagonal, GaussianModel, Scalar
from ..matcore import RectMatrix, SymMatrix, ValidationError, is_orthonormal, lambda_min


def _orthonormal(q) -> RectMatrix:
    q = RectMatrix.of(q)
    if not is_orthonormal(q, atol=1e-8):
        raise ValidationError("Q must have orthonormal columns")
    return q


def coherence(q) -> float:
    """Largest squared row norm of an orthonormal-column ``n x d`` matrix."""
    q = _orthonormal(q)
    mu = float(np.max(np.sum(np.abs(q.entries) ** 2, axis=1)))
    n, d = q.rows, q.cols
    if not (d / n - 1e-9 <= mu <= 1 + 1e-9):
        raise ValidationError(f"coherence {mu} outside [d/n, 1]")
    return mu


@dataclass(frozen=True)
class SketchParams:
    k: int
    zeta: float
    certified: bool = True
    label: str = "theory"


def sketch_params(d: int, mu: float, epsilon: float, delta: float) -> SketchParams:
    """Smallest embedding dimension ``k`` and sparsity ``ζ`` for an ε-injection.

    ``k = ceil(16 max(d, 6 log(2d/δ)) / ε²)`` and ``ζ = 32 μ log(2d/δ) / ε²``.
    Raises when ``ζ > k``, since a row count below the sparsity is not allowed.
    """
    if d < 1:
        raise ValidationError("d must be positive")
    if not 0 < mu <= 1:
        raise ValidationError("coherence must lie in (0, 1]")
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise ValidationError("epsilon and delta must lie in (0, 1)")
    lg = math.log(2 * d / delta)
    k = math.ceil(16.0 * max(d, 6.0 * lg) / epsilon ** 2 - 1e-9)
    zeta = 32.0 * mu * lg / epsilon ** 2
    if zeta > k:
        raise ValidationError(f"sparsity {zeta:.4g} exceeds k = {k}; increase epsilon or lower the coherence")
    return SketchParams(k, zeta)


def practical_preset(d: int) -> SketchParams:
    """``k = 2d``, ``ζ = 8``: a common working choice with no certificate attached."""
    return SketchParams(2 * d, min(8.0, 2.0 * d), certified=False, label="practical-uncertified")


@dataclass(frozen=True, eq=False)
class SparseSketch:
    """``k x n`` sparse sign matrix with entries ``xi psi / sqrt(ζ)``.

    Triplets are grouped by column (``cols`` is nondecreasing), which suits
    applying the sketch to a tall matrix one row of ``Q`` at a time.
    """

    k: int
    n: int
    zeta: float
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    seed: int = 0

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def to_csc(self) -> sp.csc_matrix:
        return sp.csc_matrix((self.values, (self.rows, self.cols)), shape=(self.k, self.n))

    def dense(self) -> np.ndarray:
        return self.to_csc().toarray()

    def triplets(self):
        return zip(self.rows.tolist(), self.cols.tolist(), self.values.tolist())


def make_sketch(k: int, n: int, zeta: float, seed: int = 0) -> SparseSketch:
    """Independent Bernoulli(ζ/k) occupancy and Rademacher signs per entry.

    Occupied positions are drawn by geometric gaps along the column-major
    order of the ``k x n`` grid, which has the law of independent per-entry
    coin flips at a cost proportional to the number of nonzeros.
    """
    if k < 1 or n < 1:
        raise ValidationError("sketch dimensions must be positive")
    if not 0 < zeta <= k:
        raise ValidationError("sparsity must satisfy 0 < zeta <= k")
    p = zeta / k
    total = k * n
    g = _rng.stream(seed, 0x5C)
    pos = []
    last, expected = -1, total * p
    while True:
        batch = int(expected + 6.0 * math.sqrt(expected) + 64)
        gaps = g.geometric(p, size=batch) if p < 1 else np.ones(batch, dtype=np.int64)
        cand = last + np.cumsum(gaps)
        pos.append(cand[cand < total])
        if cand[-1] >= total:
            break
        last = int(cand[-1])
    flat = np.concatenate(pos).astype(np.int64)
    c, r = np.divmod(flat, k)
    v = np.where(_rng.uniform_open(g, flat.size) < 0.5, 1.0, -1.0) / math.sqrt(zeta)
    for a in (r, c, v):
        a.setflags(write=False)
    return SparseSketch(int(k), int(n), float(zeta), r, c, v, int(seed))


def apply_sketch(s: SparseSketch, q) -> RectMatrix:
    """``Φ Q`` as a dense ``k x d`` matrix."""
    q = RectMatrix.of(q)
    if q.rows != s.n:
        raise ValidationError(f"sketch has n = {s.n} columns but Q has {q.rows} rows")
    return RectMatrix(s.to_csc() @ q.entries, q.field)


def injection_lmin(q, s: SparseSketch) -> float:
    """``λ_min((ΦQ)*(ΦQ))``, the injectivity constant certified on range(Q)."""
    y = apply_sketch(s, q).entries
    return lambda_min(SymMatrix(y.conj().T @ y))


def sample_injection_lmin(q, k: int, zeta: float, seeds) -> np.ndarray:
    q = _orthonormal(q)
    return np.array([injection_lmin(q, make_sketch(k, q.rows, zeta, seed)) for seed in seeds])


@dataclass(frozen=True)
class InjectionResult:
    report: BoundReport
    model: GaussianModel
    mu: float
    compressed_sigma2_ub: float  # σ²(Q^T D Q) <= μ
    compressed_khinchin: float  # sqrt(2 μ log d)


def injection_model(q, k: int, zeta: float) -> InjectionResult:
    """Comparison model ``I + k^{-1/2}(G_goe + gamma I) + ζ^{-1/2} Q^T D_n Q`` and its statistics."""
    q = _orthonormal(q)
    if not 0 < zeta <= k:
        raise ValidationError("sparsity must satisfy 0 < zeta <= k")
    if q.field != "real":
        raise ValidationError("sparse sign sketches are analysed over the real field")
    d = q.cols
    mu = coherence(q)
    rk = 1.0 / math.sqrt(k)
    model = GaussianModel(d, "real", SymMatrix.identity(d),
                          (GOE(rk), Scalar(rk), CompressedDiagonal(q.entries, 1.0 / math.sqrt(zeta))))
    log_d = math.log(d) if d > 1 else 0.0
    elmin = 1.0 - 2.0 * math.sqrt(d / k) - math.sqrt(2.0 * mu * log_d / zeta)
    rep = make_report("injection", elmin, 3.0 / k + mu / zeta, 2 * d)
    return InjectionResult(rep, model, mu, mu, math.sqrt(2.0 * mu * log_d))
