"""Structured self-adjoint Gaussian random matrices.

A :class:`GaussianModel` is a deterministic shift plus a tuple of independent
components.  Each component knows its variance function, its contribution
``E C^2`` to the matrix variance, and (when one exists) a closed form for its
weak variance.  Components are combined by independence, so the variance
function and ``E(Z - EZ)^2`` are exactly additive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from . import rng as _rng
from .matcore import RectMatrix, SymMatrix, ValidationError, is_orthonormal

MC_STREAM = 0x6D63  # stream tag for expected-eigenvalue estimates


def _herm(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))


def _fro2(m: np.ndarray) -> float:
    return float(np.sum(np.abs(m) ** 2))


# ---------------------------------------------------------------------------
# components


@dataclass(frozen=True)
class Scalar:
    """``coeff * gamma * I``."""

    coeff: float = 1.0

    def draw(self, g: np.random.Generator, count: int, d: int, field: str) -> np.ndarray:
        z = self.coeff * _rng.normal(g, count)
        return z[:, None, None] * np.eye(d)

    def var_eval(self, m: np.ndarray) -> float:
        return self.coeff ** 2 * float(np.real(np.trace(m))) ** 2

    def second_moment(self, d: int) -> np.ndarray:
        return self.coeff ** 2 * np.eye(d)

    def weak_var(self, d: int) -> Optional[float]:
        return self.coeff ** 2

    def series(self, d: int) -> np.ndarray:
        return self.coeff * np.eye(d)[None]

    def scaled(self, c: float) -> "Scalar":
        return Scalar(self.coeff * c)


@dataclass(frozen=True)
class Diagonal:
    """``coeff * sum_i gamma_i E_ii``."""

    coeff: float = 1.0

    def draw(self, g, count, d, field):
        z = self.coeff * _rng.normal(g, (count, d))
        out = np.zeros((count, d, d))
        idx = np.arange(d)
        out[:, idx, idx] = z
        return out

    def var_eval(self, m):
        return self.coeff ** 2 * float(np.sum(np.abs(np.diag(m)) ** 2))

    def second_moment(self, d):
        return self.coeff ** 2 * np.eye(d)

    def weak_var(self, d):
        return self.coeff ** 2

    def series(self, d):
        out = np.zeros((d, d, d))
        out[np.arange(d), np.arange(d), np.arange(d)] = self.coeff
        return out

    def scaled(self, c):
        return Diagonal(self.coeff * c)


@dataclass(frozen=True)
class GOE:
    """``coeff * G_goe``: diagonal entries N(0, 2), off-diagonal N(0, 1). Real field only."""

    coeff: float = 1.0

    def draw(self, g, count, d, field):
        a = _rng.normal(g, (count, d, d))
        return (self.coeff / math.sqrt(2.0)) * (a + np.swapaxes(a, 1, 2))

    def var_eval(self, m):
        return 2.0 * self.coeff ** 2 * _fro2(m)

    def second_moment(self, d):
        return self.coeff ** 2 * (d + 1) * np.eye(d)

    def weak_var(self, d):
        return 2.0 * self.coeff ** 2

    def series(self, d):
        mats = []
        for j in range(d):
            e = np.zeros((d, d))
            e[j, j] = math.sqrt(2.0)
            mats.append(e)
            for k in range(j + 1, d):
                e = np.zeros((d, d))
                e[j, k] = e[k, j] = 1.0
                mats.append(e)
        return self.coeff * np.array(mats)

    def scaled(self, c):
        return GOE(self.coeff * c)


@dataclass(frozen=True)
class GUE:
    """``coeff * G_gue``: diagonal N(0, 1), off-diagonal complex N_C(0, 1). Complex field only."""

    coeff: float = 1.0

    def draw(self, g, count, d, field):
        a = _rng.normal(g, (count, d, d))
        b = _rng.normal(g, (count, d, d))
        at, bt = np.swapaxes(a, 1, 2), np.swapaxes(b, 1, 2)
        return (self.coeff / 2.0) * ((a + at) + 1j * (b - bt))

    def var_eval(self, m):
        return self.coeff ** 2 * _fro2(m)

    def second_moment(self, d):
        return self.coeff ** 2 * d * np.eye(d)

    def weak_var(self, d):
        return self.coeff ** 2

    def series(self, d):
        mats = []
        s = 1.0 / math.sqrt(2.0)
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[j, j] = 1.0
            mats.append(e)
            for k in range(j + 1, d):
                e = np.zeros((d, d), dtype=complex)
                e[j, k] = e[k, j] = s
                mats.append(e)
                e = np.zeros((d, d), dtype=complex)
                e[j, k], e[k, j] = -1j * s, 1j * s
                mats.append(e)
        return self.coeff * np.array(mats)

    def scaled(self, c):
        return GUE(self.coeff * c)


@dataclass(frozen=True, eq=False)
class RankOneSeries:
    """``sum_i gamma_i sqrt(w_i) u_i u_i*`` with weights ``w_i >= 0``."""

    weights: np.ndarray
    vectors: np.ndarray  # shape (m, d); row i is u_i

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        v = np.atleast_2d(np.asarray(self.vectors))
        v = v.astype(complex if np.iscomplexobj(v) else float)
        if v.shape[0] != w.shape[0]:
            raise ValidationError("weights and vectors have different lengths")
        if np.any(w < 0):
            raise ValidationError("rank-one series weights must be nonnegative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "vectors", v)

    def _coef(self) -> np.ndarray:
        return np.sqrt(self.weights)

    def draw(self, g, count, d, field):
        z = _rng.normal(g, (count, self.weights.size)) * self._coef()
        v = self.vectors
        return np.einsum("ti,ij,ik->tjk", z, v, v.conj(), optimize=True)

    def var_eval(self, m):
        v = self.vectors
        q = np.real(np.einsum("ij,jk,ik->i", v.conj(), m, v))
        return float(np.sum(self.weights * q ** 2))

    def second_moment(self, d):
        v = self.vectors
        n2 = np.sum(np.abs(v) ** 2, axis=1)
        return np.einsum("i,ij,ik->jk", self.weights * n2, v, v.conj())

    def weak_var(self, d):
        v = self.vectors
        gram = v @ v.conj().T
        off = gram - np.diag(np.diag(gram))
        scale = max(float(np.max(np.abs(np.diag(gram)))), 1e-300)
        if np.max(np.abs(off), initial=0.0) <= 1e-10 * scale:
            n2 = np.real(np.diag(gram))
            return float(np.max(self.weights * n2 ** 2, initial=0.0))
        return None

    def series(self, d):
        v = self.vectors
        return self._coef()[:, None, None] * np.einsum("ij,ik->ijk", v, v.conj())

    def scaled(self, c):
        return RankOneSeries(self.weights * c ** 2, self.vectors)


@dataclass(frozen=True, eq=False)
class GeneralSeries:
    """``sum_i gamma_i H_i`` for self-adjoint coefficient matrices ``H_i``."""

    matrices: np.ndarray  # shape (m, d, d)

    def __post_init__(self):
        h = self.matrices
        if not isinstance(h, np.ndarray):
            h = np.asarray([x.entries if isinstance(x, SymMatrix) else np.asarray(x) for x in h])
        if h.ndim == 2:
            h = h[None]
        if h.ndim != 3 or h.shape[1] != h.shape[2]:
            raise ValidationError(f"series coefficients must be square, got {h.shape}")
        if np.linalg.norm(h - np.conj(np.swapaxes(h, 1, 2))) > 1e-12 * max(np.linalg.norm(h), 1.0):
            raise ValidationError("series coefficients must be self-adjoint")
        h = _herm(h.astype(complex if np.iscomplexobj(h) else float))
        object.__setattr__(self, "matrices", h)

    def draw(self, g, count, d, field):
        z = _rng.normal(g, (count, self.matrices.shape[0]))
        return np.einsum("ti,ijk->tjk", z, self.matrices, optimize=True)

    def var_eval(self, m):
        ip = np.real(np.einsum("ijk,jk->i", self.matrices.conj(), m))
        return float(np.sum(ip ** 2))

    def second_moment(self, d):
        h = self.matrices
        return np.einsum("ijk,ikl->jl", h, h)

    def weak_var(self, d):
        return commuting_weak_var(self.matrices)

    def series(self, d):
        return self.matrices

    def scaled(self, c):
        return GeneralSeries(self.matrices * c)


@dataclass(frozen=True, eq=False)
class CompressedDiagonal:
    """``coeff * q* D_n q`` with ``D_n`` an n-dim standard Gaussian diagonal.

    ``q`` is n x d; with ``q_i*`` the i-th row this is the series
    ``coeff * sum_i gamma_i q_i q_i*``.
    """

    q: np.ndarray
    coeff: float = 1.0

    def __post_init__(self):
        q = np.asarray(self.q.entries if isinstance(self.q, RectMatrix) else self.q)
        if q.ndim == 1:
            q = q[:, None]
        q = q.astype(complex if np.iscomplexobj(q) else float)
        object.__setattr__(self, "q", q)

    def _rows(self) -> np.ndarray:
        # row i as the column vector q_i, so q_i q_i* = conj(row) row^T
        return self.q.conj()

    def draw(self, g, count, d, field):
        z = _rng.normal(g, (count, self.q.shape[0])) * self.coeff
        q = self.q
        out = np.empty((count, d, d), dtype=q.dtype)
        qh = q.conj().T
        chunk = max(1, int(4e6 // max(q.size, 1)))
        for s in range(0, count, chunk):
            zz = z[s:s + chunk]
            out[s:s + chunk] = np.matmul(qh[None], zz[:, :, None] * q[None])
        return out

    def var_eval(self, m):
        q = self.q
        diag = np.real(np.einsum("ij,jk,ik->i", q, m, q.conj()))
        return self.coeff ** 2 * float(np.sum(diag ** 2))

    def second_moment(self, d):
        r = self._rows()
        n2 = np.sum(np.abs(r) ** 2, axis=1)
        return self.coeff ** 2 * np.einsum("i,ij,ik->jk", n2, r, r.conj())

    def weak_var(self, d):
        r = self._rows()
        return RankOneSeries(np.full(r.shape[0], self.coeff ** 2), r).weak_var(d)

    def series(self, d):
        r = self._rows()
        return self.coeff * np.einsum("ij,ik->ijk", r, r.conj())

    def scaled(self, c):
        return CompressedDiagonal(self.q, self.coeff * c)


Component = Union[Scalar, Diagonal, GOE, GUE, RankOneSeries, GeneralSeries, CompressedDiagonal]


def commuting_weak_var(series: np.ndarray) -> Optional[float]:
    """Exact weak variance when the series coefficients commute, else None.

    Commuting ``H_i`` are jointly diagonal in some basis, where the objective
    ``sum_i (u* H_i u)^2`` is a convex function of the weights ``|v_j|^2`` on
    the simplex, so the maximum sits at a basis vector.
    """
    h = np.asarray(series)
    if h.shape[0] == 0:
        return 0.0
    scale = max(float(np.max(np.abs(h))), 1e-300)
    g = np.random.default_rng(12345)
    combo = np.einsum("i,ijk->jk", g.standard_normal(h.shape[0]), h)
    _, vecs = np.linalg.eigh(_herm(combo))
    rot = np.einsum("jk,ikl,lm->ijm", vecs.conj().T, h, vecs, optimize=True)
    diag = np.einsum("ijj->ij", rot)
    off = rot - np.einsum("ij,jk->ijk", diag, np.eye(h.shape[1]))
    if np.max(np.abs(off)) > 1e-9 * scale:
        return None
    return float(np.max(np.sum(np.real(diag) ** 2, axis=0)))


def estimate_weak_var(series: np.ndarray, restarts: int = 32, seed: int = 0,
                      rel_tol: float = 1e-10, max_iter: int = 2000) -> float:
    """Maximize ``sum_i (u* H_i u)^2`` over unit ``u`` by projected gradient ascent.

    Multi-start with backtracking steps; returns the best value found, which
    is a lower estimate of the true maximum.
    """
    h = np.asarray(series)
    if h.shape[0] == 0:
        return 0.0
    d = h.shape[1]
    is_complex = np.iscomplexobj(h)
    g = np.random.default_rng(seed)

    def value(u):
        s = np.real(np.einsum("j,ijk,k->i", u.conj(), h, u))
        return float(np.sum(s ** 2)), s

    best = 0.0
    for _ in range(restarts):
        u = g.standard_normal(d) + (1j * g.standard_normal(d) if is_complex else 0)
        u = u / np.linalg.norm(u)
        v, s = value(u)
        step = 1.0
        for _ in range(max_iter):
            grad = np.einsum("i,ijk,k->j", s, h, u)
            grad = grad - np.vdot(u, grad) * u
            gn = np.linalg.norm(grad)
            if gn <= 1e-15 * max(v, 1e-300):
                break
            direction = grad / gn
            improved = False
            while step > 1e-12:
                w = u + step * direction
                w = w / np.linalg.norm(w)
                vw, sw = value(w)
                if vw > v:
                    improved = True
                    break
                step *= 0.5
            if not improved:
                break
            gain = (vw - v) / max(abs(v), 1e-300)
            u, v, s = w, vw, sw
            step = min(2.0 * step, 1.0)
            if gain < rel_tol:
                break
        best = max(best, v)
    return best


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class ModelStats:
    sigma2: float
    sigma_star2: float
    sigma_star2_is_exact: bool
    khinchin: float
    dim: int


@dataclass(frozen=True, eq=False)
class GaussianModel:
    """Law of ``shift + sum_j C_j`` with independent Gaussian components ``C_j``."""

    dim: int
    field: str = "real"
    shift: Optional[SymMatrix] = None
    components: tuple = ()

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValidationError("model dimension must be positive")
        if self.field not in ("real", "complex"):
            raise ValidationError(f"unknown field {self.field!r}")
        shift = self.shift
        if shift is None:
            shift = SymMatrix.zeros(self.dim, self.field)
        shift = SymMatrix.of(shift)
        if shift.dim != self.dim:
            raise ValidationError("shift dimension does not match model dimension")
        if shift.field == "complex" and self.field == "real":
            raise ValidationError("complex shift in a real model")
        comps = tuple(self.components)
        for c in comps:
            self._check_component(c)
        object.__setattr__(self, "shift", SymMatrix(shift.entries, self.field))
        object.__setattr__(self, "components", comps)

    def _check_component(self, c):
        d = self.dim
        if isinstance(c, GOE) and self.field != "real":
            raise ValidationError("GOE component requires the real field")
        if isinstance(c, GUE) and self.field != "complex":
            raise ValidationError("GUE component requires the complex field")
        if isinstance(c, RankOneSeries):
            if c.vectors.shape[1] != d:
                raise ValidationError("rank-one vector length does not match model dimension")
            if np.iscomplexobj(c.vectors) and self.field == "real":
                raise ValidationError("complex vectors in a real model")
        elif isinstance(c, GeneralSeries):
            if c.matrices.shape[1] != d:
                raise ValidationError("series coefficient dimension does not match model")
            if np.iscomplexobj(c.matrices) and self.field == "real":
                if np.any(np.abs(c.matrices.imag) > 0):
                    raise ValidationError("complex coefficients in a real model")
        elif isinstance(c, CompressedDiagonal):
            if c.q.shape[1] != d:
                raise ValidationError("compressed diagonal q.cols does not match model dimension")
            if np.iscomplexobj(c.q) and self.field == "real":
                raise ValidationError("complex compression in a real model")
        elif not isinstance(c, (Scalar, Diagonal, GOE, GUE)):
            raise ValidationError(f"unknown component type {type(c).__name__}")

    # convenience constructors
    @classmethod
    def zero(cls, d: int, field: str = "real") -> "GaussianModel":
        return cls(d, field)

    def with_shift(self, shift) -> "GaussianModel":
        return GaussianModel(self.dim, self.field, SymMatrix.of(shift), self.components)

    def centered(self) -> "GaussianModel":
        return GaussianModel(self.dim, self.field, None, self.components)

    def scaled(self, c: float) -> "GaussianModel":
        """Law of ``c * Z``."""
        return GaussianModel(self.dim, self.field, SymMatrix(c * self.shift.entries, self.field),
                             tuple(comp.scaled(c) for comp in self.components))

    def __repr__(self):
        names = ", ".join(type(c).__name__ for c in self.components)
        return f"GaussianModel(dim={self.dim}, field={self.field!r}, components=[{names}])"


def _draw_batch(model: GaussianModel, g: np.random.Generator, count: int) -> np.ndarray:
    dtype = complex if model.field == "complex" else float
    out = np.broadcast_to(model.shift.entries, (count, model.dim, model.dim)).astype(dtype)
    for comp in model.components:
        out = out + comp.draw(g, count, model.dim, model.field)
    return out


def sample(model: GaussianModel, seed: int) -> SymMatrix:
    """One draw of the model; bit-identical for equal seeds."""
    m = _draw_batch(model, _rng.stream(seed, 0), 1)[0]
    return SymMatrix(_herm(m), model.field)


def sample_batch(model: GaussianModel, seed: int, block: int, count: int,
                 stream_tag: int = MC_STREAM) -> np.ndarray:
    """Draw ``count`` samples keyed by ``(seed, stream_tag, block)`` as a raw array."""
    return _herm(_draw_batch(model, _rng.stream(seed, stream_tag, block), count))


def var_eval(model: GaussianModel, m) -> float:
    """Variance of ``<m, Z>``, summed over components."""
    m = SymMatrix.of(m)
    if m.dim != model.dim:
        raise ValidationError(f"dimension mismatch: model {model.dim}, matrix {m.dim}")
    return float(sum(c.var_eval(m.entries) for c in model.components))


def second_moment(model: GaussianModel) -> np.ndarray:
    """``E (Z - EZ)^2`` as a dense matrix."""
    d = model.dim
    total = np.zeros((d, d), dtype=complex if model.field == "complex" else float)
    for c in model.components:
        total = total + c.second_moment(d)
    return _herm(total)


def stats(model: GaussianModel, restarts: int = 32) -> ModelStats:
    d = model.dim
    sm = second_moment(model)
    sigma2 = float(max(np.linalg.eigvalsh(sm)[-1], 0.0)) if model.components else 0.0
    total, exact = 0.0, True
    for c in model.components:
        wv = c.weak_var(d)
        if wv is None:
            wv = estimate_weak_var(c.series(d), restarts=restarts)
            exact = False
        total += wv
    if len(model.components) > 1:
        exact = False
    khinchin = math.sqrt(2.0 * sigma2 * math.log(d)) if d > 1 else 0.0
    return ModelStats(sigma2, total, exact, khinchin, d)


def weak_var_estimate(model: GaussianModel, restarts: int = 32) -> float:
    """Direct variational estimate of the weak variance of the whole model."""
    if not model.components:
        return 0.0
    series = np.concatenate([c.series(model.dim) for c in model.components], axis=0)
    exact = commuting_weak_var(series)
    if exact is not None:
        return exact
    return estimate_weak_var(series, restarts=restarts)


def model_congruence(model: GaussianModel, k, expand: bool = False) -> GaussianModel:
    """Law of ``k* Z k``.

    Rotation-invariant components (GOE, GUE, scalar) are only carried through
    an isometry ``k``; for other ``k`` pass ``expand=True`` to rewrite them as
    an explicit series first.
    """
    k = RectMatrix.of(k)
    if k.rows != model.dim:
        raise ValidationError(f"congruence needs k.rows == model.dim, got {k.rows} and {model.dim}")
    kk = k.entries
    field = "complex" if (model.field == "complex" or k.field == "complex") else "real"
    iso = is_orthonormal(k, atol=1e-10)
    shift = kk.conj().T @ model.shift.entries @ kk
    comps = []
    for c in model.components:
        if isinstance(c, (GOE, GUE, Scalar)):
            if iso and not (isinstance(c, GOE) and field == "complex"):
                comps.append(c)
                continue
            if not expand:
                raise ValidationError(
                    f"{type(c).__name__} component under a non-isometric map; pass expand=True")
            h = c.series(model.dim)
            comps.append(GeneralSeries(np.einsum("jk,ikl,lm->ijm", kk.conj().T, h, kk)))
        elif isinstance(c, Diagonal):
            comps.append(CompressedDiagonal(kk, c.coeff))
        elif isinstance(c, CompressedDiagonal):
            comps.append(CompressedDiagonal(c.q @ kk, c.coeff))
        elif isinstance(c, RankOneSeries):
            # u u* -> (k* u)(k* u)*; rows of vectors are u_i
            comps.append(RankOneSeries(c.weights, c.vectors @ kk.conj()))
        elif isinstance(c, GeneralSeries):
            comps.append(GeneralSeries(np.einsum("jk,ikl,lm->ijm", kk.conj().T, c.matrices, kk)))
    return GaussianModel(k.cols, field, SymMatrix(_herm(shift), field), tuple(comps))


def add_independent(a: GaussianModel, b: GaussianModel) -> GaussianModel:
    if a.dim != b.dim or a.field != b.field:
        raise ValidationError("models must share dimension and field")
    return GaussianModel(a.dim, a.field, a.shift + b.shift, a.components + b.components)


def lmin_samples(model: GaussianModel, trials: int, seed: int,
                 stream_tag: int = MC_STREAM) -> np.ndarray:
    """``trials`` independent draws of ``λ_min(Z)``, in trial order."""

    def block(i, count):
        return np.linalg.eigvalsh(sample_batch(model, seed, i, count, stream_tag))[:, 0]

    return _rng.concat_blocks(_rng.map_blocks(block, trials))


def eig_samples(model: GaussianModel, trials: int, seed: int,
                stream_tag: int = MC_STREAM) -> np.ndarray:
    """Full ascending spectra of ``trials`` draws, shape (trials, d)."""

    def block(i, count):
        return np.linalg.eigvalsh(sample_batch(model, seed, i, count, stream_tag))

    return _rng.concat_blocks(_rng.map_blocks(block, trials))


def mc_expected_lmin(model: GaussianModel, trials: int, seed: int = 0) -> tuple[float, float]:
    """Sample mean and standard error of ``λ_min(Z)``."""
    if trials < 2:
        raise ValidationError("need at least two trials")
    if not model.components:
        return float(np.linalg.eigvalsh(model.shift.entries)[0]), 0.0
    x = lmin_samples(model, trials, seed)
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(trials))
