"""Dense self-adjoint matrix kernels.

``SymMatrix`` and ``RectMatrix`` are thin immutable wrappers around numpy
arrays that carry a field tag (``"real"`` or ``"complex"``).  Every function
here also accepts plain array-likes, so hot Monte Carlo loops can stay in
numpy while public entry points still validate their inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

SELF_ADJOINT_RTOL = 1e-12
PSD_RTOL = 1e-10

FIELDS = ("real", "complex")


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


def _field_of(a: np.ndarray) -> str:
    return "complex" if np.iscomplexobj(a) else "real"


def _as_array(a, field: str | None = None) -> np.ndarray:
    if isinstance(a, (SymMatrix, RectMatrix)):
        a = a.entries
    arr = np.asarray(a)
    if field is None:
        field = _field_of(arr)
    if field not in FIELDS:
        raise ValidationError(f"unknown field tag {field!r}")
    if field == "real":
        if np.iscomplexobj(arr):
            if np.any(arr.imag != 0):
                raise ValidationError("complex entries under a real field tag")
            arr = arr.real
        return np.array(arr, dtype=np.float64)
    return np.array(arr, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Self-adjoint d x d matrix over the real or complex field.

    Construction symmetrizes ``(m + m*)/2`` when the drift from
    self-adjointness is within ``1e-12`` relative (Frobenius) and rejects the
    input otherwise.
    """

    entries: np.ndarray
    field: str = "real"

    def __post_init__(self):
        arr = _as_array(self.entries, self.field)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ValidationError(f"expected a nonempty square matrix, got shape {arr.shape}")
        scale = max(np.linalg.norm(arr), 1.0)
        drift = np.linalg.norm(arr - arr.conj().T)
        if drift > SELF_ADJOINT_RTOL * scale:
            raise ValidationError(f"matrix is not self-adjoint (drift {drift:.3e})")
        arr = 0.5 * (arr + arr.conj().T)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def of(cls, a, field: str | None = None) -> "SymMatrix":
        if isinstance(a, SymMatrix) and (field is None or field == a.field):
            return a
        arr = np.asarray(a.entries if isinstance(a, (SymMatrix, RectMatrix)) else a)
        return cls(arr, field or _field_of(arr))

    @classmethod
    def identity(cls, d: int, field: str = "real") -> "SymMatrix":
        return cls(np.eye(d), field)

    @classmethod
    def zeros(cls, d: int, field: str = "real") -> "SymMatrix":
        return cls(np.zeros((d, d)), field)

    @classmethod
    def diag(cls, values, field: str = "real") -> "SymMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)), field)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __add__(self, other):
        other = SymMatrix.of(other)
        return SymMatrix(self.entries + other.entries, _join_fields(self.field, other.field))

    def __sub__(self, other):
        other = SymMatrix.of(other)
        return SymMatrix(self.entries - other.entries, _join_fields(self.field, other.field))

    def __mul__(self, c: float):
        return SymMatrix(float(c) * self.entries, self.field)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, SymMatrix):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.entries, other.entries)

    def __repr__(self):
        return f"SymMatrix(dim={self.dim}, field={self.field!r})"


@dataclass(frozen=True, eq=False)
class RectMatrix:
    """Rows x cols matrix with a field tag (sketch views, congruence maps)."""

    entries: np.ndarray
    field: str = "real"

    def __post_init__(self):
        arr = _as_array(self.entries, self.field)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or min(arr.shape) < 1:
            raise ValidationError(f"expected a nonempty 2-d array, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def of(cls, a, field: str | None = None) -> "RectMatrix":
        if isinstance(a, RectMatrix) and (field is None or field == a.field):
            return a
        arr = np.asarray(a.entries if isinstance(a, (SymMatrix, RectMatrix)) else a)
        return cls(arr, field or _field_of(arr))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __repr__(self):
        return f"RectMatrix(rows={self.rows}, cols={self.cols}, field={self.field!r})"


MatrixLike = Union[SymMatrix, RectMatrix, np.ndarray]


def _join_fields(a: str, b: str) -> str:
    return "complex" if "complex" in (a, b) else "real"


def sym_eigvals(m) -> np.ndarray:
    """Eigenvalues of a self-adjoint matrix in ascending order."""
    m = SymMatrix.of(m)
    return np.linalg.eigvalsh(m.entries)


def lambda_min(m) -> float:
    return float(sym_eigvals(m)[0])


def lambda_max(m) -> float:
    return float(sym_eigvals(m)[-1])


def spectral_norm(m) -> float:
    ev = sym_eigvals(m)
    return float(max(abs(ev[0]), abs(ev[-1])))


def trace_inner(a, b) -> float:
    """Trace inner product Tr[a* b]; real for self-adjoint arguments."""
    a, b = SymMatrix.of(a), SymMatrix.of(b)
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(np.real(np.vdot(a.entries, b.entries)))


def congruence(k, m) -> SymMatrix:
    """Return ``k* m k``."""
    k, m = RectMatrix.of(k), SymMatrix.of(m)
    if k.rows != m.dim:
        raise ValidationError(f"congruence needs k.rows == m.dim, got {k.rows} and {m.dim}")
    out = k.entries.conj().T @ m.entries @ k.entries
    return SymMatrix(0.5 * (out + out.conj().T), _join_fields(k.field, m.field))


def is_psd(m, rtol: float = PSD_RTOL) -> bool:
    """True when λ_min ≥ -rtol·‖m‖."""
    ev = sym_eigvals(m)
    scale = max(abs(ev[0]), abs(ev[-1]))
    return bool(ev[0] >= -rtol * scale)


def is_orthonormal(q, atol: float = 1e-8) -> bool:
    q = RectMatrix.of(q).entries
    gram = q.conj().T @ q
    return bool(np.allclose(gram, np.eye(q.shape[1]), atol=atol, rtol=0))


def random_symmetric(d: int, rng: np.random.Generator, field: str = "real") -> SymMatrix:
    """Draw a random self-adjoint matrix (handy for tests and probes)."""
    a = rng.standard_normal((d, d))
    if field == "complex":
        a = a + 1j * rng.standard_normal((d, d))
    return SymMatrix(0.5 * (a + a.conj().T), field)


def random_orthonormal(n: int, d: int, rng: np.random.Generator, field: str = "real") -> RectMatrix:
    a = rng.standard_normal((n, d))
    if field == "complex":
        a = a + 1j * rng.standard_normal((n, d))
    q, r = np.linalg.qr(a)
    # fix column signs so the draw is Haar distributed
    ph = np.diag(r) / np.abs(np.diag(r))
    return RectMatrix(q * ph, field)
