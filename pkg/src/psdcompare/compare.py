"""Bound engines for minimum eigenvalues of random psd sums.

Two comparison bounds are provided.  :func:`weighted_bounds` covers
``Y = sum_i W_i A_i`` with independent nonnegative weights and fixed psd
``A_i``.  :func:`iid_bounds` covers sums of iid random psd matrices.  Both
consume an expected minimum eigenvalue of the Gaussian model (analytic or
Monte Carlo) and its weak variance.  The scalar positive-sum tail and two
coarse baselines (:func:`epz_bounds`, :func:`bern_lb`) complete the set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import gaussmodel as gm
from .gaussmodel import GaussianModel, GeneralSeries, RankOneSeries
from .matcore import PSD_RTOL, SymMatrix, ValidationError, is_psd, lambda_min, spectral_norm


@dataclass(frozen=True)
class AnalyticLmin:
    """A closed-form lower bound for ``E λ_min(Z)``."""

    value: float
    note: str = ""


@dataclass(frozen=True)
class MonteCarloLmin:
    trials: int = 4000
    seed: int = 0


ElminSource = Union[AnalyticLmin, MonteCarloLmin, float]


@dataclass(frozen=True)
class BoundReport:
    """Statistics behind a comparison bound.

    ``expectation_lb = elmin_z - sqrt(2 sigma_star2 log(dim_factor))`` and the
    tail is ``P{λ_min(Y) <= elmin_z - t} <= tail_coeff * exp(-t^2 tail_rate)``.
    """

    label: str
    elmin_z: float
    elmin_stderr: float
    elmin_source: str  # "analytic" or "mc"
    sigma_star2: float
    dim_factor: float
    expectation_lb: float
    tail_coeff: float
    tail_rate: float

    def tail(self, t: float) -> float:
        """Tail bound at deviation ``t`` (not clipped at 1)."""
        if t < 0:
            raise ValidationError("tail deviation must be nonnegative")
        if t == 0:
            return self.tail_coeff
        if math.isinf(self.tail_rate):
            return 0.0
        return self.tail_coeff * math.exp(-t * t * self.tail_rate)

    def as_row(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def schema(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def to_text(self) -> str:
        """Flat ``key = value`` rendering."""
        return "\n".join(f"{k} = {_fmt(v)}" for k, v in self.as_row().items()) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def make_report(label: str, elmin_z: float, sigma_star2: float, dim_factor: float,
                source: str = "analytic", stderr: float = 0.0) -> BoundReport:
    """Assemble a report so that its invariants hold by construction."""
    if sigma_star2 < 0:
        raise ValidationError("weak variance must be nonnegative")
    log_dim = math.log(dim_factor) if dim_factor > 1 else 0.0
    lb = elmin_z - math.sqrt(2.0 * sigma_star2 * log_dim)
    rate = math.inf if sigma_star2 == 0 else 1.0 / (2.0 * sigma_star2)
    return BoundReport(label, float(elmin_z), float(stderr), source, float(sigma_star2),
                       float(dim_factor), float(lb), float(dim_factor), rate)


def resolve_elmin(model: GaussianModel, source: ElminSource) -> tuple[float, float, str]:
    if isinstance(source, AnalyticLmin):
        return float(source.value), 0.0, "analytic"
    if isinstance(source, (int, float)):
        return float(source), 0.0, "analytic"
    if isinstance(source, MonteCarloLmin):
        est, se = gm.mc_expected_lmin(model, source.trials, source.seed)
        return est, se, "mc"
    raise ValidationError(f"unknown expected-eigenvalue source {source!r}")


# ---------------------------------------------------------------------------
# randomly weighted sums


@dataclass(frozen=True, eq=False)
class MomentSpec:
    """Per-summand first and second moments of the weights, with optional matrices."""

    m1: np.ndarray
    m2: np.ndarray
    matrices: Optional[tuple] = None

    def __post_init__(self):
        m1 = np.asarray(self.m1, dtype=float).reshape(-1)
        m2 = np.asarray(self.m2, dtype=float).reshape(-1)
        if m1.shape != m2.shape:
            raise ValidationError("m1 and m2 must have equal length")
        if np.any(m1 < 0):
            raise ValidationError("weights are nonnegative, so E W_i >= 0")
        if np.any(m2 < m1 ** 2 * (1 - 1e-12) - 1e-300):
            raise ValidationError("moments violate Jensen: E W_i^2 < (E W_i)^2")
        object.__setattr__(self, "m1", m1)
        object.__setattr__(self, "m2", m2)
        if self.matrices is not None:
            mats = tuple(SymMatrix.of(a) for a in self.matrices)
            if len(mats) != m1.size:
                raise ValidationError("one matrix per weight is required")
            if len({a.dim for a in mats}) != 1:
                raise ValidationError("matrices must share a dimension")
            for a in mats:
                if not is_psd(a, PSD_RTOL):
                    raise ValidationError("coefficient matrices must be psd")
            object.__setattr__(self, "matrices", mats)

    @property
    def dim(self) -> int:
        return self.matrices[0].dim

    @property
    def field(self) -> str:
        return "complex" if any(a.field == "complex" for a in self.matrices) else "real"

    def stack(self) -> np.ndarray:
        dtype = complex if self.field == "complex" else float
        return np.array([a.entries for a in self.matrices], dtype=dtype)

    @classmethod
    def bernoulli(cls, p, matrices) -> "MomentSpec":
        p = np.broadcast_to(np.asarray(p, dtype=float), (len(matrices),))
        return cls(p, p, tuple(matrices))


def _require_matrices(spec: MomentSpec):
    if spec.matrices is None:
        raise ValidationError("this operation needs the coefficient matrices A_i")


def _rank_one_factors(a: np.ndarray, tol: float = 1e-10):
    """Return ``(lam, v)`` with ``a = lam v v*`` and unit ``v``, or None."""
    ev, vec = np.linalg.eigh(a)
    top = ev[-1]
    if top <= 0:
        return 0.0, vec[:, -1]
    if np.all(np.abs(ev[:-1]) <= tol * top):
        return float(top), vec[:, -1]
    return None


def weighted_model(spec: MomentSpec) -> GaussianModel:
    """Gaussian comparison model ``sum_i X_i A_i`` with ``X_i ~ N(E W_i, E W_i^2)``."""
    _require_matrices(spec)
    a = spec.stack()
    shift = np.einsum("i,ijk->jk", spec.m1, a)
    factors = [_rank_one_factors(x) for x in a]
    if all(f is not None for f in factors):
        lam = np.array([f[0] for f in factors])
        vecs = np.array([f[1] for f in factors])
        comp = RankOneSeries(spec.m2 * lam ** 2, vecs)
    else:
        comp = GeneralSeries(np.sqrt(spec.m2)[:, None, None] * a)
    return GaussianModel(spec.dim, spec.field, SymMatrix(shift, spec.field), (comp,))


def weighted_sigma_star2(spec: MomentSpec, restarts: int = 32) -> tuple[float, bool]:
    """Weak variance ``max_u sum_i E W_i^2 (u* A_i u)^2`` and an exactness flag."""
    _require_matrices(spec)
    h = np.sqrt(spec.m2)[:, None, None] * spec.stack()
    exact = gm.commuting_weak_var(h)
    if exact is not None:
        return exact, True
    return gm.estimate_weak_var(h, restarts=restarts), False


def weighted_bounds(spec: MomentSpec, elmin_source: ElminSource,
                    sigma_star2: Optional[float] = None, label: str = "weighted") -> BoundReport:
    """Expectation and tail bounds for ``λ_min(sum_i W_i A_i)`` (dimension factor d)."""
    model = weighted_model(spec)
    if sigma_star2 is None:
        sigma_star2, _ = weighted_sigma_star2(spec)
    elmin, se, src = resolve_elmin(model, elmin_source)
    return make_report(label, elmin, sigma_star2, spec.dim, src, se)


# ---------------------------------------------------------------------------
# iid sums

CALLER_ASSERTED = "caller-asserted"
SAMPLE_CERTIFIED = "sample-certified"
UNCERTIFIED = "uncertified"


@dataclass(frozen=True, eq=False)
class IidSummandSpec:
    """Summand statistics for ``Y = W_1 + ... + W_n`` with iid psd ``W_j``.

    ``component`` is a centered Gaussian whose variance function dominates the
    second-moment function of ``W``.  That domination is an input contract;
    ``certification`` records how it was established.
    """

    mean: SymMatrix
    component: GaussianModel
    n: int
    certification: str = CALLER_ASSERTED
    sampler: Optional[Callable[[np.random.Generator, int], np.ndarray]] = None

    def __post_init__(self):
        mean = SymMatrix.of(self.mean)
        if not is_psd(mean):
            raise ValidationError("summand mean must be psd")
        if int(self.n) < 1:
            raise ValidationError("copy count n must be at least 1")
        if self.component.dim != mean.dim:
            raise ValidationError("component dimension does not match the mean")
        if np.any(self.component.shift.entries != 0):
            raise ValidationError("comparison component must be centered")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "n", int(self.n))

    @property
    def dim(self) -> int:
        return self.mean.dim


def iid_model(spec: IidSummandSpec) -> GaussianModel:
    """``n * E W + sqrt(n) * (X - E X)``."""
    comp = spec.component.scaled(math.sqrt(spec.n))
    return GaussianModel(spec.dim, spec.component.field,
                         SymMatrix(spec.n * spec.mean.entries, spec.component.field),
                         comp.components)


def iid_bounds(spec: IidSummandSpec, elmin_source: ElminSource,
               component_sigma_star2: Optional[float] = None, label: str = "iid") -> BoundReport:
    """Expectation and tail bounds for an iid psd sum (dimension factor 2d)."""
    model = iid_model(spec)
    if component_sigma_star2 is None:
        component_sigma_star2 = gm.stats(spec.component).sigma_star2
    elmin, se, src = resolve_elmin(model, elmin_source)
    return make_report(label, elmin, spec.n * component_sigma_star2, 2 * spec.dim, src, se)


def iid_model_from_samples(samples: Sequence, n: int) -> IidSummandSpec:
    """Empirical stand-in for the summand: mean and second-moment function of a sample.

    With ``m`` samples the component is ``sum_j gamma_j W_j / sqrt(m)``, whose
    variance function equals the empirical ``Mom[W](M) = mean_j <M, W_j>^2``.
    """
    mats = [SymMatrix.of(s) for s in samples]
    if len(mats) < 2:
        raise ValidationError("need at least two samples")
    for s in mats:
        if not is_psd(s):
            raise ValidationError("samples must be psd")
    field = "complex" if any(s.field == "complex" for s in mats) else "real"
    stack = np.array([s.entries for s in mats], dtype=complex if field == "complex" else float)
    m = stack.shape[0]
    comp = GaussianModel(stack.shape[1], field, None, (GeneralSeries(stack / math.sqrt(m)),))
    return IidSummandSpec(SymMatrix(stack.mean(axis=0), field), comp, n, SAMPLE_CERTIFIED)


def certify(spec: IidSummandSpec, samples: int = 20000, probes: int = 200, seed: int = 0,
            sigmas: float = 3.0) -> tuple[bool, float]:
    """Check ``Var[X](M) >= Mom[W](M)`` on random probe matrices using the sampler.

    Returns ``(ok, worst_z)`` where ``worst_z`` is the largest excess of the
    empirical second moment over the model variance, in standard errors.
    """
    if spec.sampler is None:
        raise ValidationError("certification needs a sampler for W")
    from . import rng as _rng

    draws = np.asarray(spec.sampler(_rng.stream(seed, 1), samples))
    g = _rng.stream(seed, 2)
    worst = -math.inf
    d = spec.dim
    for _ in range(probes):
        a = g.standard_normal((d, d))
        if spec.component.field == "complex":
            a = a + 1j * g.standard_normal((d, d))
        probe = 0.5 * (a + a.conj().T)
        ip = np.real(np.einsum("jk,tjk->t", probe.conj(), draws))
        mom = ip ** 2
        excess = float(np.mean(mom)) - gm.var_eval(spec.component, SymMatrix(probe))
        se = float(np.std(mom, ddof=1) / math.sqrt(samples))
        worst = max(worst, excess / se if se > 0 else (math.inf if excess > 0 else -math.inf))
    ok = worst <= sigmas
    return ok, worst


# ---------------------------------------------------------------------------
# scalar and coarse baselines


def _moments(moments) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(moments, dtype=float).reshape(-1, 2)
    m1, m2 = arr[:, 0], arr[:, 1]
    if np.any(m1 < 0) or np.any(m2 < m1 ** 2 * (1 - 1e-12)):
        raise ValidationError("invalid moments: need 0 <= (E W)^2 <= E W^2")
    return m1, m2


def scalar_tail(moments, t: float) -> float:
    """``P{X <= EX - t} <= exp(-t^2 / (2 L2))`` with ``L2 = sum_i E W_i^2``.

    A sum with ``L2 = 0`` is deterministic, so its tail is 0 for ``t > 0``.
    """
    if t < 0:
        raise ValidationError("t must be nonnegative")
    _, m2 = _moments(moments)
    l2 = float(np.sum(m2))
    if t == 0:
        return 1.0
    if l2 == 0:
        return 0.0
    return math.exp(-t * t / (2.0 * l2))


def scalar_mgf_bound(moments, theta):
    """Upper bound ``exp(-theta sum_i E W_i + theta^2 L2 / 2)`` on ``E exp(-theta X)``."""
    m1, m2 = _moments(moments)
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise ValidationError("theta must be nonnegative")
    with np.errstate(over="ignore"):
        return np.exp(-theta * m1.sum() + 0.5 * theta ** 2 * m2.sum())


def epz_bounds(second_moment_sum, expected_sum, label: str = "epz") -> BoundReport:
    """Coarse matrix-concentration bound driven by ``L2 = ||sum_i E W_i^2||``."""
    s2 = SymMatrix.of(second_moment_sum)
    ey = SymMatrix.of(expected_sum)
    if not is_psd(s2):
        raise ValidationError("second moment sum must be psd")
    if s2.dim != ey.dim:
        raise ValidationError("dimension mismatch")
    l2 = spectral_norm(s2)
    return make_report(label, lambda_min(ey), l2, ey.dim)


def bern_lb(model: GaussianModel) -> float:
    """``λ_min(EZ) - 2 sqrt(2 σ²(Z) log(2d))``."""
    sigma2 = gm.stats(model).sigma2 if model.components else 0.0
    return lambda_min(model.shift) - 2.0 * math.sqrt(2.0 * sigma2 * math.log(2 * model.dim))
