"""Monte Carlo checks of the trace-mgf, polynomial-moment and tail comparisons."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .. import rng as _rng
from ..gaussmodel import sample_batch
from ..matcore import ValidationError
from .scenarios import Scenario

SIGMAS = 3.0
Y_STREAM, Z_STREAM, E_STREAM = 0x59, 0x5A, 0x5B


@dataclass(frozen=True)
class GridRow:
    grid_value: float
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float
    bound: float  # acceptance threshold for lhs
    passed: bool

    @classmethod
    def schema(cls) -> list[str]:
        return ["grid_value", "lhs", "lhs_se", "rhs", "rhs_se", "bound", "pass"]

    def as_row(self) -> dict:
        return dict(zip(self.schema(), (self.grid_value, self.lhs, self.lhs_se, self.rhs,
                                         self.rhs_se, self.bound, self.passed)))


@dataclass(frozen=True)
class VerificationReport:
    name: str
    kind: str
    rows: tuple
    slack: str
    seed: int = 0
    trials: int = 0
    notes: str = ""

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def table(self) -> list[dict]:
        return [r.as_row() for r in self.rows]


def stat_row(x: float, lhs: float, se_l: float, rhs: float, se_r: float, slack: float = SIGMAS) -> GridRow:
    """Apply the one-sided rule ``lhs <= rhs + slack * sqrt(se_l^2 + se_r^2)``."""
    thr = rhs + slack * math.hypot(se_l, se_r)
    return GridRow(float(x), float(lhs), float(se_l), float(rhs), float(se_r), float(thr), bool(lhs <= thr))


# ---------------------------------------------------------------------------
# sampling helpers


def _spectra(sc: Scenario, trials: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of ``Y - EY + Δ`` and of ``Z + Δ`` over independent draws."""
    off = sc.shift.entries - sc.mean.entries
    delta = sc.shift.entries

    def yblock(i, count):
        return np.linalg.eigvalsh(sc.draw(seed, i, count) + off)

    def zblock(i, count):
        return np.linalg.eigvalsh(sample_batch(sc.model, seed, i, count, Z_STREAM) + delta)

    ey = _rng.concat_blocks(_rng.map_blocks(yblock, trials))
    ez = _rng.concat_blocks(_rng.map_blocks(zblock, trials))
    return ey, ez


def log_trace_exp(ev: np.ndarray, theta: float) -> np.ndarray:
    """``log Tr exp(-θ M)`` from the spectra of ``M`` (rows), stable for large arguments."""
    return logsumexp(-theta * ev, axis=-1)


def _mean_se_log(logs: np.ndarray) -> tuple[float, float, float]:
    """Mean and stderr of ``exp(logs)`` as ``(shift, mean, se)`` with values scaled by ``exp(-shift)``."""
    s = float(np.max(logs))
    v = np.exp(logs - s)
    return s, float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def _check_trials(trials: int, minimum: int = 2):
    if trials < minimum:
        raise ValidationError(f"need at least {minimum} trials")


# ---------------------------------------------------------------------------
# public checks


def verify_trace_mgf(sc: Scenario, thetas: Sequence[float], trials: int = 10 ** 5, seed: int = 0,
                     factor: Optional[int] = None) -> VerificationReport:
    """``E Tr e^{-θ(Y - EY + Δ)} <= factor * E Tr e^{-θ(Z + Δ)}`` on a θ grid."""
    factor = sc.factor if factor is None else factor
    _check_trials(trials)
    ey, ez = _spectra(sc, trials, seed)
    rows = []
    for th in thetas:
        if th < 0:
            raise ValidationError("theta must be nonnegative")
        sl, ml, el = _mean_se_log(log_trace_exp(ey, th))
        sr, mr, er = _mean_se_log(log_trace_exp(ez, th) + math.log(factor))
        # put both sides on a common scale before applying the slack rule
        s = max(sl, sr)
        row = stat_row(th, ml * math.exp(sl - s), el * math.exp(sl - s),
                       mr * math.exp(sr - s), er * math.exp(sr - s))
        scale = math.exp(s) if s < 700 else math.inf
        rows.append(GridRow(row.grid_value, row.lhs * scale, row.lhs_se * scale, row.rhs * scale,
                            row.rhs_se * scale, row.bound * scale, row.passed))
    return VerificationReport(sc.name, "trace-mgf", tuple(rows), f"{SIGMAS:g}-sigma one-sided",
                              seed, trials, f"factor={factor}")


def verify_poly_moment(sc: Scenario, ps: Sequence[float] = (4,), trials: int = 10 ** 5, seed: int = 0,
                       factor: Optional[int] = None) -> VerificationReport:
    """``E Tr (Y - EY + Δ)_-^p <= factor * E Tr (Z + Δ)_-^p`` for ``p >= 4``."""
    factor = sc.factor if factor is None else factor
    if any(p < 4 for p in ps):
        raise ValidationError("polynomial comparison needs p >= 4")
    _check_trials(trials)
    ey, ez = _spectra(sc, trials, seed)
    rows = []
    for p in ps:
        fy = np.sum(np.maximum(-ey, 0.0) ** p, axis=1)
        fz = factor * np.sum(np.maximum(-ez, 0.0) ** p, axis=1)
        rows.append(stat_row(p, fy.mean(), fy.std(ddof=1) / math.sqrt(trials),
                             fz.mean(), fz.std(ddof=1) / math.sqrt(trials)))
    return VerificationReport(sc.name, "poly-moment", tuple(rows), f"{SIGMAS:g}-sigma one-sided",
                              seed, trials, f"factor={factor}")


def expected_lmin_shifted(sc: Scenario, trials: int, seed: int) -> tuple[float, float]:
    delta = sc.shift.entries

    def block(i, count):
        return np.linalg.eigvalsh(sample_batch(sc.model, seed, i, count, E_STREAM) + delta)[:, 0]

    x = _rng.concat_blocks(_rng.map_blocks(block, trials))
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(trials))


def verify_tail(sc: Scenario, ts: Sequence[float], trials: int = 10 ** 4, seed: int = 0,
                elmin: Optional[float] = None, z_trials: Optional[int] = None,
                sigma_star2: Optional[float] = None) -> VerificationReport:
    """Empirical ``P{λ_min(Y - EY + Δ) <= E λ_min(Z + Δ) - t}`` against ``dim_factor e^{-t²/(2σ*²)}``.

    ``E λ_min(Z + Δ)`` is estimated by MC on a separate stream unless an
    analytic lower bound ``elmin`` is supplied (a lower bound only makes the
    event rarer).  The MC threshold is lowered by three standard errors and
    the bound is compared with the frequency plus a binomial three-sigma band.
    """
    _check_trials(trials)
    s2 = sc.sigma_star2 if sigma_star2 is None else sigma_star2
    if elmin is None:
        est, se = expected_lmin_shifted(sc, z_trials or trials, seed)
        src = f"mc({est:.6g}+-{se:.3g})"
    else:
        est, se, src = float(elmin), 0.0, "analytic"
    off = sc.shift.entries - sc.mean.entries

    def block(i, count):
        return np.linalg.eigvalsh(sc.draw(seed, i, count) + off)[:, 0]

    lam = _rng.concat_blocks(_rng.map_blocks(block, trials))
    rows = []
    for t in ts:
        if t < 0:
            raise ValidationError("t must be nonnegative")
        freq = float(np.mean(lam <= est - SIGMAS * se - t))
        bound = min(1.0, sc.dim_factor * math.exp(-t * t / (2.0 * s2))) if s2 > 0 else float(t == 0)
        band = SIGMAS * math.sqrt(bound * (1.0 - bound) / trials)
        thr = bound + band
        rows.append(GridRow(float(t), freq, math.sqrt(freq * (1 - freq) / trials), bound,
                            0.0, thr, bool(freq <= thr)))
    return VerificationReport(sc.name, "tail", tuple(rows), "binomial 3-sigma + threshold shift",
                              seed, trials, f"elmin={src};dim_factor={sc.dim_factor};sigma_star2={s2:.6g}")
