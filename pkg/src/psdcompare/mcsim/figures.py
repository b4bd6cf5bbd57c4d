"""Data behind the scalar and 2 x 2 comparison figures (CSV only; no plotting)."""
from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.stats import norm

from .. import rng as _rng
from ..matcore import ValidationError

WEIGHTS = ("const", "chi2", "bernoulli", "exponential")


def _weights(kind: str, g: np.random.Generator, shape, p: float = 0.5) -> np.ndarray:
    if kind == "const":
        return np.ones(shape)
    if kind == "chi2":
        return _rng.normal(g, shape) ** 2
    if kind == "bernoulli":
        return (_rng.uniform_open(g, shape) < p).astype(float)
    if kind == "exponential":
        return -np.log(_rng.uniform_open(g, shape))
    raise ValidationError(f"unknown weight law {kind!r}; choose from {WEIGHTS}")


def _moments(kind: str, p: float = 0.5) -> tuple[float, float]:
    return {"const": (1.0, 1.0), "chi2": (1.0, 3.0), "bernoulli": (p, p),
            "exponential": (1.0, 2.0)}[kind]


def _ecdf(x: np.ndarray, grid: np.ndarray) -> np.ndarray:
    xs = np.sort(x)
    return np.searchsorted(xs, grid, side="right") / xs.size


def _lower_tail(mean: float, l2: float, grid: np.ndarray) -> np.ndarray:
    dev = np.maximum(mean - grid, 0.0)
    return np.exp(-dev ** 2 / (2.0 * l2)) if l2 > 0 else (grid >= mean).astype(float)


def emit_figure_data(kind: str = "sum1d", n: int = 20, weight: str = "chi2", trials: int = 20000,
                     seed: int = 0, points: int = 101, p: float = 0.5,
                     grid: Optional[np.ndarray] = None) -> tuple[list[str], list[dict]]:
    """Empirical CDFs of a positive sum next to its matching Gaussian and tail bound.

    ``sum1d``: ``Y = W_1 + ... + W_n``.  ``sum2x2``: ``Y`` is a sum of ``n``
    diagonal 2 x 2 matrices with independent entries; its minimum eigenvalue
    is the smaller coordinate.  The Gaussian has mean ``n E W`` and variance
    ``n E W^2``.
    """
    m1, m2 = _moments(weight, p)
    mean, l2 = n * m1, n * m2
    g = _rng.stream(seed, 0xF1)
    if grid is None:
        sd = math.sqrt(l2)
        grid = np.linspace(mean - 4 * sd, mean + 4 * sd, points)
    grid = np.asarray(grid, dtype=float)
    gauss = norm.cdf(grid, loc=mean, scale=math.sqrt(l2))
    tail = _lower_tail(mean, l2, grid)
    if kind == "sum1d":
        y = _weights(weight, g, (trials, n), p).sum(axis=1)
        schema = ["x", "ecdf", "gauss_cdf", "tail_bound"]
        cols = (grid, _ecdf(y, grid), gauss, tail)
    elif kind == "sum2x2":
        y = _weights(weight, g, (trials, n, 2), p).sum(axis=1)
        lmin = y.min(axis=1)
        schema = ["x", "ecdf_min", "ecdf_coord1", "ecdf_coord2", "gauss_cdf_min", "tail_bound"]
        cols = (grid, _ecdf(lmin, grid), _ecdf(y[:, 0], grid), _ecdf(y[:, 1], grid),
                1.0 - (1.0 - gauss) ** 2, np.minimum(1.0, 2.0 * tail))
    else:
        raise ValidationError("figure kind must be sum1d or sum2x2")
    rows = [dict(zip(schema, map(float, vals))) for vals in zip(*cols)]
    return schema, rows
