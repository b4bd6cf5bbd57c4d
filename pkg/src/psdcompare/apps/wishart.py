"""Real Wishart matrices ``Y = sum_{i<=n} g_i g_i^T`` with standard normal ``g_i``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..compare import BoundReport, bern_lb, make_report
from ..gaussmodel import GOE, GaussianModel, Scalar
from ..matcore import SymMatrix, ValidationError


@dataclass(frozen=True)
class WishartResult:
    report: BoundReport
    model: GaussianModel
    rescaled_lb: float  # expectation_lb / n
    ratio: float  # d / n


def _check(d: int, n: int):
    if int(d) != d or int(n) != n or d < 1 or n < 1:
        raise ValidationError("Wishart parameters need integers d >= 1 and n >= 1")


def wishart_model(d: int, n: int) -> GaussianModel:
    """``n I + sqrt(n) gamma I + sqrt(n) G_goe``; its variance function is ``n (2||M||_F^2 + (Tr M)^2)``."""
    _check(d, n)
    rn = math.sqrt(n)
    return GaussianModel(d, "real", SymMatrix(n * np.eye(d)), (Scalar(rn), GOE(rn)))


def analytic_elmin(d: int, n: int) -> float:
    # the GOE edge gives E λ_min(G_goe) >= -2 sqrt(d); the scalar part has mean zero
    return n - 2.0 * math.sqrt(d * n)


def wishart_report(d: int, n: int) -> WishartResult:
    """Comparison bound ``n - 2 sqrt(dn) - sqrt(6 n log 2d)`` with ``σ*² = 3n``."""
    model = wishart_model(d, n)
    rep = make_report("wishart", analytic_elmin(d, n), 3.0 * n, 2 * d)
    return WishartResult(rep, model, rep.expectation_lb / n, d / n)


def rescaled_bound(ratio: float) -> float:
    """Leading-order form ``1 - 2 sqrt(d/n)`` of the normalized bound."""
    return 1.0 - 2.0 * math.sqrt(ratio)


def bai_yin_limit(ratio: float) -> float:
    return (1.0 - math.sqrt(ratio)) ** 2


def nontrivial_threshold(d: int) -> float:
    """The bound is positive once ``n`` exceeds ``(2 sqrt(d) + sqrt(6 log 2d))^2``."""
    return (2.0 * math.sqrt(d) + math.sqrt(6.0 * math.log(2 * d))) ** 2


def wishart_nonexample_report(d: int, n: int) -> BoundReport:
    """Treat the whole Wishart matrix as one summand (n = 1 copy).

    The single-copy weak variance is ``n^2 + 2n``, which makes the resulting
    bound ``n - 2 sqrt(dn) - n sqrt(2 (1 + 2/n) log 2d)`` negative.
    """
    _check(d, n)
    rep = make_report("wishart-nonexample", analytic_elmin(d, n), float(n * n + 2 * n), 2 * d)
    if not rep.expectation_lb < 0:
        raise AssertionError("single-copy Wishart bound unexpectedly nonnegative")
    return rep


def wishart_bern_lb(d: int, n: int) -> float:
    return bern_lb(wishart_model(d, n))


def sample_wishart(g: np.random.Generator, count: int, d: int, n: int) -> np.ndarray:
    from .. import rng as _rng

    x = _rng.normal(g, (count, n, d))
    return np.einsum("tij,tik->tjk", x, x)
