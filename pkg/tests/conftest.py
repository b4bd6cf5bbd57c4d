import numpy as np
import pytest

ACCEPTANCE_LINES = []


def sturm_count(a: np.ndarray, x: float) -> int:
    """Number of eigenvalues of the real symmetric ``a`` below ``x``.

    By Sylvester's law of inertia this equals the number of negative pivots in
    an LDL^T factorization of ``a - x I`` (no pivoting; zero pivots nudged).
    """
    m = np.array(a, dtype=float) - x * np.eye(a.shape[0])
    n = m.shape[0]
    neg = 0
    for k in range(n):
        piv = m[k, k]
        if piv == 0.0:
            piv = 1e-300
        if piv < 0:
            neg += 1
        if k + 1 < n:
            col = m[k + 1:, k] / piv
            m[k + 1:, k + 1:] -= np.outer(col, m[k, k + 1:])
    return neg


def bisection_eigvals(a: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by bisection on inertia counts."""
    n = a.shape[0]
    radius = np.max(np.sum(np.abs(a), axis=1))  # Gershgorin
    out = []
    for j in range(n):
        lo, hi = -radius - 1.0, radius + 1.0
        while hi - lo > tol * max(1.0, radius):
            mid = 0.5 * (lo + hi)
            if sturm_count(a, mid) > j:
                hi = mid
            else:
                lo = mid
        out.append(0.5 * (lo + hi))
    return np.array(out)


@pytest.fixture
def oracle_eigvals():
    return bisection_eigvals


def record_acceptance(number: int, passed: bool, text: str):
    ACCEPTANCE_LINES.append((number, passed, text))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, text in sorted(ACCEPTANCE_LINES, key=lambda x: x[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {text}")
