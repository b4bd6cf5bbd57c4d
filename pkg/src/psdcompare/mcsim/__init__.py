"""Verification harness: scenarios, MC comparisons, exact lemma checks, figure data."""
from .figures import emit_figure_data
from .lemmas import (bernoulli, covcm_check, exponential, poissonization_check, two_point,
                     uniform01)
from .scenarios import Scenario, builtin_scenarios
from .verify import VerificationReport, verify_poly_moment, verify_tail, verify_trace_mgf

__all__ = [
    "Scenario", "VerificationReport", "bernoulli", "builtin_scenarios", "covcm_check",
    "emit_figure_data", "exponential", "poissonization_check", "two_point", "uniform01",
    "verify_poly_moment", "verify_tail", "verify_trace_mgf",
]
