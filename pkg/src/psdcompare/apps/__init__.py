"""Application suites: Wishart, projective designs, covariance, sparse sketching."""
from .covariance import (CovarianceProblem, mom, scov_sample_size, sparse_cov_report,
                         sparse_cov_sample_size)
from .designs import DesignSystem, check_design, design_sampling_plan, mub_c2
from .sketching import (SparseSketch, apply_sketch, coherence, injection_lmin, injection_model,
                        make_sketch, practical_preset, sketch_params)
from .wishart import wishart_nonexample_report, wishart_report

__all__ = [
    "CovarianceProblem", "DesignSystem", "SparseSketch", "apply_sketch", "check_design",
    "coherence", "design_sampling_plan", "injection_lmin", "injection_model", "make_sketch",
    "mom", "mub_c2", "practical_preset", "scov_sample_size", "sketch_params",
    "sparse_cov_report", "sparse_cov_sample_size", "wishart_nonexample_report", "wishart_report",
]
