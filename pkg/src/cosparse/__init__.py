"""Sparse analysis regularization for 1-D linear inverse problems.

Solvers for the analysis-penalized least-squares problem and its
equality-constrained limit, exact computation of the identifiability and
recovery criteria, first-order optimality certificates with closed-form
theorem predictions, and the accompanying numerical studies.
"""

__version__ = "0.1.0"

from .criteria import (CriterionResult, DRConfig, compute_arc, compute_erc,
                       compute_ic, compute_ic_fuchs, compute_warc,
                       project_l1_ball, prox_linf, tv_dual_vector)
from .decomposition import (CosparseDecomposition, SignVector, TheoremConstants,
                            build_decomposition, check_h0, cospace_basis,
                            d_support, theorem_constants)
from .dictionaries import (Dictionary, make_fused, make_haar, make_identity,
                           make_tv)
from .certify import (CertificateReport, NoiseTheoremReport, SmallNoiseWindow,
                      closed_form_small_noise, first_order_certificate,
                      noise_theorem_check, sign_inconsistency_check,
                      small_noise_window)
from .operators import (LinearOperator, circular_gaussian_blur, compose, dense,
                        gaussian_random_matrix, hstack, identity, nullspace,
                        op_norm, pseudoinverse, scaled)
from .solvers import (SolveConfig, SolverReport, soft_threshold, solve_bp,
                      solve_denoise_dual, solve_lasso)
from .estimators import AnalysisLasso
