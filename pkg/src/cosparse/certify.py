"""Certificates: first-order optimality of candidate solutions, closed-form
predictions in the small-noise regime, and the bounded-noise recovery check.

A candidate x is optimal iff some dual vector sigma with max norm at most
one closes the stationarity equation

    phi*(phi x - y) + lambda D_I s_I + lambda D_J sigma = 0,

where s is the sign pattern of D* x.  Strict dual feasibility together with
restricted injectivity on the cospace upgrades optimality to uniqueness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import operators
from .decomposition import d_support, theorem_constants
from .errors import NotApplicable
from .solvers import SolveConfig, solve_lasso

_STRICT_MARGIN = 1e-8


@dataclass(frozen=True)
class CertificateReport:
    support_I: np.ndarray
    cosupport_J: np.ndarray
    sigma: np.ndarray
    stationarity_residual: float
    sigma_inf_norm: float
    certified: bool
    strictly_dual_feasible: bool
    certified_unique: bool
    sign_match_with: bool | None = None

    def summary(self):
        """JSON-ready digest; index sets are reported 1-based."""
        return {
            "support": [int(i) + 1 for i in self.support_I],
            "cosupport_size": int(self.cosupport_J.size),
            "stationarity_residual": float(self.stationarity_residual),
            "sigma_inf_norm": float(self.sigma_inf_norm),
            "certified": bool(self.certified),
            "strictly_dual_feasible": bool(self.strictly_dual_feasible),
            "certified_unique": bool(self.certified_unique),
            "sign_match": None if self.sign_match_with is None else bool(self.sign_match_with),
        }


def first_order_certificate(phi, dictionary, y, lam, x, reference_signs=None):
    """Check the stationarity system for a candidate solution.

    The dual vector is the least-squares solution of
    ``D_J sigma = -(phi*(phi x - y) + lambda D_I s_I) / lambda``; the
    candidate is certified optimal when the residual is at most
    ``1e-6 (1 + ||phi* y||)`` and ``||sigma||_inf <= 1 + 1e-8``.
    """
    if lam <= 0:
        raise NotApplicable("certificates need lambda > 0")
    x = operators.as_signal(x, dictionary.n, "candidate")
    y = operators.as_signal(y, phi.out_dim, "observations")
    s = d_support(x, dictionary)
    I, J = s.support, s.cosupport
    D_I = dictionary.columns(I)
    D_J = dictionary.columns(J)
    grad = phi.adjoint_apply(phi.apply(x) - y)
    rhs = (grad + lam * (D_I @ s.signs[I].astype(float))) / lam
    if J.size:
        sigma, *_ = np.linalg.lstsq(D_J, -rhs, rcond=None)
        residual = float(np.linalg.norm(D_J @ sigma + rhs))
        # The least-squares sigma is only one representative: when the
        # cosupport columns are linearly dependent, any kernel shift closes
        # the same equation, so dual feasibility is decided by the
        # minimal-max-norm representative.
        kernel = operators.nullspace(D_J)
        if kernel.shape[1] > 0:
            from .criteria import DRConfig, _min_linf_over_kernel
            _, shift, _, _ = _min_linf_over_kernel(sigma, kernel, DRConfig())
            sigma = sigma - shift
        sigma_inf = float(np.abs(sigma).max())
    else:
        sigma = np.zeros(0)
        residual = float(np.linalg.norm(rhs))
        sigma_inf = 0.0
    scale = 1.0 + float(np.linalg.norm(phi.adjoint_apply(y)))
    certified = residual <= 1e-6 * scale and sigma_inf <= 1.0 + _STRICT_MARGIN
    strict = sigma_inf < 1.0 - _STRICT_MARGIN
    unique = False
    if certified and strict:
        # uniqueness also needs the forward operator injective on the cospace
        from .decomposition import cospace_basis
        U = cospace_basis(dictionary, J)
        if U.shape[1] == 0:
            unique = True
        else:
            PU = phi.materialize() @ U
            svals = np.linalg.svd(PU, compute_uv=False)
            tol = operators.rank_tolerance(svals, PU.shape)
            unique = int((svals > tol).sum()) == U.shape[1]
    match = None
    if reference_signs is not None:
        ref = reference_signs.signs if hasattr(reference_signs, "signs") else np.asarray(reference_signs)
        match = bool(np.array_equal(s.signs, ref))
    return CertificateReport(support_I=I, cosupport_J=J, sigma=sigma,
                             stationarity_residual=residual,
                             sigma_inf_norm=sigma_inf,
                             certified=certified,
                             strictly_dual_feasible=strict,
                             certified_unique=unique,
                             sign_match_with=match)


def closed_form_small_noise(dec, x0, w, lam, s=None):
    """Predicted solution  x0 + A_J phi* w - lambda A_J D_I s_I.

    Valid (and unique) when the identifiability criterion is below one and
    lambda lies in the window returned by :func:`small_noise_window`; the
    formula itself is evaluated unconditionally.
    """
    x0 = operators.as_signal(x0, dec.n, "x0")
    w = operators.as_signal(w, dec.q, "noise")
    if s is None:
        s = d_support(x0, dec.dictionary)
    signs = s.signs if hasattr(s, "signs") else np.asarray(s)
    D_I = dec.dictionary.columns(dec.I)
    correction = dec.A_J @ (dec.phi.adjoint_apply(w) - lam * (D_I @ signs[dec.I].astype(float)))
    return x0 + correction


@dataclass(frozen=True)
class SmallNoiseWindow:
    lo: float
    hi: float
    T: float

    @property
    def empty(self):
        return not self.lo < self.hi

    @property
    def midpoint(self):
        return 0.5 * (self.lo + self.hi)


def small_noise_window(dec, x0, w, ic):
    """Admissible lambda window (c ||w||, T c~) for exact sign recovery.

    ``T`` is the smallest active analysis magnitude of x0.  The window may
    be empty when the noise is too large; callers decide how to react.
    """
    if ic >= 1.0:
        raise NotApplicable("small-noise window needs an identifiability criterion below one")
    x0 = operators.as_signal(x0, dec.n, "x0")
    w = operators.as_signal(w, dec.q, "noise")
    if dec.I.size == 0:
        raise NotApplicable("empty support: nothing to recover")
    coeffs = dec.dictionary.analysis(x0)
    T = float(np.abs(coeffs[dec.I]).min())
    consts = theorem_constants(dec, ic=ic)
    lo = consts.c_small * float(np.linalg.norm(w))
    hi = T * consts.c_tilde
    return SmallNoiseWindow(lo=lo, hi=hi, T=T)


def sign_inconsistency_check(dec, x0, w, lam, ic, solve_config=None):
    """Observe the sharpness of the identifiability criterion above one.

    When ``||b_J w||_inf / lambda < ic - 1`` no solution can reproduce the
    sign pattern of x0.  Returns True when the hypothesis holds and the
    solver's solution indeed has a different pattern.
    """
    if ic <= 1.0:
        raise NotApplicable("check applies only when the criterion exceeds one")
    x0 = operators.as_signal(x0, dec.n, "x0")
    w = operators.as_signal(w, dec.q, "noise")
    if lam <= 0:
        raise NotApplicable("lambda must be positive")
    gap = float(np.abs(dec.b_J @ w).max()) / lam if dec.J.size else 0.0
    if gap >= ic - 1.0:
        return False
    y = dec.phi.apply(x0) + w
    cfg = solve_config or SolveConfig(lam=lam)
    if cfg.lam != lam:
        cfg = SolveConfig(lam=lam, max_iters=cfg.max_iters, tol=cfg.tol,
                          theta=cfg.theta, step_ratio=cfg.step_ratio)
    report = solve_lasso(dec.phi, dec.dictionary, y, cfg)
    s0 = d_support(x0, dec.dictionary)
    s_hat = d_support(report.solution, dec.dictionary)
    return not np.array_equal(s0.signs, s_hat.signs)


@dataclass(frozen=True)
class NoiseTheoremReport:
    lambda_used: float
    l2_error: float
    bound: float
    support_included: bool
    solver_converged: bool


def _norm_inf_to_2(m, cap=16):
    """``max ||M p||_2 over ||p||_inf <= 1``: exact vertex maximum for few
    columns, column-norm sum beyond (a valid upper bound)."""
    m = np.asarray(m, dtype=float)
    k = m.shape[1]
    if k == 0:
        return 0.0
    if k <= cap:
        best = 0.0
        from itertools import product
        for tail in product((1.0, -1.0), repeat=k - 1):
            p = np.concatenate([[1.0], tail])
            best = max(best, float(np.linalg.norm(m @ p)))
        return best
    return float(np.linalg.norm(m, axis=0).sum())


def noise_theorem_check(dec, x0, w, rho, arc, solve_config=None):
    """Bounded-noise recovery check with lambda fixed by the theory.

    Sets ``lambda = rho ||w|| c / (1 - arc)`` with rho > 1, solves, and
    verifies that the recovered support is contained in I and the l2 error
    stays below the theoretical bound.  Not applicable for zero noise (the
    formula would give lambda = 0).
    """
    if arc >= 1.0:
        raise NotApplicable("bounded-noise theorem needs a recovery criterion below one")
    if rho <= 1.0:
        raise ValueError("rho must exceed one")
    x0 = operators.as_signal(x0, dec.n, "x0")
    w = operators.as_signal(w, dec.q, "noise")
    w_norm = float(np.linalg.norm(w))
    if w_norm == 0.0:
        raise NotApplicable("zero noise gives lambda = 0; use the constrained solver instead")
    c = theorem_constants(dec).c_noise
    lam = rho * w_norm * c / (1.0 - arc)
    y = dec.phi.apply(x0) + w
    base = solve_config or SolveConfig()
    cfg = SolveConfig(lam=lam, max_iters=base.max_iters, tol=base.tol,
                      theta=base.theta, step_ratio=base.step_ratio)
    report = solve_lasso(dec.phi, dec.dictionary, y, cfg)
    D_I = dec.dictionary.columns(dec.I)
    # the active-atom factor must dominate ||D_I p||_2 over all sign
    # patterns p, i.e. the (inf,2) induced norm
    bound = (operators.op_norm(dec.A_J, 2, 2) * w_norm
             * (operators.op_norm(dec.phi.materialize(), 2, 2)
                + rho * c * _norm_inf_to_2(D_I) / (1.0 - arc)))
    s_hat = d_support(report.solution, dec.dictionary)
    included = bool(np.isin(s_hat.support, dec.I).all())
    err = float(np.linalg.norm(x0 - report.solution))
    return NoiseTheoremReport(lambda_used=lam, l2_error=err, bound=bound,
                              support_included=included,
                              solver_converged=report.converged)
