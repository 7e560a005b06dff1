"""Recovery criteria: identifiability (IC), worst-case over signs (ARC),
its operator-norm relaxation (wARC), and the synthesis-case specializations.

The identifiability criterion is the distance, in the max norm, from
``omega_J s_I`` to the kernel of D_J.  With a trivial kernel the distance is
the norm itself; otherwise it is computed by Douglas-Rachford splitting on
the indicator of the kernel plus the translated max norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import NamedTuple

import numpy as np

from . import operators
from .decomposition import SignVector, d_support
from .errors import NotApplicable, PreconditionError


def project_l1_ball(x, radius=1.0):
    """Euclidean projection onto the l1 ball of the given radius.

    Points already inside the ball are returned unchanged; otherwise the
    classic sort-and-shift soft threshold is applied.
    """
    x = np.asarray(x, dtype=float)
    if radius <= 0:
        raise ValueError("radius must be positive")
    mag = np.abs(x)
    if mag.sum() <= radius:
        return x.copy()
    u = np.sort(mag)[::-1]
    cumulative = np.cumsum(u)
    counts = np.arange(1, u.size + 1)
    last = np.nonzero(u - (cumulative - radius) / counts > 0)[0].max()
    theta = (cumulative[last] - radius) / (last + 1.0)
    return np.sign(x) * np.maximum(mag - theta, 0.0)


def prox_linf(x, gamma):
    """Proximity operator of gamma * max-norm, via Moreau decomposition:
    prox(x) = x - gamma * proj_{l1 <= 1}(x / gamma)."""
    x = np.asarray(x, dtype=float)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return x - gamma * project_l1_ball(x / gamma, 1.0)


@dataclass(frozen=True)
class DRConfig:
    """Douglas-Rachford settings (step and relaxation default to 1)."""

    step: float = 1.0
    relaxation: float = 1.0
    tol: float = 1e-10
    max_iters: int = 50_000
    # successive-objective stalls required before declaring convergence
    patience: int = 5


@dataclass(frozen=True)
class CriterionResult:
    value: float
    minimizer_u: np.ndarray
    iterations: int
    converged: bool
    vertex: np.ndarray | None = None


def _norm_inf(v):
    return float(np.abs(v).max()) if v.size else 0.0


def _min_linf_over_kernel(c, kernel, config):
    """min over u in span(kernel) of ||c - u||_inf by Douglas-Rachford.

    ``kernel`` has orthonormal columns.  Returns (value, minimizer,
    iterations, converged); the returned pair is the best feasible point
    seen, so the value never exceeds ||c||_inf.
    """
    if kernel.size == 0 or kernel.shape[1] == 0:
        return _norm_inf(c), np.zeros_like(c), 0, True
    gamma = config.step
    z = np.zeros_like(c)
    best_val = _norm_inf(c)
    best_u = np.zeros_like(c)
    prev = np.inf
    stall = 0
    iters = 0
    converged = False
    for iters in range(1, config.max_iters + 1):
        u = kernel @ (kernel.T @ z)
        reflected = 2.0 * u - z
        # prox of gamma*||c - .||_inf via translation
        v = c - prox_linf(c - reflected, gamma)
        z = z + config.relaxation * (v - u)
        obj = _norm_inf(c - u)
        if obj < best_val:
            best_val = obj
            best_u = u
        if abs(obj - prev) <= config.tol:
            stall += 1
            if stall >= config.patience:
                converged = True
                break
        else:
            stall = 0
        prev = obj
    return best_val, best_u, iters, converged


def compute_ic(dec, s, config=None):
    """Identifiability criterion of a sign vector supported on dec's support.

    With a trivial kernel the value is exactly ``||omega_J s_I||_inf`` and no
    iterations are spent; otherwise Douglas-Rachford runs until the
    successive-objective change stays below the tolerance.
    """
    config = config or DRConfig()
    if isinstance(s, SignVector):
        signs = s.signs
    else:
        signs = SignVector(np.asarray(s)).signs
    if signs.shape[0] != dec.p:
        raise ValueError("sign vector length must match the number of atoms")
    if np.any(signs[dec.J] != 0):
        raise PreconditionError("sign vector must be supported on the decomposition support")
    if dec.I.size == 0:
        return CriterionResult(0.0, np.zeros(dec.J.size), 0, True)
    c = dec.omega_J @ signs[dec.I].astype(float)
    value, u, iters, converged = _min_linf_over_kernel(c, dec.kernel_J, config)
    return CriterionResult(value, u, iters, converged)


def compute_ic_fuchs(psi, s):
    """Synthesis-case identifiability criterion ``||psi_J* psi_I^{+,*} s_I||_inf``.

    Requires the active columns to be linearly independent.
    """
    psi = operators.as_matrix(psi)
    signs = s.signs if isinstance(s, SignVector) else SignVector(np.asarray(s)).signs
    I = np.flatnonzero(signs)
    J = np.flatnonzero(signs == 0)
    omega = _synthesis_transfer(psi, I, J)
    return _norm_inf(omega @ signs[I].astype(float))


def compute_erc(psi, I):
    """Exact recovery coefficient of a support: ``||psi_J* psi_I^{+,*}||_{inf,inf}``."""
    psi = operators.as_matrix(psi)
    I = np.asarray(sorted(set(int(i) for i in I)), dtype=int)
    mask = np.ones(psi.shape[1], dtype=bool)
    mask[I] = False
    omega = _synthesis_transfer(psi, I, np.flatnonzero(mask))
    return operators.op_norm(omega, np.inf, np.inf) if omega.size else 0.0


def _synthesis_transfer(psi, I, J):
    psi_i = psi[:, I]
    if I.size:
        svals = np.linalg.svd(psi_i, compute_uv=False)
        tol = operators.rank_tolerance(svals, psi_i.shape)
        if int((svals > tol).sum()) < I.size:
            raise PreconditionError("active columns are rank deficient")
    return psi[:, J].T @ operators.pseudoinverse(psi_i).T


def compute_arc(dec, cap=16, config=None):
    """Recovery criterion of the support: worst identifiability value over
    all sign patterns on I.

    The inner objective is convex in the pattern, so the maximum sits at a
    vertex of the hypercube; all patterns are enumerated (global sign flips
    give equal values, so only patterns with leading +1 are visited).
    Refuses supports larger than ``cap``.
    """
    config = config or DRConfig()
    size = int(dec.I.size)
    if size > cap:
        raise PreconditionError(
            f"support size {size} exceeds cap {cap}: vertex enumeration needs 2^{size} solves")
    if size == 0:
        return CriterionResult(0.0, np.zeros(dec.J.size), 0, True,
                               vertex=np.zeros(0))
    best = CriterionResult(-np.inf, np.zeros(dec.J.size), 0, True)
    total_iters = 0
    all_converged = True
    for tail in product((1.0, -1.0), repeat=size - 1):
        pattern = np.concatenate([[1.0], tail])
        c = dec.omega_J @ pattern
        value, u, iters, converged = _min_linf_over_kernel(c, dec.kernel_J, config)
        total_iters += iters
        all_converged = all_converged and converged
        if value > best.value:
            best = CriterionResult(value, u, 0, True, vertex=pattern)
    return CriterionResult(best.value, best.minimizer_u, total_iters,
                           all_converged, vertex=best.vertex)


def compute_warc(dec):
    """Upper bound on the recovery criterion: ``||omega_J||_{inf,inf}``."""
    if dec.omega_J.size == 0:
        return 0.0
    return operators.op_norm(dec.omega_J, np.inf, np.inf)


class TvDual(NamedTuple):
    m: np.ndarray
    ic: float


def tv_dual_vector(x, tol=None):
    """Closed-form dual vector for finite-difference denoising (identity forward map).

    The dual takes the jump signs at the support, is pinned to zero at the
    two virtual boundary anchors, and interpolates linearly in between; the
    criterion value is the largest magnitude over the cosupport.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need a 1-D signal of length >= 2")
    d = np.diff(x)
    if tol is None:
        peak = float(np.abs(d).max()) if d.size else 0.0
        tol = 1e-8 * peak
    I = np.flatnonzero(np.abs(d) > tol)
    if I.size == 0:
        raise PreconditionError("signal has an empty difference support")
    s = np.sign(d[I])
    anchors_x = np.concatenate([[-1.0], I.astype(float), [float(x.size - 1)]])
    anchors_v = np.concatenate([[0.0], s, [0.0]])
    m = np.interp(np.arange(d.size, dtype=float), anchors_x, anchors_v)
    m[I] = s
    mask = np.ones(d.size, dtype=bool)
    mask[I] = False
    ic = _norm_inf(m[mask])
    return TvDual(m=m, ic=ic)


__all__ = [
    "project_l1_ball", "prox_linf", "DRConfig", "CriterionResult",
    "compute_ic", "compute_ic_fuchs", "compute_erc", "compute_arc",
    "compute_warc", "tv_dual_vector", "TvDual", "d_support",
]
