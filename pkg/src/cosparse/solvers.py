"""Iterative solvers for the analysis-penalized least-squares problem

    min_x  0.5 ||y - phi x||^2 + lambda ||D* x||_1

and the equality-constrained variant reached in the small-lambda limit.
The general solver is a relaxed primal-dual (Arrow-Hurwicz type) scheme on
the splitting K = (phi; D*); denoising (phi = Id) additionally gets a fast
projected-gradient solver on its dual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import operators
from .decomposition import check_h0
from .errors import IllPosedProblem, PreconditionError


@dataclass(frozen=True)
class SolveConfig:
    """Solver settings.

    ``tol`` is applied to the relative change of both the primal iterate and
    the objective; ``theta`` is the primal over-relaxation; the dual/primal
    steps are ``step_ratio / ||K||`` scaled so their product stays strictly
    below the convergence threshold.
    """

    lam: float = 0.0
    max_iters: int = 100_000
    tol: float = 1e-10
    theta: float = 1.0
    step_ratio: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise PreconditionError("lambda must be nonnegative")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        if self.step_ratio <= 0:
            raise ValueError("step_ratio must be positive")


@dataclass
class SolverReport:
    """Solution plus convergence diagnostics.

    ``residual_trace`` records the objective value at every iteration; its
    tail matches the objective recomputed from the returned solution.
    """

    solution: np.ndarray
    objective: float
    iterations: int
    converged: bool
    residual_trace: list = field(default_factory=list)
    constraint_residual: float | None = None
    feasible: bool | None = None


def soft_threshold(x, t):
    """Componentwise sign(x) * max(|x| - t, 0)."""
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def objective_value(phi, dictionary, y, lam, x):
    resid = y - phi.apply(x)
    return 0.5 * float(resid @ resid) + lam * float(np.abs(dictionary.analysis(x)).sum())


def _splitting_norm(phi, dictionary, tol=1e-12, max_iters=10_000):
    """||K||_{2,2} for K = (phi; D*) by power iteration on K*K."""
    n = phi.in_dim
    v = np.random.default_rng(0).standard_normal(n)
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(max_iters):
        w = phi.adjoint_apply(phi.apply(v)) + dictionary.synthesis(dictionary.analysis(v))
        s = np.linalg.norm(w)
        if s == 0.0:
            return 0.0
        v = w / s
        cur = np.sqrt(s)
        if abs(cur - prev) <= tol * cur:
            return float(cur)
        prev = cur
    return float(prev)


def _tail_is_monotone(trace, rel_slack=1e-9):
    """Objective must be non-increasing once transients die out.

    The primal-dual scheme oscillates early; the check starts after the
    first 100 iterations or the first quarter of the run, whichever is
    later, with a small relative slack for rounding noise.
    """
    arr = np.asarray(trace)
    start = max(100, arr.size // 4)
    if arr.size <= start + 1:
        return True
    tail = arr[start:]
    allowed = rel_slack * np.maximum(np.abs(tail[:-1]), 1.0)
    return bool(np.all(tail[1:] <= tail[:-1] + allowed))


def solve_lasso(phi, dictionary, y, config):
    """Primal-dual solver for the analysis-penalized problem.

    Dual blocks: the quadratic part uses the closed-form conjugate prox
    ``(q - sigma y) / (1 + sigma)``; the l1 part clamps to [-lambda, lambda].
    Stops when the relative changes of the primal iterate and of the
    objective both fall below ``config.tol``.
    """
    y = operators.as_signal(y, phi.out_dim, "observations")
    if dictionary.n != phi.in_dim:
        raise ValueError("forward operator and dictionary disagree on the signal length")
    if not check_h0(dictionary, phi):
        raise IllPosedProblem(
            "kernels of the forward and analysis operators overlap; the "
            "minimizer set is unbounded")
    lam = config.lam
    norm_k = _splitting_norm(phi, dictionary)
    if norm_k == 0.0:
        raise IllPosedProblem("zero splitting operator")
    # safety factor keeps sigma * tau * ||K||^2 = 0.99 * step_ratio^2 < 1
    sigma = tau = config.step_ratio * np.sqrt(0.99) / norm_k
    if sigma * tau * norm_k ** 2 >= 1.0:
        raise ValueError("step sizes violate the primal-dual convergence condition")
    theta = config.theta

    n = phi.in_dim
    x = np.zeros(n)
    q = np.zeros(phi.out_dim)
    eta = np.zeros(dictionary.p)
    fx = np.zeros(phi.out_dim)       # phi x
    ax = np.zeros(dictionary.p)      # D* x
    fxbar = fx.copy()
    axbar = ax.copy()

    trace = []
    obj_prev = np.inf
    converged = False
    iters = 0
    for iters in range(1, config.max_iters + 1):
        q = (q + sigma * (fxbar - y)) / (1.0 + sigma)
        eta = np.clip(eta + sigma * axbar, -lam, lam)
        x_new = x - tau * (phi.adjoint_apply(q) + dictionary.synthesis(eta))
        fx_new = phi.apply(x_new)
        ax_new = dictionary.analysis(x_new)
        fxbar = (1.0 + theta) * fx_new - theta * fx
        axbar = (1.0 + theta) * ax_new - theta * ax

        resid = fx_new - y
        obj = 0.5 * float(resid @ resid) + lam * float(np.abs(ax_new).sum())
        trace.append(obj)

        dx = np.linalg.norm(x_new - x) / max(1.0, np.linalg.norm(x_new))
        dobj = abs(obj - obj_prev) / max(1.0, abs(obj))
        x, fx, ax = x_new, fx_new, ax_new
        obj_prev = obj
        if dx <= config.tol and dobj <= config.tol:
            converged = True
            break

    converged = converged and _tail_is_monotone(trace)
    return SolverReport(solution=x, objective=trace[-1], iterations=iters,
                        converged=converged, residual_trace=trace)


def solve_denoise_dual(dictionary, y, config):
    """Denoising solver (identity forward map) through the dual problem

        min_{||a||_inf <= lambda} ||y + D a||^2,

    by accelerated projected gradient with momentum restart on objective
    increase; the primal solution is recovered as x = y + D a.
    """
    y = operators.as_signal(y, dictionary.n, "observations")
    lam = config.lam
    dmat = dictionary.matrix
    lip = operators.op_norm(dmat, 2, 2) ** 2
    if lip == 0.0:
        return SolverReport(solution=y.copy(), objective=0.0, iterations=0,
                            converged=True, residual_trace=[0.0])
    step = 1.0 / lip

    def dual_obj(a):
        r = y + dmat @ a
        return 0.5 * float(r @ r)

    def primal_obj(xp):
        r = y - xp
        return 0.5 * float(r @ r) + lam * float(np.abs(dmat.T @ xp).sum())

    alpha = np.zeros(dictionary.p)
    momentum = alpha.copy()
    t = 1.0
    f_prev = dual_obj(alpha)
    x = y + dmat @ alpha
    trace = [primal_obj(x)]
    obj_prev = trace[0]
    converged = False
    iters = 0
    for iters in range(1, config.max_iters + 1):
        grad = dmat.T @ (y + dmat @ momentum)
        candidate = np.clip(momentum - step * grad, -lam, lam)
        f_cand = dual_obj(candidate)
        if f_cand > f_prev:
            # restart momentum and take a plain projected-gradient step
            grad = dmat.T @ (y + dmat @ alpha)
            candidate = np.clip(alpha - step * grad, -lam, lam)
            f_cand = dual_obj(candidate)
            t = 1.0
            momentum = candidate.copy()
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            momentum = candidate + ((t - 1.0) / t_next) * (candidate - alpha)
            t = t_next
        x_new = y + dmat @ candidate
        obj = primal_obj(x_new)
        trace.append(obj)
        dx = np.linalg.norm(x_new - x) / max(1.0, np.linalg.norm(x_new))
        dobj = abs(obj - obj_prev) / max(1.0, abs(obj))
        alpha, f_prev = candidate, f_cand
        x, obj_prev = x_new, obj
        if dx <= config.tol and dobj <= config.tol:
            converged = True
            break

    converged = converged and _tail_is_monotone(trace)
    return SolverReport(solution=x, objective=trace[-1], iterations=iters,
                        converged=converged, residual_trace=trace)


def solve_bp(phi, dictionary, y, lambda_small=None, config=None):
    """Equality-constrained solution through the small-lambda limit.

    Solves the penalized problem at a tiny lambda (default
    ``1e-6 * ||phi* y||_inf``) with a tightened tolerance and reports the
    constraint residual ``||phi x - y||``; the report is flagged infeasible
    when that residual exceeds ``1e-5 ||y||``.
    """
    y = operators.as_signal(y, phi.out_dim, "observations")
    if lambda_small is None:
        scale = float(np.abs(phi.adjoint_apply(y)).max())
        lambda_small = 1e-6 * scale if scale > 0 else 1e-6
    if lambda_small <= 0:
        raise PreconditionError("lambda_small must be positive")
    base = config or SolveConfig()
    cfg = SolveConfig(lam=float(lambda_small),
                      max_iters=max(base.max_iters, 200_000),
                      tol=min(base.tol, 1e-12),
                      theta=base.theta, step_ratio=base.step_ratio)
    report = solve_lasso(phi, dictionary, y, cfg)
    resid = float(np.linalg.norm(phi.apply(report.solution) - y))
    report.constraint_residual = resid
    report.feasible = resid <= 1e-5 * max(float(np.linalg.norm(y)), 1e-300)
    return report
