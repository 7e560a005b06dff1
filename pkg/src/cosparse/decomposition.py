"""Sign supports, cospace geometry, and the matrices behind the recovery theory.

For a signal x and dictionary D, the support I collects the indices where
D* x is nonzero and the cosupport J its complement.  Signals with cosupport
J live in the cospace G_J = ker D_J*.  When the forward operator is
injective on G_J we can form its restricted inverse A_J and the two derived
matrices (here ``omega_J`` and ``b_J``) whose norms drive every criterion
and constant downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import operators
from .errors import RestrictedInjectivityError


@dataclass(frozen=True)
class SignVector:
    """Entries in {-1, 0, +1}; support and cosupport partition the index set."""

    signs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.signs, dtype=np.int8)
        if arr.ndim != 1 or not np.isin(arr, (-1, 0, 1)).all():
            raise ValueError("sign vector entries must be -1, 0 or +1")
        object.__setattr__(self, "signs", arr)

    @property
    def support(self):
        return np.flatnonzero(self.signs)

    @property
    def cosupport(self):
        return np.flatnonzero(self.signs == 0)

    def __len__(self):
        return self.signs.shape[0]

    def __eq__(self, other):
        if isinstance(other, SignVector):
            other = other.signs
        return np.array_equal(self.signs, np.asarray(other))


def d_support(x, dictionary, tol=None):
    """Sign vector of D* x, zeroing entries with magnitude below ``tol``.

    The default tolerance is 1e-8 times the largest analysis coefficient,
    which absorbs the numerical dust left by iterative solvers.
    """
    coeffs = dictionary.analysis(x)
    if tol is None:
        peak = float(np.abs(coeffs).max()) if coeffs.size else 0.0
        tol = 1e-8 * peak
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    signs = np.sign(coeffs)
    signs[np.abs(coeffs) <= tol] = 0
    return SignVector(signs.astype(np.int8))


def cospace_basis(dictionary, J):
    """Orthonormal basis (columns) of the cospace ker D_J*.

    An empty J leaves the whole space, so the identity is returned.
    """
    J = np.asarray(sorted(set(int(j) for j in J)), dtype=int)
    if J.size == 0:
        return np.eye(dictionary.n)
    return operators.nullspace(dictionary.columns(J).T)


def check_h0(dictionary, phi):
    """True iff ker(phi) and ker(D*) intersect trivially.

    This is the compactness condition for the penalized problem: the stacked
    map (phi; D*) must have a trivial kernel at the numerical-rank cutoff.
    """
    stacked = np.vstack([phi.materialize(), dictionary.matrix.T])
    return operators.nullspace(stacked).shape[1] == 0


@dataclass(frozen=True)
class CosparseDecomposition:
    """Everything the criteria and certificates need for one cosupport.

    Fields
    ------
    U_J : (n, dim G_J) orthonormal basis of the cospace.
    A_J : (n, n) inverse of phi*phi restricted to the cospace.
    omega_J : (|J|, |I|) matrix  D_J^+ (phi*phi A_J - Id) D_I.
    b_J : (|J|, q) matrix  D_J^+ phi*(phi A_J phi* - Id).
    kernel_J : (|J|, k) orthonormal basis of ker D_J (coefficient space).
    """

    dictionary: object
    phi: object
    I: np.ndarray
    J: np.ndarray
    U_J: np.ndarray
    A_J: np.ndarray
    omega_J: np.ndarray
    b_J: np.ndarray
    kernel_J: np.ndarray

    @property
    def n(self):
        return self.dictionary.n

    @property
    def p(self):
        return self.dictionary.p

    @property
    def q(self):
        return self.phi.out_dim

    @property
    def cospace_dim(self):
        return self.U_J.shape[1]

    def summary(self):
        """JSON-ready digest; index sets are reported 1-based."""
        return {
            "n": self.n,
            "p": self.p,
            "q": self.q,
            "support": [int(i) + 1 for i in self.I],
            "cosupport_size": int(self.J.size),
            "cospace_dim": int(self.cospace_dim),
            "kernel_dim": int(self.kernel_J.shape[1]),
            "restricted_injectivity": True,
        }


def build_decomposition(dictionary, phi, J):
    """Assemble the cosparse decomposition for cosupport ``J``.

    Raises ``RestrictedInjectivityError`` when the forward operator fails to
    be injective on the cospace; the error carries the overlap dimension.
    """
    if phi.in_dim != dictionary.n:
        raise ValueError("forward operator and dictionary disagree on the signal length")
    J = np.asarray(sorted(set(int(j) for j in J)), dtype=int)
    if J.size and (J.min() < 0 or J.max() >= dictionary.p):
        raise ValueError("cosupport indices out of range")
    mask = np.ones(dictionary.p, dtype=bool)
    mask[J] = False
    I = np.flatnonzero(mask)

    n = dictionary.n
    D_J = dictionary.columns(J)
    D_I = dictionary.columns(I)
    U = cospace_basis(dictionary, J)

    phi_mat = phi.materialize()
    if U.shape[1] > 0:
        PU = phi_mat @ U
        svals = np.linalg.svd(PU, compute_uv=False)
        tol = operators.rank_tolerance(svals, PU.shape)
        rank = int((svals > tol).sum())
        if rank < U.shape[1]:
            raise RestrictedInjectivityError(U.shape[1] - rank)
        gram = PU.T @ PU
        A = U @ np.linalg.solve(gram, U.T)
    else:
        A = np.zeros((n, n))

    DJ_pinv = operators.pseudoinverse(D_J)
    gram_phi = phi_mat.T @ phi_mat
    omega_tilde = (gram_phi @ A - np.eye(n)) @ D_I
    b_tilde = phi_mat.T @ (phi_mat @ A @ phi_mat.T - np.eye(phi_mat.shape[0]))
    omega = DJ_pinv @ omega_tilde
    b = DJ_pinv @ b_tilde
    kernel = operators.nullspace(D_J) if J.size else np.zeros((0, 0))

    return CosparseDecomposition(dictionary=dictionary, phi=phi, I=I, J=J,
                                 U_J=U, A_J=A, omega_J=omega, b_J=b,
                                 kernel_J=kernel)


@dataclass(frozen=True)
class TheoremConstants:
    """Constants for the recovery theorems.

    ``c_noise`` drives the bounded-noise result; the pair
    (``c_small``, ``c_tilde``) bounds the small-noise regularization window
    and is only available when the identifiability criterion is below one.
    """

    c_noise: float
    c_small: float | None = None
    c_tilde: float | None = None

    @property
    def small_available(self):
        return self.c_small is not None


def theorem_constants(dec, ic=None):
    """Compute the theorem constants for a decomposition.

    Pass the identifiability criterion value to obtain the small-noise pair;
    with ``ic`` missing or >= 1 the pair is flagged unavailable rather than
    silently computed.
    """
    c_noise = operators.op_norm(dec.b_J, 2, np.inf)
    if ic is None or not np.isfinite(ic) or ic >= 1.0:
        return TheoremConstants(c_noise=c_noise)
    D_I = dec.dictionary.columns(dec.I)
    c_small = c_noise / (1.0 - float(ic))
    dia = operators.op_norm(D_I.T @ dec.A_J, np.inf, np.inf)
    phi_rows = operators.op_norm(dec.phi.materialize().T, 2, np.inf)
    di_inf = operators.op_norm(D_I, np.inf, np.inf)
    if c_small == 0.0:
        # Degenerate noiseless corner (empty cosupport): only the
        # data-independent part of the window bound survives.
        denom = dia * di_inf
    else:
        denom = dia * (phi_rows / c_small + di_inf)
    c_tilde = np.inf if denom == 0.0 else 1.0 / denom
    return TheoremConstants(c_noise=c_noise, c_small=c_small, c_tilde=c_tilde)
