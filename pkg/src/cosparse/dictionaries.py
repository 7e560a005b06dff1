"""Analysis dictionaries: finite differences, shift-invariant Haar, fused, identity.

A dictionary D is a collection of P atoms (columns) in R^N.  The synthesis
direction maps coefficients to signals, x = D a; the analysis direction
correlates a signal with every atom, D* x.
"""

from __future__ import annotations

import numpy as np

from . import operators
from .errors import DataError


class Dictionary:
    """Dense dictionary with synthesis/analysis actions.

    Attributes
    ----------
    matrix : ndarray of shape (n, p)
        Atoms as columns.
    label : str
        One of ``identity``, ``tv_diff``, ``haar_shift_invariant``, ``fused``.
    """

    def __init__(self, matrix, label):
        self.matrix = operators.as_matrix(matrix, "dictionary")
        self.label = label

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def p(self):
        return self.matrix.shape[1]

    @property
    def as_operator(self):
        return operators.dense(self.matrix, label=self.label)

    def synthesis(self, coeffs):
        coeffs = operators.as_signal(coeffs, self.p, "coefficients")
        return self.matrix @ coeffs

    def analysis(self, x):
        x = operators.as_signal(x, self.n, "signal")
        return self.matrix.T @ x

    def columns(self, idx):
        """Subdictionary with the given 0-based column indices, shape (n, len(idx))."""
        return self.matrix[:, np.asarray(idx, dtype=int)]

    def materialize(self):
        return self.matrix

    def __repr__(self):
        return f"Dictionary({self.label}, n={self.n}, p={self.p})"


def make_tv(n):
    """Forward finite differences: p = n-1 atoms, analysis(x)_i = x_{i+1} - x_i.

    Column j has -1 at row j and +1 at row j+1.  Constants span the kernel of
    the analysis operator.
    """
    n = int(n)
    if n < 2:
        raise ValueError("finite differences need n >= 2")
    mat = np.zeros((n, n - 1))
    for j in range(n - 1):
        mat[j, j] = -1.0
        mat[j + 1, j] = 1.0
    return Dictionary(mat, "tv_diff")


def make_haar(n, j_max, tau):
    """Shift-invariant Haar dictionary with scales 0..j_max.

    The atom at scale j and position t is the circular shift by t of the
    two-sided filter with value +2^{-tau(j+1)} on offsets 0..2^j-1 and
    -2^{-tau(j+1)} on offsets -2^j..-1, so the analysis coefficient at
    (j, t) is the circular correlation sum_k psi_k x_{t+k mod n}.  Atoms are
    ordered scale-major: column index = j*n + t.
    """
    n = int(n)
    j_max = int(j_max)
    if j_max < 0:
        raise ValueError("j_max must be nonnegative")
    if 2 ** (j_max + 1) > n:
        raise ValueError(f"scale {j_max} too large for signal length {n}")
    tau = float(tau)
    mat = np.zeros((n, n * (j_max + 1)))
    for j in range(j_max + 1):
        width = 2 ** j
        amp = 2.0 ** (-tau * (j + 1))
        filt = np.zeros(n)
        filt[:width] += amp
        filt[-width:] -= amp
        for t in range(n):
            mat[:, j * n + t] = np.roll(filt, t)
    return Dictionary(mat, "haar_shift_invariant")


def make_fused(n, epsilon):
    """Concatenation of forward differences and a scaled identity.

    analysis(x) = (differences of x, epsilon * x); p = (n-1) + n.  The
    analysis operator has trivial kernel for any epsilon > 0.
    """
    n = int(n)
    if n < 2:
        raise ValueError("fused dictionary needs n >= 2")
    epsilon = float(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    mat = np.hstack([make_tv(n).matrix, epsilon * np.eye(n)])
    return Dictionary(mat, "fused")


def make_identity(n):
    n = int(n)
    if n < 1:
        raise ValueError("identity dictionary needs n >= 1")
    return Dictionary(np.eye(n), "identity")


def from_spec(spec, n):
    """Build a dictionary from a CLI spec string.

    Grammar: ``tv``, ``id``, ``haar:jmax=J,tau=T``, ``fused:eps=E``.
    """
    spec = str(spec).strip()
    name, _, argstr = spec.partition(":")
    args = {}
    if argstr:
        for item in argstr.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise DataError(f"malformed dictionary option {item!r} in {spec!r}")
            args[key.strip()] = val.strip()
    try:
        if name == "tv":
            return make_tv(n)
        if name == "id":
            return make_identity(n)
        if name == "haar":
            return make_haar(n, int(args.pop("jmax")), float(args.pop("tau")))
        if name == "fused":
            return make_fused(n, float(args.pop("eps")))
    except (KeyError, ValueError) as exc:
        raise DataError(f"bad dictionary spec {spec!r}: {exc}") from exc
    raise DataError(f"unknown dictionary {name!r} (expected tv, id, haar, fused)")
