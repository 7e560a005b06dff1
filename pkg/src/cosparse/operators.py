"""Linear operators with explicit adjoints, and the induced matrix norms.

Operators are immutable pairs of matched forward/adjoint callables; dense
matrices are plain numpy arrays (row-major).  Every concrete operator built
here can be materialized to a dense matrix, which is what the decomposition
and criteria layers consume.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch

EPS = float(np.finfo(float).eps)


def as_signal(x, dim=None, name="signal"):
    """Coerce ``x`` to a 1-D float array, optionally checking its length."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"{name} has length {arr.shape[0]}, expected {dim}")
    return arr


def as_matrix(m, name="matrix"):
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


class LinearOperator:
    """A linear map R^in_dim -> R^out_dim together with its adjoint.

    Instances are immutable after construction and safe to share across
    threads.  ``materialize()`` caches the dense matrix on first use.
    """

    def __init__(self, in_dim, out_dim, forward, adjoint, matrix=None, label="operator"):
        if in_dim < 1 or out_dim < 1:
            raise ValueError("operator dimensions must be positive")
        self.in_dim = int(in_dim)
        self.out_dim = int(out_dim)
        self._forward = forward
        self._adjoint = adjoint
        self._matrix = None if matrix is None else as_matrix(matrix)
        self.label = label

    def apply(self, x):
        x = as_signal(x, self.in_dim, "input")
        return np.asarray(self._forward(x), dtype=float)

    def adjoint_apply(self, z):
        z = as_signal(z, self.out_dim, "input")
        return np.asarray(self._adjoint(z), dtype=float)

    @property
    def T(self):
        """The adjoint as an operator in its own right."""
        mat = None if self._matrix is None else self._matrix.T
        return LinearOperator(self.out_dim, self.in_dim, self._adjoint,
                              self._forward, matrix=mat, label=self.label + "*")

    def materialize(self):
        """Dense matrix of the operator (cached)."""
        if self._matrix is None:
            cols = np.empty((self.out_dim, self.in_dim))
            basis = np.zeros(self.in_dim)
            for j in range(self.in_dim):
                basis[j] = 1.0
                cols[:, j] = self.apply(basis)
                basis[j] = 0.0
            self._matrix = cols
        return self._matrix

    def __repr__(self):
        return f"LinearOperator({self.label}: R^{self.in_dim} -> R^{self.out_dim})"


def dense(matrix, label="dense"):
    """Wrap a dense matrix as an operator."""
    mat = as_matrix(matrix)
    return LinearOperator(mat.shape[1], mat.shape[0],
                          lambda x: mat @ x, lambda z: mat.T @ z,
                          matrix=mat, label=label)


def identity(n, label="id"):
    return dense(np.eye(int(n)), label=label)


def scaled(op, c):
    """``c * op`` with the matching adjoint."""
    c = float(c)
    mat = None if op._matrix is None else c * op._matrix
    return LinearOperator(op.in_dim, op.out_dim,
                          lambda x: c * op.apply(x), lambda z: c * op.adjoint_apply(z),
                          matrix=mat, label=f"{c}*{op.label}")


def compose(a, b):
    """Operator ``a ∘ b``; the adjoint is the reversed composition."""
    if b.out_dim != a.in_dim:
        raise DimensionMismatch(
            f"cannot compose: inner dimensions {a.in_dim} and {b.out_dim} differ")
    return LinearOperator(b.in_dim, a.out_dim,
                          lambda x: a.apply(b.apply(x)),
                          lambda z: b.adjoint_apply(a.adjoint_apply(z)),
                          label=f"{a.label}∘{b.label}")


def hstack(ops):
    """Horizontal concatenation ``[A1 A2 ...]`` acting on stacked inputs."""
    ops = list(ops)
    if not ops:
        raise ValueError("need at least one operator")
    out_dim = ops[0].out_dim
    if any(op.out_dim != out_dim for op in ops):
        raise DimensionMismatch("hstack operands must share their output dimension")
    splits = np.cumsum([op.in_dim for op in ops])[:-1]

    def forward(x):
        total = np.zeros(out_dim)
        for op, piece in zip(ops, np.split(x, splits)):
            total += op.apply(piece)
        return total

    def adjoint(z):
        return np.concatenate([op.adjoint_apply(z) for op in ops])

    in_dim = sum(op.in_dim for op in ops)
    return LinearOperator(in_dim, out_dim, forward, adjoint, label="hstack")


def circular_gaussian_blur(n, sigma):
    """Circular convolution with a normalized Gaussian kernel.

    The kernel is truncated at +-ceil(4*sigma) offsets before normalization
    and folded onto the n periodic bins, so the operator is an exactly
    symmetric circulant.
    """
    n = int(n)
    if n < 3:
        raise ValueError("blur needs n >= 3")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    half = int(np.ceil(4.0 * float(sigma)))
    offsets = np.arange(-half, half + 1)
    weights = np.exp(-offsets.astype(float) ** 2 / (2.0 * sigma ** 2))
    weights /= weights.sum()
    kernel = np.zeros(n)
    np.add.at(kernel, offsets % n, weights)
    mat = np.empty((n, n))
    for j in range(n):
        mat[:, j] = np.roll(kernel, j)
    return dense(mat, label=f"blur(sigma={sigma})")


def gaussian_random_matrix(q, n, seed):
    """q-by-n matrix of i.i.d. standard normal entries from a seeded generator.

    The same seed reproduces the matrix bit for bit.
    """
    q, n = int(q), int(n)
    if q < 1 or n < 1:
        raise ValueError("matrix dimensions must be positive")
    return np.random.default_rng(int(seed)).standard_normal((q, n))


def _spectral_norm(mat, tol=1e-9, max_iters=10_000):
    # Full decomposition at desk scale; deterministic power iteration beyond.
    if mat.size == 0:
        return 0.0
    if max(mat.shape) <= 512:
        return float(np.linalg.svd(mat, compute_uv=False)[0])
    v = np.random.default_rng(0).standard_normal(mat.shape[1])
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(max_iters):
        w = mat.T @ (mat @ v)
        s = np.linalg.norm(w)
        if s == 0.0:
            return 0.0
        v = w / s
        cur = np.sqrt(s)
        if abs(cur - prev) <= tol * cur:
            return float(cur)
        prev = cur
    return float(prev)


def op_norm(m, p, q):
    """Induced p,q-operator norm of a dense matrix, for p,q in {2, inf}.

    Supported pairs: (inf, inf) max absolute row sum, (2, inf) max row
    euclidean norm, (2, 2) largest singular value.
    """
    mat = as_matrix(m)
    pair = (float(p), float(q))
    if mat.shape[0] == 0 or mat.shape[1] == 0:
        return 0.0
    if pair == (np.inf, np.inf):
        return float(np.abs(mat).sum(axis=1).max())
    if pair == (2.0, np.inf):
        return float(np.sqrt((mat * mat).sum(axis=1)).max())
    if pair == (2.0, 2.0):
        return _spectral_norm(mat)
    raise ValueError(f"unsupported operator-norm pair {pair}")


def rank_tolerance(singular_values, shape):
    """Numerical-rank cutoff: max(shape) * machine epsilon * largest singular value."""
    if len(singular_values) == 0:
        return 0.0
    return max(shape) * EPS * float(singular_values[0])


def pseudoinverse(m):
    """Moore-Penrose pseudoinverse with the standard numerical-rank cutoff."""
    mat = as_matrix(m)
    if mat.size == 0:
        return np.zeros((mat.shape[1], mat.shape[0]))
    return np.linalg.pinv(mat, rcond=max(mat.shape) * EPS)


def nullspace(m):
    """Orthonormal basis (columns) of the kernel of ``m``."""
    mat = as_matrix(m)
    if mat.shape[0] == 0:
        return np.eye(mat.shape[1])
    u, s, vh = np.linalg.svd(mat)
    tol = rank_tolerance(s, mat.shape)
    rank = int((s > tol).sum())
    return vh[rank:].T.copy()


def save_matrix_csv(path, m):
    """Write a dense matrix as CSV, one row per line, full float precision."""
    np.savetxt(path, as_matrix(m), fmt="%.17g", delimiter=",")


def load_matrix_csv(path):
    return np.loadtxt(path, delimiter=",", ndmin=2)
