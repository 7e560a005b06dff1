"""Exception types shared across the package."""


class CosparseError(Exception):
    """Base class for package-specific errors."""


class DimensionMismatch(CosparseError, ValueError):
    """Operands have incompatible shapes."""


class DataError(CosparseError, ValueError):
    """Malformed or unreadable input (bad spec string, bad file)."""


class PreconditionError(CosparseError, ValueError):
    """A mathematical precondition of the requested computation fails."""


class IllPosedProblem(PreconditionError):
    """The forward operator and the analysis operator share a nontrivial kernel,
    so the variational problem has an unbounded minimizer set."""


class RestrictedInjectivityError(PreconditionError):
    """The forward operator is not injective on the cospace."""

    def __init__(self, overlap_dim):
        self.overlap_dim = int(overlap_dim)
        super().__init__(
            "forward operator is singular on the cospace: the intersection of "
            f"its kernel with the cospace has dimension {self.overlap_dim}"
        )


class NotApplicable(PreconditionError):
    """A theorem-driven routine was invoked outside its hypotheses."""
