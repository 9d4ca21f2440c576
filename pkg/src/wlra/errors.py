"""Exception types shared across the package.

The CLI maps these onto exit codes: ValidationError -> 2,
MatrixFormatError / OSError -> 1, NumericalError -> 3.
"""


class ValidationError(ValueError):
    """A precondition on the inputs was violated (shape, rank, range)."""


class MatrixFormatError(Exception):
    """A matrix or CSV file could not be parsed."""


class NumericalError(RuntimeError):
    """A numerical kernel failed (e.g. the SVD iteration did not converge)."""
