"""Exception types shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, data problems
exit 2, numerical failures exit 3.
"""


class DataError(ValueError):
    """A dataset file or its contents cannot be used."""


class MissingColumnError(DataError):
    def __init__(self, column: str):
        super().__init__(f"column {column!r} not found in header")
        self.column = column


class CellParseError(DataError):
    """A cell is empty or otherwise unusable. Rows are 1-based data rows."""

    def __init__(self, row: int, column: str, reason: str = "empty cell"):
        super().__init__(f"row {row}, column {column!r}: {reason}")
        self.row = row
        self.column = column


class NumericalError(RuntimeError):
    """A numerical routine failed (non-finite loss, factorization failure)."""
