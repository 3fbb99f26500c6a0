"""Exception taxonomy shared across the package."""


class PlanspaceError(Exception):
    """Base class for all package errors."""


class DataError(PlanspaceError):
    """Malformed or inconsistent input data (files, documents, tables)."""


class OracleError(DataError):
    """A pairwise distance oracle failed; carries the offending pair."""

    def __init__(self, message: str, pair: tuple[str, str] | None = None):
        super().__init__(message)
        self.pair = pair
