"""Exception types shared across the package."""


class SchemaError(ValueError):
    """A schema definition violates its own rules."""


class SchemaMismatchError(SchemaError):
    """A file's columns do not line up with the schema."""

    def __init__(self, message, missing=(), extra=()):
        super().__init__(message)
        self.missing = tuple(missing)
        self.extra = tuple(extra)


class DataError(ValueError):
    """A cell or row failed validation. Carries row/column context."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class FingerprintMismatchError(ValueError):
    """Model and dataset were built against different schemas."""


class CalibrationError(RuntimeError):
    """No grid point produced both error types. Carries the full sweep."""

    def __init__(self, message, sweep=()):
        super().__init__(message)
        self.sweep = tuple(sweep)


class UsageError(ValueError):
    """Bad command-line invocation (maps to exit code 2)."""
