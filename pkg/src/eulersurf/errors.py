"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, bad data or
parameters exit 2, broken internal invariants exit 3.
"""


class EulersurfError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(EulersurfError):
    """Malformed command line (unknown flag, missing argument, bad spec string)."""


class DataError(EulersurfError):
    """Input data cannot be used (bad file, bad value, shape mismatch)."""


class FormatError(DataError):
    """A file does not conform to its declared format."""


class ValidationError(DataError):
    """An in-memory object violates a documented invariant."""


class DegenerateInputError(DataError):
    """A point configuration violates the general-position assumption."""


class InvariantError(EulersurfError):
    """An internal consistency check failed; indicates a bug, not bad input."""
