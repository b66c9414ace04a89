class PfaError(ValueError):
    """Base class for numerical precondition failures."""


class InsufficientDataError(PfaError):
    pass


class DegenerateSignalError(PfaError):
    pass


class CsvFormatError(ValueError):
    """Input file could not be parsed as a time series."""
