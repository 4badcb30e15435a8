class EnsembleError(Exception):
    """Base class for micro-controller errors"""


class OperationUnsupported(EnsembleError, LookupError):
    """The variant does not offer the requested operation"""
