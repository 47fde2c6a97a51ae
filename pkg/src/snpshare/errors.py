"""Exception hierarchy. Everything derives from ValueError so callers can catch broadly."""


class SnpShareError(ValueError):
    """Base class for all library errors."""


class DimensionError(SnpShareError):
    pass


class ParseError(SnpShareError):
    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class FormatError(SnpShareError):
    pass


class InsufficientDataError(SnpShareError):
    pass


class DegenerateCalibrationError(SnpShareError):
    pass


class PreconditionError(SnpShareError):
    pass


class UndefinedTestError(SnpShareError):
    pass
