"""Exception hierarchy shared by all spinfractal modules."""


class SpinFractalError(Exception):
    """Base class for all errors raised by this package."""


class SpecError(SpinFractalError, ValueError):
    """Invalid network specification, option value, or argument."""


class NumericError(SpinFractalError, RuntimeError):
    """Numerical routine failure (e.g. eigensolver did not converge)."""

    def __init__(self, message, dimension=None):
        super().__init__(message)
        self.dimension = dimension


class DegenerateInputError(SpinFractalError, ValueError):
    """Input carries no usable geometric structure (e.g. all-zero distances)."""


class ScalingRangeError(SpinFractalError, ValueError):
    """Too few radii / empty fit window to estimate power-law scaling."""


class ResultFormatError(SpinFractalError, ValueError):
    """A persisted result file is malformed; message names the bad field."""


class SchemaVersionError(ResultFormatError):
    """A persisted result file uses a schema version newer than this package."""
