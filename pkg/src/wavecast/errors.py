"""Exception hierarchy shared by the wavecast modules.

The CLI maps these onto exit codes: format/data problems exit 2,
numeric failures exit 3, usage errors exit 1.
"""


class WavecastError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(WavecastError):
    """Malformed input file: bad header, unparseable field, wrong layout."""


class DataError(WavecastError):
    """Input parsed but violates a data invariant (negative counts, etc.)."""


class AlignmentError(DataError):
    """Series could not be joined onto a common calendar."""


class ScalerError(DataError):
    """Min-max scaling impossible (constant column) or misused."""


class SplitError(DataError):
    """Train/test partition too small for the requested windows."""


class WindowError(DataError):
    """Not enough rows to build a single lookback/horizon window."""


class StateError(WavecastError):
    """Operation called out of order (missing fit, missing cache)."""


class ShapeError(WavecastError):
    """Tensor arguments have inconsistent shapes."""


class SingularMatrixError(WavecastError):
    """Design matrix is rank deficient."""


class ResolutionError(WavecastError):
    """Frequency grid too coarse to resolve the filter transition bands."""


class NumericError(WavecastError):
    """Non-finite value encountered mid-computation."""


class UsageError(WavecastError):
    """Bad command line or manifest."""
