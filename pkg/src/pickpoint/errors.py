"""Exception hierarchy shared by every pickpoint module."""

from __future__ import annotations


class PickpointError(Exception):
    """Base class for all errors raised by this package."""


# geometry / camera
class EmptyChain(PickpointError, ValueError):
    pass


class WrongChainLength(PickpointError, ValueError):
    pass


class BehindCamera(PickpointError, ValueError):
    pass


class NonPositiveDepth(PickpointError, ValueError):
    pass


class DegenerateConfiguration(PickpointError, ValueError):
    pass


# scene / fusion
class EmptyBounds(PickpointError, ValueError):
    pass


class CameraInsideFruit(PickpointError, ValueError):
    pass


class VisibilityError(PickpointError, ValueError):
    """A fruit pose cannot be observed by one of the cameras."""

    def __init__(self, pose_id: int, camera: str, cause: Exception):
        super().__init__(f"pose {pose_id}: camera {camera!r}: {cause}")
        self.pose_id = pose_id
        self.camera = camera
        self.cause = cause


class ZeroRotation(PickpointError, ValueError):
    pass


class CoincidentPoint(PickpointError, ValueError):
    pass


# learners / ensembles
class DimensionMismatch(PickpointError, ValueError):
    pass


class TooFewSamples(PickpointError, ValueError):
    pass


class NonConvergence(PickpointError, RuntimeWarning):
    """Issued as a warning: the solver hit its iteration cap."""


class DivergenceDetected(PickpointError, RuntimeWarning):
    """Issued as a warning: training loss became non-finite."""


class ModelFormatError(PickpointError, ValueError):
    pass


# data
class DataError(PickpointError, ValueError):
    pass


class MissingColumn(DataError):
    def __init__(self, column: str):
        super().__init__(f"missing column {column!r}")
        self.column = column


class NonNumericCell(DataError):
    def __init__(self, row: int, column: str, value: str):
        # row is the 1-based data row; the file line is row + 1 (header)
        super().__init__(f"row {row} (line {row + 1}), column {column!r}: non-numeric value {value!r}")
        self.row = row
        self.column = column
        self.value = value


class DuplicatePoseId(DataError):
    def __init__(self, row: int, pose_id: int):
        super().__init__(f"row {row} (line {row + 1}): duplicate pose_id {pose_id}")
        self.row = row
        self.pose_id = pose_id


class TooFewRows(DataError):
    pass


class EmptyDataset(DataError):
    pass


# metrics
class LengthMismatch(PickpointError, ValueError):
    pass


class EmptyInput(PickpointError, ValueError):
    pass


class ConfigError(PickpointError, ValueError):
    pass


class MethodFailure(PickpointError, RuntimeError):
    """A benchmark method failed; ``method`` names it and ``cause`` holds the original error."""

    def __init__(self, method: str, cause: BaseException):
        super().__init__(f"{method}: {type(cause).__name__}: {cause}")
        self.method = method
        self.cause = cause
