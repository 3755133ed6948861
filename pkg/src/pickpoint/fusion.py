"""Analytical picking-point estimators.

The multi-camera estimate averages the two observed surface points and pushes
the midpoint inward by the fruit radius along the mean of the two cameras'
direction vectors. The single-camera estimate offsets one observation by the
radius along that camera's optical axis.
"""

from __future__ import annotations

import enum

import numpy as np

from . import geometry as geo
from .camera import CameraModel
from .errors import CoincidentPoint, ZeroRotation


class DirectionMode(enum.Enum):
    """How a camera's direction vector is obtained.

    RODRIGUES_AXIS: unit axis of the camera's rotation vector (literal reading).
    OPTICAL_AXIS: camera +z axis in the base frame.
    LINE_OF_SIGHT: unit vector from the camera centre to the observed point.
    """

    RODRIGUES_AXIS = "rodrigues"
    OPTICAL_AXIS = "optical-axis"
    LINE_OF_SIGHT = "line-of-sight"

    @classmethod
    def parse(cls, value: str | DirectionMode) -> DirectionMode:
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower().replace("_", "-")
        aliases = {"rodriguesaxis": "rodrigues", "rodrigues-axis": "rodrigues", "opticalaxis": "optical-axis",
                   "optical": "optical-axis", "lineofsight": "line-of-sight", "los": "line-of-sight"}
        return cls(aliases.get(v, v))


def midpoint(c_fix: np.ndarray, c_eih: np.ndarray) -> np.ndarray:
    return 0.5 * (np.asarray(c_fix, dtype=float) + np.asarray(c_eih, dtype=float))


def direction_vector(cam: CameraModel, observed: np.ndarray | None, mode: DirectionMode) -> np.ndarray:
    """Unit direction used by the analytical estimator for one camera.

    ``observed`` may be ``(3,)`` or ``(N, 3)`` for LINE_OF_SIGHT; it is ignored
    by the other modes.
    """
    mode = DirectionMode.parse(mode)
    if mode is DirectionMode.OPTICAL_AXIS:
        axis = cam.optical_axis
        return axis / np.linalg.norm(axis)
    if mode is DirectionMode.RODRIGUES_AXIS:
        rv = geo.log_map(cam.camera_to_world.rotation)
        n = np.linalg.norm(rv)
        if n < 1e-12:
            raise ZeroRotation(f"camera {cam.label!r} has no rotation; its rotation vector has no direction")
        return rv / n
    ray = np.asarray(observed, dtype=float) - cam.origin
    n = np.linalg.norm(ray, axis=-1, keepdims=True)
    if np.any(n < 1e-12):
        raise CoincidentPoint(f"observed point coincides with the centre of camera {cam.label!r}")
    return ray / n


def analytical_centre(
    c_fix: np.ndarray,
    c_eih: np.ndarray,
    r: float,
    dir_fix: np.ndarray,
    dir_eih: np.ndarray,
    normalise: bool = False,
) -> np.ndarray:
    """``M + r * (dir_fix + dir_eih) / 2`` with ``M`` the midpoint.

    The averaged direction is used as is; ``normalise=True`` rescales it to
    unit length for comparison runs. Works row-wise on ``(N, 3)`` inputs.
    """
    d = 0.5 * (np.asarray(dir_fix, dtype=float) + np.asarray(dir_eih, dtype=float))
    if normalise:
        d = d / np.linalg.norm(d, axis=-1, keepdims=True)
    return midpoint(c_fix, c_eih) + r * d


def single_camera_estimate(cam: CameraModel, observed: np.ndarray, r: float) -> np.ndarray:
    """Observed surface point pushed ``r`` mm along the camera's optical axis."""
    return np.asarray(observed, dtype=float) + r * cam.optical_axis


def fuse(cam_fix: CameraModel, cam_eih: CameraModel, c_fix: np.ndarray, c_eih: np.ndarray, r: float,
         mode: DirectionMode | str = DirectionMode.LINE_OF_SIGHT, normalise: bool = False) -> np.ndarray:
    """Multi-camera estimate with directions taken from the two camera models."""
    mode = DirectionMode.parse(mode)
    d_fix = direction_vector(cam_fix, c_fix, mode)
    d_eih = direction_vector(cam_eih, c_eih, mode)
    return analytical_centre(c_fix, c_eih, r, d_fix, d_eih, normalise=normalise)
