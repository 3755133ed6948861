"""Pinhole camera model and the two mounting constructions.

A :class:`CameraModel` stores the world (robot base) -> camera transform, which
is what the projection consumes. The mount constructors below produce the
opposite direction (camera -> base), so :func:`camera_from_pose` inverts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import geometry as geo
from .errors import BehindCamera, DegenerateConfiguration, NonPositiveDepth, WrongChainLength
from .geometry import RigidTransform

MIN_DEPTH_MM = 1e-6
FIXED_CAMERA_PITCH = -math.pi / 3
N_ARM_LINKS = 8


@dataclass(frozen=True)
class Intrinsics:
    fx: float = 615.0
    fy: float = 615.0
    cx: float = 320.0
    cy: float = 240.0
    width: int = 640
    height: int = 480

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])


class Pixel(NamedTuple):
    """Image coordinates plus the camera-frame depth (mm) of the ray point."""

    u: float | np.ndarray
    v: float | np.ndarray
    depth: float | np.ndarray


@dataclass(frozen=True, eq=False)
class CameraModel:
    intrinsics: Intrinsics
    world_to_camera: RigidTransform
    label: str = "cam"
    _camera_to_world: RigidTransform = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_camera_to_world", geo.invert(self.world_to_camera))

    @property
    def camera_to_world(self) -> RigidTransform:
        return self._camera_to_world

    @property
    def origin(self) -> np.ndarray:
        """Camera centre in the world frame."""
        return self._camera_to_world.translation

    @property
    def optical_axis(self) -> np.ndarray:
        """Camera +z axis expressed in the world frame."""
        return self._camera_to_world.rotation[:, 2]

    def projection_matrix(self) -> np.ndarray:
        """The 3x4 matrix ``K [R | t]`` acting on homogeneous world points."""
        rt = np.hstack([self.world_to_camera.rotation, self.world_to_camera.translation[:, None]])
        return self.intrinsics.K @ rt


def camera_from_pose(camera_to_world: RigidTransform, intrinsics: Intrinsics | None = None,
                     label: str = "cam") -> CameraModel:
    return CameraModel(intrinsics or Intrinsics(), geo.invert(camera_to_world), label)


def project(cam: CameraModel, world_point: np.ndarray) -> Pixel:
    """World point(s) -> pixel coordinates and depth.

    Raises:
        BehindCamera: if any camera-frame depth is at or below 1e-6 mm.
    """
    p = geo.apply(cam.world_to_camera, world_point)
    z = p[..., 2]
    if np.any(z <= MIN_DEPTH_MM):
        raise BehindCamera(f"camera-frame depth {np.min(z):.6g} mm is not in front of camera {cam.label!r}")
    k = cam.intrinsics
    u = k.fx * p[..., 0] / z + k.cx
    v = k.fy * p[..., 1] / z + k.cy
    if np.ndim(z) == 0:
        return Pixel(float(u), float(v), float(z))
    return Pixel(u, v, z)


def backproject(cam: CameraModel, px: Pixel) -> np.ndarray:
    """Inverse of :func:`project`."""
    u, v, d = (np.asarray(a, dtype=float) for a in px)
    if np.any(d <= 0):
        raise NonPositiveDepth(f"depth must be positive, got {np.min(d)}")
    k = cam.intrinsics
    p_cam = np.stack([(u - k.cx) * d / k.fx, (v - k.cy) * d / k.fy, d], axis=-1)
    return geo.apply(cam.camera_to_world, p_cam)


def fixed_camera_pose(t_offset: Sequence[float], angle: float = FIXED_CAMERA_PITCH) -> RigidTransform:
    """Camera -> base transform of the statically mounted camera.

    The holder tilts the camera by ``angle`` (default -60 degrees) about the
    base Y axis; ``t_offset`` (mm) is then added to the rotated coordinates.
    """
    t = np.asarray(t_offset, dtype=float)
    if t.shape != (3,) or not np.all(np.isfinite(t)):
        raise ValueError(f"offset must be 3 finite values, got {t_offset!r}")
    return RigidTransform(geo.rotation_about_y(angle), t)


def eye_in_hand_pose(joint_transforms: Sequence[RigidTransform], t_ee_cam: RigidTransform) -> RigidTransform:
    """Camera -> base transform of the arm-mounted camera.

    ``joint_transforms`` holds the eight link transforms base->1, 1->2, ...,
    7->end-effector; ``t_ee_cam`` is the hand-eye calibration result.
    """
    joint_transforms = list(joint_transforms)
    if len(joint_transforms) != N_ARM_LINKS:
        raise WrongChainLength(f"expected {N_ARM_LINKS} link transforms, got {len(joint_transforms)}")
    return geo.chain([*joint_transforms, t_ee_cam])


def dh_link(a: float, d: float, alpha: float, theta: float) -> RigidTransform:
    """One link in the modified (Craig) Denavit-Hartenberg convention.

    ``Rx(alpha) Tx(a) Rz(theta) Tz(d)``; lengths in mm, angles in radians.
    """
    rx = RigidTransform(geo.rotation_about_x(alpha), np.zeros(3))
    rz = RigidTransform(geo.rotation_about_z(theta), np.zeros(3))
    return geo.chain([rx, RigidTransform.from_translation([a, 0.0, 0.0]), rz,
                      RigidTransform.from_translation([0.0, 0.0, d])])


def arm_links(dh_table: Sequence[Sequence[float]], joints: Sequence[float], flange_mm: float) -> list[RigidTransform]:
    """Seven revolute links from ``(a, d, alpha)`` rows and joint angles, plus the flange offset."""
    if len(dh_table) != len(joints) or len(joints) != N_ARM_LINKS - 1:
        raise WrongChainLength(f"expected {N_ARM_LINKS - 1} DH rows and joint angles, "
                               f"got {len(dh_table)} and {len(joints)}")
    links = [dh_link(a, d, alpha, q) for (a, d, alpha), q in zip(dh_table, joints)]
    return [*links, RigidTransform.from_translation([0.0, 0.0, flange_mm])]


def estimate_rigid_transform(src_points: np.ndarray, dst_points: np.ndarray) -> tuple[RigidTransform, float]:
    """Least-squares rigid transform with ``dst ~ R @ src + t`` (Kabsch).

    Returns:
        The transform and the RMS residual (mm) over the correspondences.
    """
    a = np.asarray(src_points, dtype=float)
    b = np.asarray(dst_points, dtype=float)
    if a.ndim != 2 or a.shape[1] != 3 or a.shape != b.shape:
        raise DegenerateConfiguration(f"need matched (N, 3) point sets, got {a.shape} and {b.shape}")
    if a.shape[0] < 3:
        raise DegenerateConfiguration(f"need at least 3 correspondences, got {a.shape[0]}")
    ca, cb = a.mean(axis=0), b.mean(axis=0)
    a0, b0 = a - ca, b - cb
    sv = np.linalg.svd(a0, compute_uv=False)
    if sv[0] == 0.0 or sv[1] <= 1e-9 * sv[0]:
        raise DegenerateConfiguration("source points are collinear or coincident")
    u, _, vt = np.linalg.svd(a0.T @ b0)
    d = 1.0 if np.linalg.det(vt.T @ u.T) >= 0 else -1.0
    r = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    t = cb - r @ ca
    resid = b - (a @ r.T + t)
    rms = float(np.sqrt(np.mean(np.sum(resid**2, axis=1))))
    return RigidTransform(r, t), rms
