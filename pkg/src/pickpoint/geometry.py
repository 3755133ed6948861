"""Rigid-body math for the picking-point pipeline.

Conventions:
    - Points are ``(3,)`` float arrays (or ``(N, 3)`` stacks) in millimetres.
    - ``RigidTransform(R, t)`` maps a point ``p`` expressed in the child frame
      to ``R @ p + t`` in the parent frame. ``compose(a, b)`` is the matrix
      product ``a @ b`` of the homogeneous forms, so ``chain`` reads the same
      way as a kinematic chain written left to right.
    - Rotation vectors (axis * angle) have magnitude in ``[0, pi]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyChain

__all__ = [
    "RigidTransform",
    "rotation_about_x",
    "rotation_about_y",
    "rotation_about_z",
    "hat",
    "vee",
    "exp_map",
    "log_map",
    "compose",
    "chain",
    "apply",
    "invert",
    "is_rotation",
]

_SMALL_ANGLE = 1e-12
# below this distance from pi the skew part no longer fixes the axis reliably
_NEAR_PI = 1e-3


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def rotation_about_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_about_y(angle: float) -> np.ndarray:
    """Rotation matrix for a right-handed turn of ``angle`` radians about +Y."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_about_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def hat(v: Sequence[float]) -> np.ndarray:
    """Skew-symmetric matrix ``[v]x`` such that ``hat(v) @ p == cross(v, p)``."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(m: np.ndarray) -> np.ndarray:
    """Inverse of :func:`hat` applied to the skew part of ``m``."""
    return 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def exp_map(v: Sequence[float]) -> np.ndarray:
    """Rodrigues' formula: rotation vector -> rotation matrix."""
    v = np.asarray(v, dtype=float)
    theta = float(np.linalg.norm(v))
    if theta < _SMALL_ANGLE:
        return np.eye(3) + hat(v)
    k = hat(v / theta)
    return np.eye(3) + math.sin(theta) * k + (1.0 - math.cos(theta)) * (k @ k)


def log_map(r: np.ndarray) -> np.ndarray:
    """Rotation matrix -> rotation vector with angle in ``[0, pi]``.

    The angle comes from ``atan2(sin, cos)`` so it stays well conditioned at
    both ends of the range. Within ``1e-3`` rad of pi the axis is read off the
    symmetric part ``(R + R^T)/2 - cos(theta) I = (1 - cos(theta)) k k^T``
    using its largest diagonal entry, and the skew part only fixes the sign.
    """
    r = np.asarray(r, dtype=float)
    w = vee(r)  # = sin(theta) * k
    s = float(np.linalg.norm(w))
    c = 0.5 * (float(np.trace(r)) - 1.0)
    theta = math.atan2(s, c)
    if theta < _SMALL_ANGLE:
        return w.copy()
    if math.pi - theta > _NEAR_PI:
        return w * (theta / s)
    kk = 0.5 * (r + r.T) - c * np.eye(3)
    kk /= 1.0 - c
    j = int(np.argmax(np.diag(kk)))
    k = kk[:, j] / math.sqrt(kk[j, j])
    k /= np.linalg.norm(k)
    if float(np.dot(k, w)) < 0.0:
        k = -k
    return k * theta


def is_rotation(r: np.ndarray, tol: float = 1e-9) -> bool:
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3) or not np.all(np.isfinite(r)):
        return False
    ortho = np.max(np.abs(r.T @ r - np.eye(3)))
    return bool(ortho < tol and abs(np.linalg.det(r) - 1.0) < tol)


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Rotation plus translation; the homogeneous form is ``[[R, t], [0, 1]]``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = _frozen(self.rotation)
        t = _frozen(self.translation).reshape(3)
        if r.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {r.shape}")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(t))):
            raise ValueError("transform entries must be finite")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", _frozen(t))

    @classmethod
    def identity(cls) -> RigidTransform:
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_translation(cls, t: Sequence[float]) -> RigidTransform:
        return cls(np.eye(3), np.asarray(t, dtype=float))

    @classmethod
    def from_rotvec(cls, rotvec: Sequence[float], t: Sequence[float] = (0.0, 0.0, 0.0)) -> RigidTransform:
        return cls(exp_map(rotvec), np.asarray(t, dtype=float))

    @classmethod
    def from_matrix(cls, m: np.ndarray, tol: float = 1e-3) -> RigidTransform:
        """Build from a 4x4 homogeneous matrix, e.g. one typed into a config file.

        The 3x3 block must be a rotation within ``tol`` (loose enough for
        entries rounded to four decimals); it is then snapped to the nearest
        exact rotation so the rounding does not leak into later products.
        """
        m = np.asarray(m, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got {m.shape}")
        if not np.allclose(m[3], [0.0, 0.0, 0.0, 1.0], atol=1e-12):
            raise ValueError("bottom row of a homogeneous transform must be (0, 0, 0, 1)")
        if not is_rotation(m[:3, :3], tol):
            raise ValueError("upper-left 3x3 block is not a rotation matrix")
        u, _, vt = np.linalg.svd(m[:3, :3])
        return cls(u @ vt, m[:3, 3])

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def __matmul__(self, other: RigidTransform) -> RigidTransform:
        return compose(self, other)

    def __repr__(self) -> str:
        rv = np.round(log_map(self.rotation), 6).tolist()
        t = np.round(self.translation, 6).tolist()
        return f"RigidTransform(rotvec={rv}, translation={t})"

    def allclose(self, other: RigidTransform, atol: float = 1e-9) -> bool:
        return bool(
            np.allclose(self.rotation, other.rotation, rtol=0.0, atol=atol)
            and np.allclose(self.translation, other.translation, rtol=0.0, atol=atol)
        )


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """``a @ b``: apply ``b`` first, then ``a``."""
    return RigidTransform(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def chain(transforms: Iterable[RigidTransform]) -> RigidTransform:
    """Left-to-right product ``T1 @ T2 @ ... @ Tn``."""
    transforms = list(transforms)
    if not transforms:
        raise EmptyChain("cannot chain an empty list of transforms")
    out = transforms[0]
    for t in transforms[1:]:
        out = compose(out, t)
    return out


def apply(t: RigidTransform, p: np.ndarray) -> np.ndarray:
    """Map point(s) ``p`` of shape ``(3,)`` or ``(N, 3)`` through ``t``."""
    p = np.asarray(p, dtype=float)
    return p @ t.rotation.T + t.translation


def invert(t: RigidTransform) -> RigidTransform:
    rt = t.rotation.T
    return RigidTransform(rt, -(rt @ t.translation))
