"""Synthetic fruit scenes standing in for the mocap + artificial tree rig.

Each fruit is a sphere. A camera "sees" the sphere point nearest to it along
the ray through the centre; detection error is modelled in image space
(pixel jitter), along the ray (depth jitter plus an optional systematic depth
bias) and finally in the world frame (isotropic lateral jitter).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .camera import CameraModel, Pixel, backproject, project
from .data import Dataset, ObservationRow
from .errors import BehindCamera, CameraInsideFruit, EmptyBounds, VisibilityError
from .rng import derive_seed

__all__ = [
    "Bounds",
    "Fruit",
    "NoiseModel",
    "ObservationRow",
    "sample_fruits",
    "surface_point",
    "observe",
    "generate_dataset",
]

DEFAULT_RADIUS_MM = 35.0


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned box in millimetres (base frame)."""

    lower: tuple[float, float, float]
    upper: tuple[float, float, float]

    def __post_init__(self):
        lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
        if lo.shape != (3,) or hi.shape != (3,) or not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise EmptyBounds("bounds must be two finite 3-vectors")
        if np.any(lo > hi):
            raise EmptyBounds(f"lower {tuple(lo)} exceeds upper {tuple(hi)}")

    @classmethod
    def centred(cls, centre: Sequence[float], size: Sequence[float]) -> Bounds:
        c, s = np.asarray(centre, float), np.asarray(size, float) / 2.0
        return cls(tuple(c - s), tuple(c + s))


@dataclass(frozen=True, eq=False)
class Fruit:
    centre: np.ndarray
    radius: float = DEFAULT_RADIUS_MM

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        c = np.array(self.centre, dtype=float).reshape(3)
        c.setflags(write=False)
        object.__setattr__(self, "centre", c)


@dataclass(frozen=True)
class NoiseModel:
    """Per-camera detection error.

    Attributes:
        sigma_lateral: world-frame Gaussian jitter per axis (mm).
        sigma_depth: Gaussian jitter of the measured depth (mm).
        pixel_sigma: Gaussian jitter of the detected pixel (px).
        quantise_pixels: round the jittered pixel to integer coordinates.
        depth_bias: constant offset added to every measured depth (mm).
        dropout: probability that an observation is lost to occlusion.
    """

    sigma_lateral: float = 0.0
    sigma_depth: float = 0.0
    pixel_sigma: float = 0.0
    quantise_pixels: bool = False
    depth_bias: float = 0.0
    dropout: float = 0.0

    def __post_init__(self):
        for name in ("sigma_lateral", "sigma_depth", "pixel_sigma"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")


def sample_fruits(bounds: Bounds, n: int, radius: float = DEFAULT_RADIUS_MM, seed: int = 0) -> list[Fruit]:
    """``n`` fruit centres drawn uniformly from ``bounds``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(derive_seed(seed, 0xF2))
    lo, hi = np.asarray(bounds.lower, float), np.asarray(bounds.upper, float)
    centres = rng.uniform(lo, hi, size=(n, 3))
    return [Fruit(c, radius) for c in centres]


def surface_point(cam: CameraModel, fruit: Fruit) -> np.ndarray:
    """Sphere point nearest the camera on the line from its centre to the fruit centre."""
    ray = fruit.centre - cam.origin
    dist = float(np.linalg.norm(ray))
    if dist <= fruit.radius:
        raise CameraInsideFruit(f"camera {cam.label!r} is {dist:.3f} mm from a fruit of radius {fruit.radius} mm")
    return fruit.centre - fruit.radius * (ray / dist)


def _draw(seed: int) -> np.ndarray:
    # fixed-length draw keeps the stream layout independent of which sigmas are zero
    return np.random.default_rng(seed).standard_normal(6)


def observe(cam: CameraModel, fruit: Fruit, noise: NoiseModel, seed: int) -> np.ndarray:
    """Simulated detection of ``fruit`` by ``cam``, back-projected to the base frame."""
    z = _draw(seed)
    px = project(cam, surface_point(cam, fruit))
    u = px.u + noise.pixel_sigma * z[0]
    v = px.v + noise.pixel_sigma * z[1]
    depth = px.depth + noise.depth_bias + noise.sigma_depth * z[2]
    if noise.quantise_pixels:
        u, v = float(np.round(u)), float(np.round(v))
    if depth <= 0:
        raise BehindCamera(f"noisy depth {depth:.3f} mm is not positive")
    p = backproject(cam, Pixel(u, v, depth))
    return p + noise.sigma_lateral * z[3:6]


def _dropped(noise: NoiseModel, seed: int) -> bool:
    if noise.dropout <= 0.0:
        return False
    return bool(np.random.default_rng(derive_seed(seed, 0xD0)).random() < noise.dropout)


def generate_dataset(
    fruits: Sequence[Fruit],
    cam_fix: CameraModel,
    cam_eih: CameraModel,
    noise_fix: NoiseModel,
    noise_eih: NoiseModel,
    seed: int,
) -> Dataset:
    """One observation row per fruit, ``pose_id`` counting from 0.

    Noise seeds are derived from ``(seed, pose_id, camera)`` so every row is
    independent of generation order. Rows lost to the occlusion dropout hook
    are omitted (their pose ids are skipped).

    Raises:
        VisibilityError: naming the pose and camera that cannot see the fruit.
    """
    rows = []
    for pose_id, fruit in enumerate(fruits):
        obs = []
        lost = False
        for k, (cam, noise) in enumerate(((cam_fix, noise_fix), (cam_eih, noise_eih))):
            s = derive_seed(seed, pose_id, k)
            try:
                obs.append(observe(cam, fruit, noise, s))
            except (BehindCamera, CameraInsideFruit) as exc:
                raise VisibilityError(pose_id, cam.label, exc) from exc
            lost = lost or _dropped(noise, s)
        if not lost:
            rows.append(ObservationRow(pose_id, obs[0], obs[1], fruit.centre.copy()))
    return Dataset.from_rows(rows, provenance="simulated", seed=seed)
