"""Run configuration: TOML file -> validated, immutable settings.

Precedence is command-line flags > file keys > built-in defaults. Unknown
keys anywhere in the file are rejected. :func:`config_digest` hashes the
effective configuration so reports can be traced back to their inputs.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on 3.10
    import tomli as tomllib

from . import camera as cam
from .errors import ConfigError
from .geometry import RigidTransform
from .scene import Bounds, NoiseModel

Vec3 = tuple[float, float, float]

# Franka-style 7-DoF arm, modified DH rows (a mm, d mm, alpha deg).
DEFAULT_DH = (
    (0.0, 333.0, 0.0),
    (0.0, 0.0, -90.0),
    (0.0, 316.0, 90.0),
    (82.5, 0.0, 90.0),
    (-82.5, 384.0, -90.0),
    (0.0, 0.0, 90.0),
    (88.0, 0.0, 90.0),
)
DEFAULT_JOINTS_DEG = (0.0, -57.3, 0.0, -160.4, 0.0, 189.1, 45.0)

ALL_METHODS = (
    "LR", "DT", "SVR", "MLP", "AdaBoost", "Bagging-DT", "Bagging-LR", "RF", "VR",
    "GradientBoosting", "SR", "AnalyticalMultiCamera", "EyeInHandSingleCamera",
)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class IntrinsicsConfig(_Strict):
    fx: float = Field(615.0, gt=0)
    fy: float = Field(615.0, gt=0)
    cx: float = 320.0
    cy: float = 240.0
    width: int = Field(640, gt=0)
    height: int = Field(480, gt=0)

    def build(self) -> cam.Intrinsics:
        return cam.Intrinsics(self.fx, self.fy, self.cx, self.cy, self.width, self.height)


class CameraConfig(_Strict):
    """One camera. ``kind`` selects which pose keys apply.

    * ``fixed``: ``offset_mm`` and ``pitch_deg`` (rotation about base Y).
    * ``eye-in-hand``: ``dh`` rows ``[a_mm, d_mm, alpha_deg]``, ``joints_deg``,
      ``flange_mm`` and the hand-eye transform (``hand_eye_rotvec``, radians,
      plus ``hand_eye_translation_mm``).
    * ``matrix``: ``camera_to_base``, a 4x4 homogeneous matrix.
    """

    kind: Literal["fixed", "eye-in-hand", "matrix"]
    intrinsics: IntrinsicsConfig = IntrinsicsConfig()
    offset_mm: Optional[Vec3] = None
    pitch_deg: float = -60.0
    dh: Optional[tuple[tuple[float, float, float], ...]] = None
    joints_deg: Optional[tuple[float, ...]] = None
    flange_mm: float = 107.0
    hand_eye_rotvec: Vec3 = (0.0, 0.0, 0.0)
    hand_eye_translation_mm: Vec3 = (0.0, 0.0, 0.0)
    camera_to_base: Optional[tuple[tuple[float, float, float, float], ...]] = None

    @model_validator(mode="after")
    def _required_keys(self):
        need = {"fixed": ("offset_mm",), "eye-in-hand": ("dh", "joints_deg"), "matrix": ("camera_to_base",)}
        missing = [k for k in need[self.kind] if getattr(self, k) is None]
        if missing:
            raise ValueError(f"camera kind {self.kind!r} requires {', '.join(missing)}")
        return self

    def pose(self) -> RigidTransform:
        if self.kind == "fixed":
            return cam.fixed_camera_pose(self.offset_mm, math.radians(self.pitch_deg))
        if self.kind == "eye-in-hand":
            rows = [(a, d, math.radians(al)) for a, d, al in self.dh]
            links = cam.arm_links(rows, [math.radians(q) for q in self.joints_deg], self.flange_mm)
            return cam.eye_in_hand_pose(links, RigidTransform.from_rotvec(self.hand_eye_rotvec,
                                                                          self.hand_eye_translation_mm))
        return RigidTransform.from_matrix(self.camera_to_base)

    def build(self, label: str) -> cam.CameraModel:
        return cam.camera_from_pose(self.pose(), self.intrinsics.build(), label=label)


def _fill_slots(cls, data, kind_key: str | None = None):
    """Complete partial per-slot tables from that slot's default instance.

    A table naming a different ``kind`` than the default starts from scratch.
    """
    if not isinstance(data, dict):
        return data
    out = dict(data)
    for name, field in cls.model_fields.items():
        given = out.get(name)
        if not isinstance(given, dict):
            continue
        default = field.default.model_dump()
        if kind_key is not None and given.get(kind_key, default[kind_key]) != default[kind_key]:
            continue
        out[name] = _deep_merge(default, given)
    return out


class CamerasConfig(_Strict):
    fixed: CameraConfig = CameraConfig(kind="fixed", offset_mm=(1500.0, 0.0, 100.0), pitch_deg=-60.0)
    eye_in_hand: CameraConfig = CameraConfig(
        kind="eye-in-hand", dh=DEFAULT_DH, joints_deg=DEFAULT_JOINTS_DEG, flange_mm=107.0,
        hand_eye_rotvec=(0.0, 0.0, -math.pi / 4), hand_eye_translation_mm=(0.0, -60.0, 40.0),
    )

    @model_validator(mode="before")
    @classmethod
    def _defaults_per_camera(cls, data):
        return _fill_slots(cls, data, kind_key="kind")


class NoiseConfig(_Strict):
    sigma_lateral_mm: float = Field(0.0, ge=0)
    sigma_depth_mm: float = Field(0.0, ge=0)
    pixel_sigma_px: float = Field(0.0, ge=0)
    quantise_pixels: bool = False
    depth_bias_mm: float = 0.0
    dropout: float = Field(0.0, ge=0, lt=1)

    def build(self) -> NoiseModel:
        return NoiseModel(self.sigma_lateral_mm, self.sigma_depth_mm, self.pixel_sigma_px,
                          self.quantise_pixels, self.depth_bias_mm, self.dropout)


class NoisesConfig(_Strict):
    fixed: NoiseConfig = NoiseConfig(sigma_lateral_mm=4.0, sigma_depth_mm=8.0, depth_bias_mm=20.0)
    eye_in_hand: NoiseConfig = NoiseConfig(sigma_lateral_mm=4.0, sigma_depth_mm=8.0, depth_bias_mm=6.0)

    @model_validator(mode="before")
    @classmethod
    def _defaults_per_camera(cls, data):
        return _fill_slots(cls, data)


class SceneConfig(_Strict):
    n_poses: int = Field(48, ge=1)
    fruit_radius_mm: float = Field(35.0, gt=0)
    test_fraction: float = Field(0.2, gt=0, lt=1)
    bounds_centre_mm: Vec3 = (700.0, 0.0, 400.0)
    bounds_size_mm: Vec3 = (600.0, 600.0, 400.0)

    @field_validator("bounds_size_mm")
    @classmethod
    def _non_negative(cls, v):
        if min(v) < 0:
            raise ValueError("box sizes must be >= 0")
        return v

    def bounds(self) -> Bounds:
        return Bounds.centred(self.bounds_centre_mm, self.bounds_size_mm)


class FusionConfig(_Strict):
    mode: Literal["line-of-sight", "optical-axis", "rodrigues"] = "line-of-sight"
    normalise: bool = False


class LearnerConfig(_Strict):
    svr_c: float = Field(10.0, gt=0)
    svr_epsilon: float = Field(0.1, ge=0)
    mlp_hidden: int = Field(100, ge=1)
    mlp_epochs: int = Field(200, ge=1)


class EnsembleConfig(_Strict):
    n_estimators: int = Field(100, ge=1)
    learning_rate: float = Field(0.1, gt=0)
    gb_max_depth: int = Field(3, ge=1)
    rf_max_features: Optional[int] = Field(None, ge=1)
    voting_meta: Literal["elasticnet", "average"] = "elasticnet"
    voting_alpha: float = Field(1.0, ge=0)
    voting_l1_ratio: float = Field(0.5, ge=0, le=1)
    voting_standardise: bool = False
    composite_bagging_base: Literal["tree", "linear"] = "tree"
    stacking_folds: int = Field(5, ge=2)


class GraspConfig(_Strict):
    enabled: bool = True
    n_poses: int = Field(27, ge=1)
    attempts_per_pose: int = Field(3, ge=1)
    threshold_mm: float = Field(15.0, gt=0)
    perturb_sigma_mm: float = Field(3.0, ge=0)


class PathsConfig(_Strict):
    dataset: Optional[str] = None
    out_dir: str = "."


class RunConfig(_Strict):
    seed: int = Field(0, ge=0, lt=2**64)
    threads: int = Field(1, ge=1)
    methods: tuple[str, ...] = ALL_METHODS
    scene: SceneConfig = SceneConfig()
    cameras: CamerasConfig = CamerasConfig()
    noise: NoisesConfig = NoisesConfig()
    fusion: FusionConfig = FusionConfig()
    learners: LearnerConfig = LearnerConfig()
    ensembles: EnsembleConfig = EnsembleConfig()
    grasp: GraspConfig = GraspConfig()
    paths: PathsConfig = PathsConfig()

    @field_validator("methods")
    @classmethod
    def _known_methods(cls, v):
        unknown = [m for m in v if m not in ALL_METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {', '.join(ALL_METHODS)}")
        if len(set(v)) != len(v):
            raise ValueError("methods must not repeat")
        if not v:
            raise ValueError("at least one method is required")
        return v


def _format_errors(exc: ValidationError, source: str) -> str:
    lines = [f"{source}: invalid configuration"]
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"  {loc}: {err['msg']}")
    return "\n".join(lines)


def _deep_merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = v
    return out


def from_mapping(data: dict, source: str = "<config>", overrides: dict | None = None) -> RunConfig:
    """Validate a parsed mapping (optionally with flag overrides merged on top)."""
    if overrides:
        data = _deep_merge(data, overrides)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc, source)) from None
    except ValueError as exc:  # geometry checks raised while building defaults
        raise ConfigError(f"{source}: {exc}") from None


def parse_toml(text: str, source: str = "<string>", overrides: dict | None = None) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return from_mapping(data, source, overrides)


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Read ``path`` (or use defaults when ``None``) and apply ``overrides``."""
    if path is None:
        return from_mapping({}, "<defaults>", overrides)
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{p}: cannot read config ({exc.strerror})") from None
    return parse_toml(text, str(p), overrides)


def config_digest(cfg: RunConfig) -> str:
    """First 16 hex digits of the SHA-256 of the canonical JSON form."""
    canon = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def build_cameras(cfg: RunConfig) -> tuple[cam.CameraModel, cam.CameraModel]:
    try:
        return cfg.cameras.fixed.build("fixed"), cfg.cameras.eye_in_hand.build("eye-in-hand")
    except ValueError as exc:
        raise ConfigError(f"camera definition: {exc}") from None
