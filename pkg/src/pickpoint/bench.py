"""Metrics, the thirteen-method comparison and the grasp-success simulation.

Model-based methods are trained per axis (three independent fits on the
``(c_fix, c_eih)`` coordinate pairs); the two analytical methods work on the
raw test observations. Every fit draws its seed from
``derive_seed(seed, method_index, axis)`` where ``method_index`` is the
method's position in :class:`MethodId`, so results do not depend on which
other methods run, in what order, or on how many threads.
"""

from __future__ import annotations

import enum
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import ensembles as ens
from . import fusion
from .camera import CameraModel
from .config import RunConfig, build_cameras, config_digest
from .data import Dataset, assemble, axis_views, split
from .errors import EmptyInput, LengthMismatch, MethodFailure
from .learners import Regressor, fit_linear, fit_mlp, fit_svr, fit_tree
from .rng import derive_seed, numpy_rng
from .scene import generate_dataset, sample_fruits


class MethodId(str, enum.Enum):
    LR = "LR"
    DT = "DT"
    SVR = "SVR"
    MLP = "MLP"
    ADABOOST = "AdaBoost"
    BAGGING_DT = "Bagging-DT"
    BAGGING_LR = "Bagging-LR"
    RF = "RF"
    VR = "VR"
    GRADIENT_BOOSTING = "GradientBoosting"
    SR = "SR"
    ANALYTICAL = "AnalyticalMultiCamera"
    SINGLE_CAMERA = "EyeInHandSingleCamera"

    @property
    def index(self) -> int:
        return list(MethodId).index(self)

    @property
    def trainable(self) -> bool:
        return self not in (MethodId.ANALYTICAL, MethodId.SINGLE_CAMERA)


MODEL_METHODS = tuple(m for m in MethodId if m.trainable)

# labels mirroring the published comparison table
TABLE_LABELS = {
    MethodId.BAGGING_DT: "Bagging (DT)",
    MethodId.BAGGING_LR: "Bagging (LR)",
    MethodId.GRADIENT_BOOSTING: "Gradient boosting",
    MethodId.ANALYTICAL: "Analytical multi-camera",
    MethodId.SINGLE_CAMERA: "Eye-in-hand camera",
}

CSV_HEADER = "method,mae_x_mm,mae_y_mm,mae_z_mm,med_mm,grasp_success_rate,seed"
HARVEST_STREAM = 0x6A5


def parse_methods(names: Sequence[str] | str) -> tuple[MethodId, ...]:
    if isinstance(names, str):
        names = [n for n in (s.strip() for s in names.split(",")) if n]
    try:
        return tuple(MethodId(n) for n in names)
    except ValueError:
        bad = [n for n in names if n not in {m.value for m in MethodId}]
        raise ValueError(f"unknown method(s) {', '.join(bad)}; choose from "
                         f"{', '.join(m.value for m in MethodId)}") from None


# metrics --------------------------------------------------------------------

def _pair(pred, truth) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=float).reshape(-1, 3)
    t = np.asarray(truth, dtype=float).reshape(-1, 3)
    if len(p) != len(t):
        raise LengthMismatch(f"{len(p)} predictions for {len(t)} ground-truth points")
    if len(p) == 0:
        raise EmptyInput("no points to score")
    return p, t


def mae_per_axis(pred, truth) -> tuple[float, float, float]:
    """Mean absolute error along x, y and z (mm)."""
    p, t = _pair(pred, truth)
    m = np.abs(p - t).mean(axis=0)
    return float(m[0]), float(m[1]), float(m[2])


def med(pred, truth) -> float:
    """Mean Euclidean distance (mm)."""
    p, t = _pair(pred, truth)
    return float(np.linalg.norm(p - t, axis=1).mean())


def grasp_success_rate(pred, truth, threshold_mm: float, attempts_per_pose: int = 3,
                       perturb_sigma_mm: float = 3.0, seed: int = 0) -> float:
    """Fraction of simulated picking attempts that land within ``threshold_mm``.

    Each pose gets ``attempts_per_pose`` attempts aimed at ``pred`` plus an
    isotropic Gaussian perturbation. The perturbations depend only on the seed
    and the array shape, so methods scored with the same seed face the same
    draws.
    """
    if not threshold_mm > 0:
        raise ValueError(f"threshold must be positive, got {threshold_mm}")
    if attempts_per_pose < 1 or perturb_sigma_mm < 0:
        raise ValueError("need attempts_per_pose >= 1 and perturb_sigma_mm >= 0")
    p, t = _pair(pred, truth)
    pert = numpy_rng(seed, 0x6A).normal(0.0, 1.0, (len(p), attempts_per_pose, 3)) * perturb_sigma_mm
    miss = np.linalg.norm(p[:, None, :] + pert - t[:, None, :], axis=2)
    return float(np.count_nonzero(miss <= threshold_mm) / miss.size)


# method registry -------------------------------------------------------------

FitFn = Callable[[np.ndarray, np.ndarray, int], Regressor]


def method_fitter(method: MethodId, cfg: RunConfig) -> FitFn:
    """``(x, y, seed) -> model`` for one trainable method under ``cfg``."""
    lc, ec = cfg.learners, cfg.ensembles
    params = ens.EnsembleParams(ec.n_estimators, ec.learning_rate, ec.gb_max_depth, ec.rf_max_features,
                                ec.composite_bagging_base)
    n, lr = ec.n_estimators, ec.learning_rate
    table: dict[MethodId, FitFn] = {
        MethodId.LR: lambda x, y, s: fit_linear(x, y),
        MethodId.DT: lambda x, y, s: fit_tree(x, y, seed=s),
        MethodId.SVR: lambda x, y, s: fit_svr(x, y, c=lc.svr_c, epsilon=lc.svr_epsilon),
        MethodId.MLP: lambda x, y, s: fit_mlp(x, y, hidden=lc.mlp_hidden, max_epochs=lc.mlp_epochs, seed=s),
        MethodId.ADABOOST: lambda x, y, s: ens.fit_adaboost_r2(x, y, n, lr, s),
        MethodId.BAGGING_DT: lambda x, y, s: ens.fit_bagging(x, y, "tree", n, s),
        MethodId.BAGGING_LR: lambda x, y, s: ens.fit_bagging(x, y, "linear", n, s),
        MethodId.RF: lambda x, y, s: ens.fit_random_forest(x, y, n, s, ec.rf_max_features),
        MethodId.VR: lambda x, y, s: ens.fit_voting(x, y, s, meta=ec.voting_meta, alpha=ec.voting_alpha,
                                                    l1_ratio=ec.voting_l1_ratio, params=params,
                                                    standardise=ec.voting_standardise),
        MethodId.GRADIENT_BOOSTING: lambda x, y, s: ens.fit_gradient_boosting(x, y, n, lr, s, ec.gb_max_depth),
        MethodId.SR: lambda x, y, s: ens.fit_stacking(x, y, s, n_folds=ec.stacking_folds, params=params),
    }
    if method not in table:
        raise ValueError(f"{method.value} has no trainable parameters")
    return table[method]


def fit_axis(method: MethodId, train: Dataset, axis: int, cfg: RunConfig, seed: int) -> Regressor:
    view = axis_views(train)[axis]
    try:
        return method_fitter(method, cfg)(view.x, view.y, derive_seed(seed, method.index, axis))
    except Exception as exc:
        raise MethodFailure(method.value, exc) from exc


def fit_method(method: MethodId, train: Dataset, cfg: RunConfig, seed: int, threads: int = 1) -> tuple:
    """Three per-axis models (x, y, z) for ``method``."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return tuple(pool.map(lambda a: fit_axis(method, train, a, cfg, seed), range(3)))
    return tuple(fit_axis(method, train, a, cfg, seed) for a in range(3))


def predict_method(models: Sequence[Regressor], d: Dataset) -> np.ndarray:
    return assemble([m.predict(v.x) for m, v in zip(models, axis_views(d))])


def analytical_estimate(method: MethodId, d: Dataset, cam_fix: CameraModel, cam_eih: CameraModel,
                        cfg: RunConfig) -> np.ndarray:
    r = cfg.scene.fruit_radius_mm
    try:
        if method is MethodId.SINGLE_CAMERA:
            return fusion.single_camera_estimate(cam_eih, d.c_eih, r)
        if method is MethodId.ANALYTICAL:
            return fusion.fuse(cam_fix, cam_eih, d.c_fix, d.c_eih, r, fusion.DirectionMode.parse(cfg.fusion.mode),
                               normalise=cfg.fusion.normalise)
    except Exception as exc:
        raise MethodFailure(method.value, exc) from exc
    raise ValueError(f"{method.value} is not an analytical method")


# report -----------------------------------------------------------------------

@dataclass(frozen=True)
class MethodResult:
    method: MethodId
    mae: tuple[float, float, float]
    med: float
    grasp_success_rate: float | None = None


@dataclass(frozen=True)
class BenchReport:
    rows: tuple[MethodResult, ...]
    config_digest: str
    seed: int

    def __getitem__(self, method: MethodId | str) -> MethodResult:
        m = MethodId(method)
        for r in self.rows:
            if r.method is m:
                return r
        raise KeyError(m.value)

    def methods(self) -> tuple[MethodId, ...]:
        return tuple(r.method for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for r in self.rows:
            rate = "" if r.grasp_success_rate is None else f"{r.grasp_success_rate:.6f}"
            buf.write(f"{r.method.value},{r.mae[0]:.6f},{r.mae[1]:.6f},{r.mae[2]:.6f},{r.med:.6f},{rate},{self.seed}\n")
        return buf.getvalue()

    def to_table(self) -> str:
        head = f"{'Model':<26}{'MAE x(mm)':>11}{'MAE y(mm)':>11}{'MAE z(mm)':>11}{'MED (mm)':>10}{'Grasp':>8}"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            rate = "" if r.grasp_success_rate is None else f"{100 * r.grasp_success_rate:.1f}%"
            label = TABLE_LABELS.get(r.method, r.method.value)
            lines.append(f"{label:<26}{r.mae[0]:>11.2f}{r.mae[1]:>11.2f}{r.mae[2]:>11.2f}{r.med:>10.2f}{rate:>8}")
        lines.append("-" * len(head))
        lines.append(f"seed {self.seed}  config {self.config_digest}")
        if MethodId.RF in self.methods():
            lines.append("note: RF takes no learning rate; the configured value applies to the boosting methods only.")
        return "\n".join(lines) + "\n"


def run_benchmark(train: Dataset, test: Dataset, cfg: RunConfig, seed: int,
                  methods: Sequence[MethodId | str] | None = None, threads: int = 1,
                  harvest: Dataset | None = None) -> BenchReport:
    """Score each selected method on ``test``; with ``harvest``, also simulate picking on it.

    Rows follow the canonical :class:`MethodId` order whatever the order of
    ``methods``. Raises :class:`MethodFailure` naming the first failing method.
    """
    chosen = [MethodId(m) for m in (methods if methods is not None else cfg.methods)]
    chosen = sorted(set(chosen), key=lambda m: m.index)
    cam_fix, cam_eih = build_cameras(cfg)
    targets = [test] if harvest is None else [test, harvest]

    def evaluate(method: MethodId) -> list[np.ndarray]:
        if method.trainable:
            models = tuple(fit_axis(method, train, a, cfg, seed) for a in range(3))
            try:
                return [predict_method(models, d) for d in targets]
            except Exception as exc:
                raise MethodFailure(method.value, exc) from exc
        return [analytical_estimate(method, d, cam_fix, cam_eih, cfg) for d in targets]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            preds = list(pool.map(evaluate, chosen))
    else:
        preds = [evaluate(m) for m in chosen]

    g = cfg.grasp
    grasp_seed = derive_seed(seed, HARVEST_STREAM)
    rows = []
    for method, p in zip(chosen, preds):
        rate = None
        if harvest is not None:
            rate = grasp_success_rate(p[1], harvest.g, g.threshold_mm, g.attempts_per_pose,
                                      g.perturb_sigma_mm, grasp_seed)
        rows.append(MethodResult(method, mae_per_axis(p[0], test.g), med(p[0], test.g), rate))
    return BenchReport(tuple(rows), config_digest(cfg), seed)


# end-to-end runs ------------------------------------------------------------------

def simulate(cfg: RunConfig, seed: int, n_poses: int | None = None) -> Dataset:
    """Synthetic dataset of ``n_poses`` fruits (default ``cfg.scene.n_poses``)."""
    cam_fix, cam_eih = build_cameras(cfg)
    n = cfg.scene.n_poses if n_poses is None else n_poses
    fruits = sample_fruits(cfg.scene.bounds(), n, cfg.scene.fruit_radius_mm, seed)
    return generate_dataset(fruits, cam_fix, cam_eih, cfg.noise.fixed.build(), cfg.noise.eye_in_hand.build(), seed)


def harvest_set(cfg: RunConfig, seed: int) -> Dataset:
    """The independent picking-trial poses used for the grasp simulation."""
    return simulate(cfg, derive_seed(seed, HARVEST_STREAM), cfg.grasp.n_poses)


def bench_run(cfg: RunConfig, seed: int, dataset: Dataset | None = None,
              methods: Sequence[MethodId | str] | None = None, threads: int = 1) -> BenchReport:
    """Simulate (unless ``dataset`` is given), split, and benchmark."""
    d = simulate(cfg, seed) if dataset is None else dataset
    train, test = split(d, cfg.scene.test_fraction, seed)
    harvest = harvest_set(cfg, seed) if cfg.grasp.enabled else None
    return run_benchmark(train, test, cfg, seed, methods, threads, harvest)
