"""``pickpoint`` command line.

Subcommands: simulate, bench, train, eval, fuse, validate. The global flags
``--config``, ``--seed``, ``--threads`` and ``--out`` may appear before or
after the subcommand. Flags override config-file keys, which override the
built-in defaults.

Exit codes: 0 success, 1 usage, 2 config, 3 data, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, bench, fusion
from . import model_io
from .config import RunConfig, build_cameras, config_digest, load_config
from .data import Dataset, load_csv, save_csv, split, to_csv_text
from .errors import (
    CoincidentPoint,
    ConfigError,
    DataError,
    DegenerateConfiguration,
    DimensionMismatch,
    LengthMismatch,
    MethodFailure,
    ModelFormatError,
    PickpointError,
    VisibilityError,
    ZeroRotation,
)

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="TOML run configuration (defaults are used when omitted)")
    p.add_argument("--seed", type=int, default=d, help="master seed (overrides the config)")
    p.add_argument("--threads", type=int, default=d, help="worker threads; results do not depend on it")
    p.add_argument("--out", default=d, help="output file (simulate, fuse, eval) or directory (bench, train)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pickpoint", description="Fruit picking-point localisation lab.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        _global_flags(p, suppress=True)
        return p

    add("simulate", "write a synthetic dataset CSV")

    p = add("bench", "split, train every method, write the comparison table and CSV")
    p.add_argument("--dataset", help="dataset CSV (simulated on the fly when omitted)")
    p.add_argument("--methods", help="comma-separated subset of methods")
    p.add_argument("--fusion-mode", choices=[m.value for m in fusion.DirectionMode])

    p = add("train", "fit model-based methods and save one model bundle per method")
    p.add_argument("--dataset", help="training CSV, used in full (default: train split of a simulated set)")
    p.add_argument("--methods", help="comma-separated model-based methods (default: all of them)")

    p = add("eval", "score saved model bundles on a dataset")
    p.add_argument("models", nargs="+", help="model bundle files written by 'train'")
    p.add_argument("--dataset", help="evaluation CSV, used in full (default: test split of a simulated set)")

    p = add("fuse", "analytical estimates (pose_id, gx, gy, gz) for every row of a dataset")
    p.add_argument("--dataset", required=True, help="dataset CSV")
    p.add_argument("--fusion-mode", choices=[m.value for m in fusion.DirectionMode])

    p = add("validate", "schema and physical-plausibility check of a dataset CSV")
    p.add_argument("dataset", help="dataset CSV")
    return parser


def _effective_config(args) -> RunConfig:
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.threads is not None:
        overrides["threads"] = args.threads
    if getattr(args, "methods", None):
        try:
            overrides["methods"] = [m.value for m in bench.parse_methods(args.methods)]
        except ValueError as exc:
            raise UsageError(f"--methods: {exc}") from None
    if getattr(args, "fusion_mode", None):
        overrides["fusion"] = {"mode": args.fusion_mode}
    return load_config(args.config, overrides)


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _out_dir(args, cfg: RunConfig) -> Path:
    d = Path(args.out if args.out is not None else cfg.paths.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _dataset_arg(args, cfg: RunConfig) -> str | None:
    return getattr(args, "dataset", None) or cfg.paths.dataset


def cmd_simulate(args, cfg: RunConfig) -> int:
    d = bench.simulate(cfg, cfg.seed)
    if args.out is None:
        sys.stdout.write(to_csv_text(d))
    else:
        save_csv(d, args.out)
    print(f"simulated {len(d)} rows (seed {cfg.seed})" + (f" -> {args.out}" if args.out else ""), file=sys.stderr)
    return EXIT_OK


def cmd_bench(args, cfg: RunConfig) -> int:
    path = _dataset_arg(args, cfg)
    d = load_csv(path) if path else None
    report = bench.bench_run(cfg, cfg.seed, d, cfg.methods, cfg.threads)
    out = _out_dir(args, cfg)
    (out / "bench_report.txt").write_text(report.to_table(), encoding="utf-8", newline="\n")
    (out / "bench_report.csv").write_text(report.to_csv(), encoding="utf-8", newline="\n")
    sys.stdout.write(report.to_table())
    print(f"wrote {out / 'bench_report.txt'} and {out / 'bench_report.csv'}", file=sys.stderr)
    return EXIT_OK


def _train_eval_data(args, cfg: RunConfig, part: int) -> Dataset:
    path = _dataset_arg(args, cfg)
    if path:
        return load_csv(path)
    return split(bench.simulate(cfg, cfg.seed), cfg.scene.test_fraction, cfg.seed)[part]


def cmd_train(args, cfg: RunConfig) -> int:
    methods = bench.parse_methods(cfg.methods) if getattr(args, "methods", None) else bench.MODEL_METHODS
    fixed = [m.value for m in methods if not m.trainable]
    if fixed:
        raise UsageError(f"nothing to train for {', '.join(fixed)}; they have no fitted parameters")
    train = _train_eval_data(args, cfg, 0)
    out = _out_dir(args, cfg)
    digest = config_digest(cfg)
    for m in methods:
        models = bench.fit_method(m, train, cfg, cfg.seed, cfg.threads)
        path = out / f"model_{m.value}.txt"
        model_io.save_bundle(model_io.ModelBundle(m.value, models, cfg.seed, digest), path)
        print(f"{m.value}: trained on {len(train)} rows -> {path}")
    return EXIT_OK


def cmd_eval(args, cfg: RunConfig) -> int:
    data = _train_eval_data(args, cfg, 1)
    rows = []
    for path in args.models:
        b = model_io.load_bundle(path)
        try:
            method = bench.MethodId(b.method)
        except ValueError:
            raise ModelFormatError(f"{path}: unknown method {b.method!r}") from None
        try:
            pred = bench.predict_method(b.models, data)
        except DimensionMismatch as exc:
            raise MethodFailure(method.value, exc) from exc
        rows.append(bench.MethodResult(method, bench.mae_per_axis(pred, data.g), bench.med(pred, data.g)))
    report = bench.BenchReport(tuple(rows), config_digest(cfg), cfg.seed)
    sys.stdout.write(report.to_table())
    if args.out is not None:
        _write(report.to_csv(), args.out)
    return EXIT_OK


def cmd_fuse(args, cfg: RunConfig) -> int:
    d = load_csv(args.dataset)
    cam_fix, cam_eih = build_cameras(cfg)
    g = fusion.fuse(cam_fix, cam_eih, d.c_fix, d.c_eih, cfg.scene.fruit_radius_mm,
                    fusion.DirectionMode.parse(cfg.fusion.mode), normalise=cfg.fusion.normalise)
    lines = ["pose_id,gx,gy,gz"]
    lines += [f"{pid},{p[0]:.6f},{p[1]:.6f},{p[2]:.6f}" for pid, p in zip(d.pose_ids, np.atleast_2d(g))]
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def plausibility_warnings(d: Dataset, radius: float, slack: float = 1e-6) -> list[str]:
    """Rows whose observed surface point lies farther than ``2 r`` from the centre."""
    out = []
    for row, (pid, cf, ce, g) in enumerate(zip(d.pose_ids, d.c_fix, d.c_eih, d.g), start=1):
        for name, c in (("c_fix", cf), ("c_eih", ce)):
            dist = float(np.linalg.norm(c - g))
            if dist > 2 * radius + slack:
                out.append(f"row {row} (pose_id {pid}): |{name} - g| = {dist:.3f} mm exceeds 2r = {2 * radius:g} mm")
    return out


def cmd_validate(args, cfg: RunConfig) -> int:
    d = load_csv(args.dataset)
    issues = plausibility_warnings(d, cfg.scene.fruit_radius_mm)
    for msg in issues:
        print(f"warning: {msg}")
    if issues:
        print(f"{args.dataset}: {len(d)} rows, {len(issues)} plausibility warning(s)")
        return EXIT_DATA
    print(f"{args.dataset}: {len(d)} rows, clean")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "bench": cmd_bench,
    "train": cmd_train,
    "eval": cmd_eval,
    "fuse": cmd_fuse,
    "validate": cmd_validate,
}

_NUMERIC = (MethodFailure, DegenerateConfiguration, ZeroRotation, CoincidentPoint, FloatingPointError,
            np.linalg.LinAlgError)
_DATA = (DataError, VisibilityError, LengthMismatch, ModelFormatError, OSError)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        for flag in ("config", "seed", "threads", "out"):
            if not hasattr(args, flag):
                setattr(args, flag, None)
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        if args.seed is not None and args.seed < 0:
            raise UsageError("--seed must be >= 0")
        cfg = _effective_config(args)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERIC as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _DATA as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PickpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
