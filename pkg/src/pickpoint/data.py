"""Dataset schema, CSV I/O, per-axis views and the train/test split."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DuplicatePoseId, EmptyDataset, MissingColumn, NonNumericCell, TooFewRows
from .rng import SplitMix64

COLUMNS = ("pose_id", "x_fix", "y_fix", "z_fix", "x_eih", "y_eih", "z_eih", "x_g", "y_g", "z_g")
AXES = ("x", "y", "z")
DEFAULT_TEST_FRACTION = 0.2


@dataclass(frozen=True, eq=False)
class ObservationRow:
    """One fruit pose: the two observed surface points and the true centre (mm)."""

    pose_id: int
    c_fix: np.ndarray
    c_eih: np.ndarray
    g: np.ndarray


class Dataset:
    """Immutable column store of observation rows.

    Attributes:
        pose_ids: ``(N,)`` int array, unique.
        c_fix, c_eih, g: ``(N, 3)`` float arrays in millimetres, base frame.
        provenance: ``"simulated"`` or ``"ingested"``.
        seed: master seed of the simulation, if any.
    """

    def __init__(self, pose_ids, c_fix, c_eih, g, provenance: str = "ingested", seed: int | None = None):
        pose_ids = np.asarray(pose_ids, dtype=np.int64).reshape(-1)
        arrays = []
        for a in (c_fix, c_eih, g):
            a = np.array(a, dtype=float).reshape(-1, 3)
            a.setflags(write=False)
            arrays.append(a)
        if not all(len(a) == len(pose_ids) for a in arrays):
            raise ValueError("column lengths differ")
        if len(np.unique(pose_ids)) != len(pose_ids):
            seen: set[int] = set()
            for i, p in enumerate(pose_ids.tolist()):
                if p in seen:
                    raise DuplicatePoseId(i + 1, p)
                seen.add(p)
        pose_ids.setflags(write=False)
        self.pose_ids = pose_ids
        self.c_fix, self.c_eih, self.g = arrays
        self.provenance = provenance
        self.seed = seed

    @classmethod
    def from_rows(cls, rows: Iterable[ObservationRow], provenance: str = "ingested",
                  seed: int | None = None) -> Dataset:
        rows = list(rows)
        if not rows:
            empty = np.zeros((0, 3))
            return cls(np.zeros(0, dtype=np.int64), empty, empty, empty, provenance, seed)
        return cls(
            [r.pose_id for r in rows],
            np.stack([r.c_fix for r in rows]),
            np.stack([r.c_eih for r in rows]),
            np.stack([r.g for r in rows]),
            provenance,
            seed,
        )

    def __len__(self) -> int:
        return len(self.pose_ids)

    @property
    def rows(self) -> list[ObservationRow]:
        return [
            ObservationRow(int(p), self.c_fix[i], self.c_eih[i], self.g[i])
            for i, p in enumerate(self.pose_ids)
        ]

    def subset(self, index: Sequence[int] | np.ndarray) -> Dataset:
        index = np.asarray(index, dtype=np.int64)
        return Dataset(self.pose_ids[index], self.c_fix[index], self.c_eih[index], self.g[index],
                       self.provenance, self.seed)

    def equals(self, other: Dataset, atol: float = 0.0) -> bool:
        return (
            len(self) == len(other)
            and np.array_equal(self.pose_ids, other.pose_ids)
            and all(
                np.allclose(a, b, rtol=0.0, atol=atol)
                for a, b in ((self.c_fix, other.c_fix), (self.c_eih, other.c_eih), (self.g, other.g))
            )
        )


def to_csv_text(d: Dataset) -> str:
    buf = io.StringIO()
    buf.write(",".join(COLUMNS) + "\n")
    block = np.hstack([d.c_fix, d.c_eih, d.g])
    for pid, vals in zip(d.pose_ids.tolist(), block):
        buf.write(str(pid) + "," + ",".join(f"{v:.6f}" for v in vals) + "\n")
    return buf.getvalue()


def save_csv(d: Dataset, path: str | Path) -> None:
    """Write ``d`` as UTF-8 CSV with LF endings and 6-decimal coordinates."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_csv_text(d))


def parse_csv_text(text: str) -> Dataset:
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise MissingColumn(COLUMNS[0]) from None
    for col in COLUMNS:
        if col not in header:
            raise MissingColumn(col)
    where = {col: header.index(col) for col in COLUMNS}
    ids: list[int] = []
    values: list[list[float]] = []
    for rowno, rec in enumerate(reader, start=1):
        if not rec or all(not c.strip() for c in rec):
            continue
        out = []
        for col in COLUMNS:
            i = where[col]
            cell = rec[i].strip() if i < len(rec) else ""
            try:
                if col == "pose_id":
                    ids.append(int(cell))
                else:
                    v = float(cell)
                    if not math.isfinite(v):
                        raise ValueError
                    out.append(v)
            except ValueError:
                raise NonNumericCell(rowno, col, cell) from None
        values.append(out)
    block = np.array(values, dtype=float).reshape(-1, 9)
    return Dataset(ids, block[:, 0:3], block[:, 3:6], block[:, 6:9], provenance="ingested")


def load_csv(path: str | Path) -> Dataset:
    """Read a dataset CSV.

    Raises:
        MissingColumn: a required header entry is absent.
        NonNumericCell: with the 1-based data row and the column name.
        DuplicatePoseId: a pose_id appears twice.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_csv_text(fh.read())


def n_test_rows(n: int, test_fraction: float = DEFAULT_TEST_FRACTION) -> int:
    """round-half-up of ``test_fraction * n``, clamped to ``[1, n - 1]``."""
    return min(max(1, math.floor(test_fraction * n + 0.5)), n - 1)


def split(d: Dataset, test_fraction: float = DEFAULT_TEST_FRACTION, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Seeded train/test partition.

    Pose ids are shuffled with SplitMix64 Fisher-Yates; the first
    ``n_test_rows`` shuffled ids form the test set. Both parts keep the
    parent's row order.
    """
    n = len(d)
    if n < 2:
        raise TooFewRows(f"need at least 2 rows to split, got {n}")
    order = SplitMix64(seed).shuffle(d.pose_ids.tolist())
    test_ids = set(order[: n_test_rows(n, test_fraction)])
    is_test = np.array([p in test_ids for p in d.pose_ids.tolist()])
    return d.subset(np.flatnonzero(~is_test)), d.subset(np.flatnonzero(is_test))


class AxisView(NamedTuple):
    """Per-axis regression problem: columns are (fixed-camera, eye-in-hand) coordinates."""

    axis: str
    x: np.ndarray
    y: np.ndarray


def axis_views(d: Dataset) -> tuple[AxisView, AxisView, AxisView]:
    if len(d) == 0:
        raise EmptyDataset("cannot build axis views of an empty dataset")
    return tuple(
        AxisView(name, np.column_stack([d.c_fix[:, k], d.c_eih[:, k]]), d.g[:, k].copy())
        for k, name in enumerate(AXES)
    )


def assemble(per_axis: Sequence[np.ndarray]) -> np.ndarray:
    """Stack three per-axis prediction vectors back into ``(N, 3)`` points."""
    if len(per_axis) != 3:
        raise ValueError("need exactly three per-axis vectors")
    return np.column_stack([np.asarray(p, dtype=float) for p in per_axis])
