"""Grid sweeps over drive detuning, Kerr strength, rotation rate and drive.

Every grid point is solved independently (with its own truncation probe),
so points can be farmed out to a process pool.  Results are always stored
in grid order, whatever order the workers finish in.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import BlockadeError, SpecError
from .lindblad import (
    DEFAULT_MAX_DIM,
    DEFAULT_START_DIM,
    DEFAULT_TRUNCATION_TOL,
    solve_converged,
)
from .params import DriveDirection, SystemParams, rotation_for_shift
from .statistics import Classification, PhononStats, classify, poisson_deviation, stats_from_state

AXIS_NAMES = ("drive_detuning", "nonlinearity_u", "rotation_omega", "drive_amp")
OUTPUTS = ("mean_n", "g2", "g3", "g4", "populations", "classification", "poisson_dev", "ratio")
N_REPORTED = 7  # P0..P6


class Directions(enum.Enum):
    LEFT_ONLY = "left"
    RIGHT_ONLY = "right"
    BOTH = "both"

    @classmethod
    def parse(cls, value: "Directions | str") -> "Directions":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("only", "")
        for member in cls:
            if member.value == key:
                return member
        raise SpecError(f"unknown directions {value!r}")

    @property
    def members(self) -> tuple[DriveDirection, ...]:
        if self is Directions.LEFT_ONLY:
            return (DriveDirection.LEFT,)
        if self is Directions.RIGHT_ONLY:
            return (DriveDirection.RIGHT,)
        return (DriveDirection.LEFT, DriveDirection.RIGHT)


@dataclass(frozen=True)
class SweepAxis:
    name: str
    start: float
    stop: float
    num_points: int

    def __post_init__(self) -> None:
        if self.name not in AXIS_NAMES:
            raise SpecError(f"unknown sweep axis {self.name!r}; expected one of {AXIS_NAMES}")
        if self.num_points < 2:
            raise SpecError(f"axis {self.name} needs at least 2 points")
        if not self.start < self.stop:
            raise SpecError(f"axis {self.name}: start must be < stop")
        if self.name in ("rotation_omega", "drive_amp", "nonlinearity_u") and self.start < 0:
            raise SpecError(f"axis {self.name} cannot be negative")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num_points)


@dataclass(frozen=True)
class SweepSpec:
    base: SystemParams
    axes: tuple[SweepAxis, ...]
    directions: Directions = Directions.LEFT_ONLY
    outputs: tuple[str, ...] = OUTPUTS
    start_dim: int = DEFAULT_START_DIM
    truncation_tol: float = DEFAULT_TRUNCATION_TOL
    max_dim: int = DEFAULT_MAX_DIM

    def __post_init__(self) -> None:
        axes = tuple(self.axes)
        if not 1 <= len(axes) <= 2:
            raise SpecError("a sweep needs one or two axes")
        if len({ax.name for ax in axes}) != len(axes):
            raise SpecError("sweep axes must be distinct")
        unknown = set(self.outputs) - set(OUTPUTS)
        if unknown:
            raise SpecError(f"unknown outputs {sorted(unknown)}")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "directions", Directions.parse(self.directions))
        object.__setattr__(self, "outputs", tuple(o for o in OUTPUTS if o in self.outputs))

    def grid(self) -> list[tuple[float, ...]]:
        return list(itertools.product(*(ax.values for ax in self.axes)))

    def point_params(self, coords: Sequence[float], direction: DriveDirection) -> SystemParams:
        changes = {ax.name: float(v) for ax, v in zip(self.axes, coords)}
        return replace(self.base, direction=direction, **changes)


@dataclass
class PointRecord:
    coords: tuple[float, ...]
    direction: DriveDirection
    mean_n: float = math.nan
    populations: np.ndarray | None = None
    stats: PhononStats | None = None
    classification: Classification | None = None
    dim: int | None = None
    residual: float = math.nan
    wall_time: float = 0.0
    error: str | None = None
    ratio: float = math.nan

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class SweepResult:
    spec: SweepSpec
    records: list[PointRecord] = field(default_factory=list)

    def select(self, direction: DriveDirection) -> list[PointRecord]:
        return [r for r in self.records if r.direction is direction]

    def column(self, name: str, direction: DriveDirection | None = None) -> np.ndarray:
        recs = self.records if direction is None else self.select(direction)
        return np.array([_record_value(r, name) for r in recs], dtype=float)

    @property
    def failures(self) -> list[PointRecord]:
        return [r for r in self.records if not r.ok]


def _record_value(rec: PointRecord, name: str) -> float:
    if name == "mean_n":
        return rec.mean_n
    if name.startswith("g") and name[1:].isdigit():
        return rec.stats.g.get(int(name[1:]), math.nan) if rec.stats else math.nan
    if name.startswith("P") and name[1:].isdigit():
        n = int(name[1:])
        if rec.populations is None:
            return math.nan
        return float(rec.populations[n]) if n < len(rec.populations) else 0.0
    raise KeyError(name)


def solve_params(
    params: SystemParams,
    start_dim: int = DEFAULT_START_DIM,
    tol: float = DEFAULT_TRUNCATION_TOL,
    max_dim: int = DEFAULT_MAX_DIM,
) -> PointRecord:
    """Converged steady state, statistics and verdict for one parameter set."""
    t0 = time.perf_counter()
    rec = PointRecord(coords=(), direction=params.direction)
    try:
        sol = solve_converged(params, start_dim, tol, max_dim)
        rec.dim, rec.residual = sol.dim, sol.residual
        pops = np.real(np.diag(sol.rho)).copy()
        rec.populations = pops
        rec.mean_n = float(np.dot(np.arange(len(pops)), pops))
        rec.stats = stats_from_state(sol.rho)
        rec.classification = classify(rec.stats)
    except BlockadeError as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    rec.wall_time = time.perf_counter() - t0
    return rec


def _solve_task(task: tuple[SweepSpec, tuple[float, ...], DriveDirection]) -> PointRecord:
    spec, coords, direction = task
    rec = solve_params(spec.point_params(coords, direction), spec.start_dim, spec.truncation_tol, spec.max_dim)
    rec.coords = tuple(float(c) for c in coords)
    return rec


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Solve every (grid point, direction) pair of ``spec``.

    Point failures are stored on the record; only spec errors raise.
    """
    tasks = [(spec, coords, d) for coords in spec.grid() for d in spec.directions.members]
    if workers <= 1:
        records = [_solve_task(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (8 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_solve_task, tasks, chunksize=chunk))
    if spec.directions is Directions.BOTH:
        for left, right in zip(records[0::2], records[1::2]):
            if left.ok and right.ok and left.stats.g[2] != 0:
                left.ratio = right.ratio = right.stats.g[2] / left.stats.g[2]
    return SweepResult(spec, records)


FIGURE_NAMES = ("fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig4a", "fig5a", "fig5b", "fig6a", "fig7")

DETUNING_AXIS = SweepAxis("drive_detuning", -40.0, 80.0, 241)
KERR_AXIS = SweepAxis("nonlinearity_u", 0.0, 40.0, 161)


def figure_recipe(name: str) -> SweepSpec:
    """Sweep reproducing the data behind one of the published figure panels."""
    key = name.strip().lower()
    fig2_drive = {"fig2a": 0.33, "fig2b": 1.0, "fig2c": 3.0, "fig2d": 5.0}
    if key in fig2_drive:
        base = SystemParams(nonlinearity_u=20.0, drive_amp=fig2_drive[key])
        return SweepSpec(base, (KERR_AXIS, DETUNING_AXIS), Directions.LEFT_ONLY,
                         ("mean_n", "g2", "classification"))
    if key in ("fig3a", "fig4a"):
        base = SystemParams(nonlinearity_u=20.0, drive_amp=0.33 if key == "fig3a" else 3.0)
        return SweepSpec(base, (DETUNING_AXIS,), Directions.LEFT_ONLY)
    if key in ("fig5a", "fig5b"):
        base = SystemParams(nonlinearity_u=20.0, drive_amp=0.33)
        rotation = SweepAxis("rotation_omega", 0.0, rotation_for_shift(10.0), 5)
        side = Directions.RIGHT_ONLY if key == "fig5a" else Directions.LEFT_ONLY
        return SweepSpec(base, (DETUNING_AXIS, rotation), side, ("mean_n", "g2", "classification"))
    if key in ("fig6a", "fig7"):
        base = SystemParams(nonlinearity_u=20.0, drive_amp=0.33 if key == "fig6a" else 3.0).with_shift(10.0)
        return SweepSpec(base, (DETUNING_AXIS,), Directions.BOTH)
    raise SpecError(f"unknown figure recipe {name!r}; known: {', '.join(FIGURE_NAMES)}")


def csv_columns(outputs: Iterable[str]) -> list[str]:
    outputs = set(outputs)
    cols = ["axis1", "axis2", "direction"]
    if "mean_n" in outputs:
        cols.append("mean_n")
    cols += [f"g{mu}" for mu in (2, 3, 4) if f"g{mu}" in outputs]
    if "populations" in outputs:
        cols += [f"P{n}" for n in range(N_REPORTED)]
    if "classification" in outputs:
        cols.append("verdict")
    if "poisson_dev" in outputs:
        cols += [f"dev{n}" for n in range(N_REPORTED)]
    if "ratio" in outputs:
        cols.append("ratio_g2")
    return cols + ["N_trunc", "residual", "error"]


def _fmt(x: float | None) -> str:
    if x is None:
        return ""
    return repr(float(x))


def record_row(rec: PointRecord, columns: Sequence[str]) -> list[str]:
    dev = None
    if rec.populations is not None and rec.mean_n > 0:
        dev = poisson_deviation(rec.populations[:N_REPORTED], rec.mean_n)
    row = []
    for col in columns:
        if col == "axis1":
            row.append(_fmt(rec.coords[0]))
        elif col == "axis2":
            row.append(_fmt(rec.coords[1]) if len(rec.coords) > 1 else "")
        elif col == "direction":
            row.append(rec.direction.value)
        elif col == "verdict":
            row.append(rec.classification.verdict.value if rec.classification else "Error")
        elif col.startswith("dev"):
            n = int(col[3:])
            row.append(_fmt(dev[n]) if dev is not None and n < len(dev) else "")
        elif col == "ratio_g2":
            row.append(_fmt(rec.ratio))
        elif col == "N_trunc":
            row.append(str(rec.dim) if rec.dim is not None else "")
        elif col == "residual":
            row.append(_fmt(rec.residual))
        elif col == "error":
            row.append(rec.error or "")
        else:
            val = _record_value(rec, col)
            row.append("" if math.isnan(val) and not rec.ok else _fmt(val))
    return row


def write_csv(result: SweepResult, stream: TextIO) -> None:
    columns = csv_columns(result.spec.outputs)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for rec in result.records:
        writer.writerow(record_row(rec, columns))


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    write_csv(result, buf)
    return buf.getvalue()


def record_dict(rec: PointRecord) -> dict:
    """JSON-ready view of one point."""
    out = {
        "coords": list(rec.coords),
        "direction": rec.direction.value,
        "mean_n": None if math.isnan(rec.mean_n) else rec.mean_n,
        "populations": None if rec.populations is None else rec.populations[:N_REPORTED].tolist(),
        "N_trunc": rec.dim,
        "residual": None if math.isnan(rec.residual) else rec.residual,
        "wall_time": rec.wall_time,
        "error": rec.error,
    }
    if rec.stats is not None:
        out["g"] = {str(mu): v for mu, v in rec.stats.g.items()}
    if rec.classification is not None:
        c = rec.classification
        out["classification"] = {
            "verdict": c.verdict.value,
            "f": c.f,
            "f_n": {str(n): v for n, v in c.f_n.items()},
            "ordering": list(c.ordering),
            "pit_full_threshold": c.pit_full,
            "poisson_deviation": [None if math.isnan(d) else d for d in c.poisson_deviation[:N_REPORTED]],
        }
    if not math.isnan(rec.ratio):
        out["ratio_g2"] = rec.ratio
    return out
