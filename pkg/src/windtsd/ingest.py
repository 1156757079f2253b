"""Tower time series to snapshot ensembles.

Two (or more) anemometer records are interpolated linearly onto a vertical
grid, cut into fixed-length intervals, and each interval is laid out as an
``nz x nx`` along-wind field using the frozen-turbulence hypothesis: the
``nx`` consecutive samples of an interval are read as a spatial transect
with spacing ``dx = mean_speed * step``.

CSV layout (UTF-8, ``.`` decimal separator)::

    t_s,u_4.5m,u_10.0m
    0,3.12,4.01
    1,3.10,4.07
    ...

The first column is seconds since the start of the day; every other column
is a wind speed in m/s whose header encodes the sensor height.
"""

from __future__ import annotations

import csv
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    IntervalNotDivisor,
    LevelOutOfRange,
    MissingColumn,
    NegativeSpeed,
    NonFiniteValue,
    NonUniformTimestep,
    ShapeMismatch,
)

logger = logging.getLogger(__name__)

DAY_SECONDS = 86400
TIME_COLUMN = "t_s"
_SPEED_COLUMN = re.compile(r"^u_([0-9]+(?:\.[0-9]*)?)m$")


@dataclass(frozen=True)
class TowerSeries:
    timestamps: np.ndarray  # (n,) seconds
    speeds: np.ndarray  # (n, n_sensors) m/s
    sensor_heights: np.ndarray  # (n_sensors,) m, increasing

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=float)
        s = np.asarray(self.speeds, dtype=float)
        h = np.asarray(self.sensor_heights, dtype=float)
        if s.ndim != 2 or s.shape != (t.size, h.size):
            raise ShapeMismatch(f"speeds shape {s.shape} does not match ({t.size}, {h.size})")
        if h.size < 2:
            raise ShapeMismatch("at least two sensor heights are required")
        if np.any(np.diff(h) <= 0):
            raise ShapeMismatch("sensor heights must be strictly increasing")
        _check_uniform(t)
        bad = np.argwhere(~np.isfinite(s))
        if bad.size:
            r, c = bad[0]
            raise NonFiniteValue(f"non-finite speed at row {r}, sensor {h[c]:g} m")
        neg = np.argwhere(s < 0)
        if neg.size:
            r, c = neg[0]
            raise NegativeSpeed(f"negative speed at row {r}, sensor {h[c]:g} m")
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "speeds", s)
        object.__setattr__(self, "sensor_heights", h)

    @property
    def step(self) -> float:
        return float(self.timestamps[1] - self.timestamps[0]) if self.timestamps.size > 1 else 1.0

    @property
    def sample_rate(self) -> float:
        return 1.0 / self.step

    @property
    def duration(self) -> float:
        return self.timestamps.size * self.step


@dataclass(frozen=True)
class LevelSeries:
    """Speeds on a vertical grid; ``data[iz]`` is the series at ``levels[iz]``."""

    timestamps: np.ndarray
    levels: np.ndarray
    data: np.ndarray  # (nz, n)

    @property
    def step(self) -> float:
        return float(self.timestamps[1] - self.timestamps[0]) if self.timestamps.size > 1 else 1.0


@dataclass(frozen=True)
class SnapshotGrid:
    z_levels: np.ndarray
    nx: int
    dx: float
    interval_s: float

    def __post_init__(self):
        z = np.asarray(self.z_levels, dtype=float)
        if z.size < 2 or np.any(np.diff(z) <= 0):
            raise ShapeMismatch("z_levels must hold >= 2 strictly increasing heights")
        if self.nx < 1 or self.interval_s <= 0:
            raise ShapeMismatch("nx must be >= 1 and interval_s > 0")
        object.__setattr__(self, "z_levels", z)

    @property
    def nz(self) -> int:
        return self.z_levels.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nz, self.nx)

    @property
    def dz(self) -> np.ndarray:
        return np.gradient(self.z_levels)

    def weights(self) -> np.ndarray:
        """Riemann quadrature weight ``dz * dx`` for every grid point, shape ``(nz, nx)``."""
        return np.repeat((self.dz * self.dx)[:, None], self.nx, axis=1)

    def conforms(self, other: "SnapshotGrid") -> bool:
        return (
            self.nx == other.nx
            and self.interval_s == other.interval_s
            and self.z_levels.shape == other.z_levels.shape
            and bool(np.all(self.z_levels == other.z_levels))
        )


@dataclass
class VelocityEnsemble:
    """Wind speed ``data[realization, interval, z, x]`` in m/s."""

    data: np.ndarray
    grid: SnapshotGrid
    dx_snapshots: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 4 or self.data.shape[2:] != self.grid.shape:
            raise ShapeMismatch(
                f"ensemble shape {self.data.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.data)):
            raise NonFiniteValue("ensemble contains non-finite entries")

    @property
    def n_realizations(self) -> int:
        return self.data.shape[0]

    @property
    def n_intervals(self) -> int:
        return self.data.shape[1]

    @property
    def dt(self) -> float:
        return self.grid.interval_s

    def level_series(self, realization: int, level: int) -> np.ndarray:
        """Undo the snapshot layout: the sampled series at one height for one day."""
        return self.data[realization, :, level, :].reshape(-1)


def _check_uniform(t: np.ndarray) -> None:
    if t.size < 2:
        return
    d = np.diff(t)
    step = d[0]
    if step <= 0:
        raise NonUniformTimestep("timestamps must be strictly increasing (row 1)")
    bad = np.flatnonzero(np.abs(d - step) > 1e-9 * max(1.0, abs(step)))
    if bad.size:
        raise NonUniformTimestep(f"timestep changes at row {bad[0] + 1}")


def parse_header(header: Sequence[str]) -> dict:
    """Map the standard ``t_s,u_<h>m,...`` header onto a column schema."""
    if not header or header[0].strip() != TIME_COLUMN:
        raise MissingColumn(f"first column must be {TIME_COLUMN!r}")
    sensors = {}
    for name in header[1:]:
        m = _SPEED_COLUMN.match(name.strip())
        if m:
            sensors[name.strip()] = float(m.group(1))
    if len(sensors) < 2:
        raise MissingColumn("need at least two speed columns named u_<height>m")
    return {"time": TIME_COLUMN, "sensors": sensors}


def load_tower_csv(path: str | Path, schema: Mapping | None = None) -> TowerSeries:
    """Read a tower CSV into a validated :class:`TowerSeries`.

    ``schema`` is ``{"time": <column>, "sensors": {<column>: height_m, ...}}``;
    when omitted it is derived from the header.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise MissingColumn(f"{path}: empty file, no header row")
        header = [h.strip() for h in header]
        if schema is None:
            schema = parse_header(header)
        cols = [schema["time"], *schema["sensors"]]
        for c in cols:
            if c not in header:
                raise MissingColumn(f"{path}: missing column {c!r}")
        idx = [header.index(c) for c in cols]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                vals = [float(row[i]) for i in idx]
            except (IndexError, ValueError) as exc:
                raise NonFiniteValue(f"{path}: unparseable value on line {lineno}") from exc
            if not all(math.isfinite(v) for v in vals):
                raise NonFiniteValue(f"{path}: non-finite value on line {lineno} (data row {lineno - 2})")
            rows.append(vals)
    if not rows:
        raise MissingColumn(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=float)
    heights = np.asarray(list(schema["sensors"].values()), dtype=float)
    order = np.argsort(heights, kind="stable")
    try:
        return TowerSeries(arr[:, 0], arr[:, 1:][:, order], heights[order])
    except (NonUniformTimestep, NegativeSpeed) as exc:
        raise type(exc)(f"{path}: {exc}") from None


def write_tower_csv(path: str | Path, timestamps, speeds, heights) -> None:
    """Write series in the layout :func:`load_tower_csv` reads."""
    speeds = np.asarray(speeds, dtype=float)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([TIME_COLUMN, *[f"u_{h:g}m" for h in heights]])
        for t, row in zip(timestamps, speeds):
            w.writerow([f"{t:.17g}", *[f"{v:.17g}" for v in row]])


def default_levels(sensor_heights, n_interior: int = 18) -> np.ndarray:
    """Sensor span split into ``n_interior + 2`` evenly spaced levels (ends included)."""
    h = np.asarray(sensor_heights, dtype=float)
    return np.linspace(h[0], h[-1], n_interior + 2)


def interpolate_vertical(series: TowerSeries, target_levels) -> LevelSeries:
    """Pointwise linear interpolation between bracketing sensors; no extrapolation."""
    h = series.sensor_heights
    z = np.asarray(target_levels, dtype=float)
    if z.size == 0:
        raise LevelOutOfRange("no target levels given")
    out = np.flatnonzero((z < h[0]) | (z > h[-1]))
    if out.size:
        raise LevelOutOfRange(
            f"level {z[out[0]]:g} m outside sensor span [{h[0]:g}, {h[-1]:g}] m"
        )
    hi = np.clip(np.searchsorted(h, z, side="right"), 1, h.size - 1)
    lo = hi - 1
    w = (z - h[lo]) / (h[hi] - h[lo])
    s = series.speeds.T
    data = (1.0 - w)[:, None] * s[lo] + w[:, None] * s[hi]
    return LevelSeries(series.timestamps, z, data)


def build_snapshots(
    levels: LevelSeries, interval_s: float, dx_mode: str = "interval"
) -> VelocityEnsemble:
    """Cut one day of level series into frozen-turbulence snapshots.

    Returns a single-realization ensemble of shape ``(1, n_intervals, nz, nx)``
    with ``nx = interval_s / step``. ``dx_mode="interval"`` gives every snapshot
    its own spacing from that interval's mean speed; ``"global"`` uses the
    day mean for all of them. The grid's nominal ``dx`` is the day mean in
    both cases.
    """
    if dx_mode not in ("interval", "global"):
        raise ValueError(f"unknown dx_mode {dx_mode!r}")
    data = np.asarray(levels.data, dtype=float)
    nz, n = data.shape
    step = levels.step
    day = n * step
    nx_f = interval_s / step
    nx = int(round(nx_f))
    if interval_s <= 0 or abs(nx_f - nx) > 1e-9 or nx < 1 or n % nx:
        raise IntervalNotDivisor(
            f"interval {interval_s:g} s does not divide a {day:g} s record sampled every {step:g} s"
        )
    n_int = n // nx
    snaps = data.reshape(nz, n_int, nx).transpose(1, 0, 2)
    if dx_mode == "interval":
        dx_snap = snaps.mean(axis=(1, 2)) * step
    else:
        dx_snap = np.full(n_int, data.mean() * step)
    grid = SnapshotGrid(levels.levels, nx, float(data.mean() * step), float(interval_s))
    return VelocityEnsemble(snaps[None].copy(), grid, dx_snap[None])


def assemble_ensemble(days: Sequence[VelocityEnsemble]) -> VelocityEnsemble:
    """Stack one-day slices along the realization axis."""
    if not days:
        raise ShapeMismatch("no days to assemble")
    ref = days[0]
    for i, d in enumerate(days[1:], start=1):
        if not ref.grid.conforms(d.grid) or d.data.shape[1:] != ref.data.shape[1:]:
            raise ShapeMismatch(
                f"day {i} has shape {d.data.shape[1:]}, expected {ref.data.shape[1:]}"
            )
    data = np.concatenate([d.data for d in days], axis=0)
    dxs = None
    if all(d.dx_snapshots is not None for d in days):
        dxs = np.concatenate([d.dx_snapshots for d in days], axis=0)
    dx = float(np.mean([d.grid.dx for d in days]))
    grid = SnapshotGrid(ref.grid.z_levels, ref.grid.nx, dx, ref.grid.interval_s)
    return VelocityEnsemble(data, grid, dxs)


def ensemble_from_series(
    series: Sequence[TowerSeries],
    interval_s: float = 600,
    n_interior: int = 18,
    dx_mode: str = "interval",
) -> VelocityEnsemble:
    """Ingest convenience: interpolate, snapshot and stack a list of days."""
    days = []
    for s in series:
        lv = interpolate_vertical(s, default_levels(s.sensor_heights, n_interior))
        days.append(build_snapshots(lv, interval_s, dx_mode))
    ens = assemble_ensemble(days)
    logger.info(
        "assembled %d days x %d intervals on a %dx%d grid",
        ens.n_realizations, ens.n_intervals, *ens.grid.shape,
    )
    return ens
