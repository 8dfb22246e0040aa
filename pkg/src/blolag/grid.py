"""Sampled functions on uniform 1D and space-time grids.

Every cell carries the constant value of the function on that cell, so block
means are exact finite sums and the essential infimum over a block is the
smallest cell value.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SPACING_TOL = 1e-9


class GridError(ValueError):
    """Raised when a grid file or grid object fails validation."""


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampledLine:
    """Cell values on ``[x0 + i*h, x0 + (i+1)*h)`` for ``i = 0..N-1``."""

    x0: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.ndim != 1:
            raise GridError("line values must be one-dimensional")
        if vals.size < 2:
            raise GridError(f"line needs at least 2 cells, got {vals.size}")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise GridError(f"cell width must be positive, got {self.h}")
        bad = np.flatnonzero(~np.isfinite(vals))
        if bad.size:
            raise GridError(f"non-finite value at cell {int(bad[0])}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "h", float(self.h))

    @property
    def N(self) -> int:
        return int(self.values.size)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,)

    def centers(self) -> np.ndarray:
        return self.x0 + (np.arange(self.N) + 0.5) * self.h

    def edge(self, i: int) -> float:
        return self.x0 + i * self.h

    def with_values(self, values, start: int = 0) -> "SampledLine":
        """Same grid (shifted by ``start`` cells) carrying new values."""
        return SampledLine(self.x0 + start * self.h, self.h, values)

    @classmethod
    def from_function(cls, func, a: float, b: float, n_cells: int) -> "SampledLine":
        """Sample ``func`` at the midpoints of ``n_cells`` cells of ``[a, b)``."""
        h = (b - a) / n_cells
        x = a + (np.arange(n_cells) + 0.5) * h
        return cls(a, h, np.asarray(func(x), dtype=np.float64))


@dataclass(frozen=True, eq=False)
class SampledSlab:
    """Cell values on a space-time grid; the last axis is time.

    ``values`` has shape ``dims``.  Spatial cell ``i`` along axis ``a`` covers
    ``[x0[a] + i*hx, x0[a] + (i+1)*hx)`` and time cell ``j`` covers
    ``[t0 + j*ht, t0 + (j+1)*ht)``.
    """

    n: int
    p: float
    x0: tuple
    hx: float
    t0: float
    ht: float
    values: np.ndarray
    dims: tuple = field(default=())

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise GridError(f"spatial dimension must be a positive integer, got {self.n}")
        if not (self.p > 1 and math.isfinite(self.p)):
            raise GridError(f"scaling exponent must exceed 1, got {self.p}")
        if not (self.hx > 0 and self.ht > 0):
            raise GridError("cell widths must be positive")
        x0 = tuple(float(v) for v in np.atleast_1d(self.x0))
        if len(x0) != self.n:
            raise GridError(f"x0 has {len(x0)} entries, expected {self.n}")
        vals = np.array(self.values, dtype=np.float64)
        dims = tuple(int(d) for d in self.dims) if self.dims else tuple(vals.shape)
        if len(dims) != self.n + 1 or any(d < 1 for d in dims):
            raise GridError(f"dims must hold {self.n + 1} positive integers, got {list(dims)}")
        if vals.size != math.prod(dims):
            raise GridError(f"dims {list(dims)} need {math.prod(dims)} values, got {vals.size}")
        vals = vals.reshape(dims)
        bad = np.flatnonzero(~np.isfinite(vals.ravel()))
        if bad.size:
            raise GridError(f"non-finite value at offset {int(bad[0])}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "n", int(self.n))
        for name in ("p", "hx", "t0", "ht"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.dims

    @property
    def nt(self) -> int:
        return self.dims[-1]

    def space_centers(self, axis: int) -> np.ndarray:
        return self.x0[axis] + (np.arange(self.dims[axis]) + 0.5) * self.hx

    def time_centers(self) -> np.ndarray:
        return self.t0 + (np.arange(self.nt) + 0.5) * self.ht

    def mesh(self) -> list[np.ndarray]:
        """Cell-midpoint coordinate arrays, spatial axes first, time last."""
        axes = [self.space_centers(a) for a in range(self.n)] + [self.time_centers()]
        return np.meshgrid(*axes, indexing="ij")

    def with_values(self, values, t_start: int = 0) -> "SampledSlab":
        """Same spatial grid, time axis shifted by ``t_start`` cells."""
        vals = np.asarray(values, dtype=np.float64)
        return SampledSlab(self.n, self.p, self.x0, self.hx,
                           self.t0 + t_start * self.ht, self.ht, vals, vals.shape)

    @classmethod
    def from_function(cls, func, p: float, xlim, tlim, dims) -> "SampledSlab":
        """Sample ``func(*coords)`` at cell midpoints.

        ``xlim`` is ``(a, b)`` shared by every spatial axis; ``dims`` lists
        spatial cell counts followed by the time cell count.  Spatial axes
        must share one cell width.
        """
        n = len(dims) - 1
        hx = (xlim[1] - xlim[0]) / dims[0]
        ht = (tlim[1] - tlim[0]) / dims[-1]
        for d in dims[:-1]:
            if not math.isclose((xlim[1] - xlim[0]) / d, hx):
                raise GridError("spatial axes must share one cell width")
        slab = cls(n, p, (xlim[0],) * n, hx, tlim[0], ht, np.zeros(dims), tuple(dims))
        return slab.with_values(func(*slab.mesh()))


@dataclass(frozen=True)
class IndexBox:
    """Half-open box of cells: ``start[a] <= i < start[a] + size[a]``."""

    start: tuple
    size: tuple

    def __post_init__(self):
        start = tuple(int(s) for s in self.start)
        size = tuple(int(s) for s in self.size)
        if len(start) != len(size):
            raise GridError("start and size must have equal length")
        if any(s < 1 for s in size):
            raise GridError(f"empty box {start}+{size}")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "size", size)

    @property
    def stop(self) -> tuple:
        return tuple(a + s for a, s in zip(self.start, self.size))

    @property
    def ncells(self) -> int:
        return math.prod(self.size)

    def slices(self) -> tuple:
        return tuple(slice(a, a + s) for a, s in zip(self.start, self.size))

    def fits(self, shape) -> bool:
        return len(shape) == len(self.start) and all(
            a >= 0 and a + s <= d for a, s, d in zip(self.start, self.size, shape))

    def contains(self, other: "IndexBox") -> bool:
        return all(a <= b and b + t <= a + s for a, s, b, t in
                   zip(self.start, self.size, other.start, other.size))

    def disjoint(self, other: "IndexBox") -> bool:
        return any(b + t <= a or a + s <= b for a, s, b, t in
                   zip(self.start, self.size, other.start, other.size))

    def to_json(self) -> dict:
        return {"start": list(self.start), "size": list(self.size)}


def block_mean_min(f, box: IndexBox) -> tuple[float, float]:
    """Mean and minimum of the cell values inside ``box``.

    The sum runs sequentially in ascending (row-major) index order.
    """
    if not box.fits(f.shape):
        raise GridError(f"box {box.start}+{box.size} outside grid of shape {f.shape}")
    block = f.values[box.slices()].ravel()
    total = np.cumsum(block)[-1]
    return float(total / block.size), float(block.min())


# ---------------------------------------------------------------- file formats

def _parse_float(text: str, where: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise GridError(f"unparsable number {text!r} at {where}") from None
    if not math.isfinite(val):
        raise GridError(f"non-finite value at {where}")
    return val


def _load_csv_line(path: Path) -> SampledLine:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "value"]:
        raise GridError("csv-line needs the header 'x,value'")
    xs, vals = [], []
    for r, row in enumerate(rows[1:], start=1):
        if not row:
            continue
        if len(row) != 2:
            raise GridError(f"expected 2 columns at row {r}, got {len(row)}")
        xs.append(_parse_float(row[0], f"row {r}"))
        vals.append(_parse_float(row[1], f"row {r}"))
    if len(xs) < 2:
        raise GridError("csv-line needs at least 2 rows")
    h = xs[1] - xs[0]
    if h <= 0:
        raise GridError("abscissae must increase (row 2)")
    for r in range(2, len(xs)):
        if abs((xs[r] - xs[r - 1]) - h) > SPACING_TOL * h:
            raise GridError(f"non-uniform spacing at row {r + 1}")
    return SampledLine(xs[0], h, vals)


def _slab_from_meta(meta: dict, values) -> SampledSlab:
    try:
        n, p, dims = meta["n"], meta["p"], meta["dims"]
        x0, hx, t0, ht = meta["x0"], meta["hx"], meta["t0"], meta["ht"]
    except KeyError as exc:
        raise GridError(f"json-slab missing key {exc.args[0]!r}") from None
    vals = np.asarray(values, dtype=np.float64).ravel()
    expected = math.prod(int(d) for d in dims)
    if vals.size != expected:
        raise GridError(f"dims {list(dims)} need {expected} values, payload has {vals.size}")
    return SampledSlab(int(n), p, tuple(x0), hx, t0, ht, vals, tuple(dims))


def load_geometry(path) -> dict:
    """Metadata of a json-slab file; ``values``/``raw`` are optional here."""
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_function(path, format: str | None = None):
    """Load a ``csv-line``, ``json-slab`` or ``json+raw-slab`` file."""
    path = Path(path)
    if not path.exists():
        raise GridError(f"no such file: {path}")
    if format is None:
        format = "csv-line" if path.suffix.lower() == ".csv" else "json-slab"
    if format == "csv-line":
        return _load_csv_line(path)
    if format not in ("json-slab", "json+raw-slab"):
        raise GridError(f"unknown format {format!r}")
    try:
        meta = load_geometry(path)
    except json.JSONDecodeError as exc:
        raise GridError(f"invalid JSON at offset {exc.pos}: {exc.msg}") from None
    if "raw" in meta:
        raw = path.parent / meta["raw"]
        if not raw.exists():
            raise GridError(f"raw sidecar not found: {raw}")
        nbytes = raw.stat().st_size
        if nbytes % 8:
            raise GridError(f"raw sidecar size {nbytes} is not a multiple of 8 bytes")
        values = np.fromfile(raw, dtype="<f8")
    elif "values" in meta:
        values = meta["values"]
        for off, v in enumerate(values):
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise GridError(f"non-finite value at offset {off}")
    else:
        raise GridError("json-slab needs 'values' or 'raw'")
    bad = np.flatnonzero(~np.isfinite(np.asarray(values, dtype=np.float64)))
    if bad.size:
        raise GridError(f"non-finite value at offset {int(bad[0])}")
    return _slab_from_meta(meta, values)


def slab_metadata(slab: SampledSlab) -> dict:
    return {"n": slab.n, "p": slab.p, "x0": list(slab.x0), "hx": slab.hx,
            "t0": slab.t0, "ht": slab.ht, "dims": list(slab.dims)}


def save_function(obj, path, format: str | None = None) -> None:
    """Write a grid so that :func:`load_function` reproduces it bit-exactly."""
    path = Path(path)
    if isinstance(obj, SampledLine):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("x,value\n")
            for i, v in enumerate(obj.values):
                fh.write(f"{obj.edge(i)!r},{float(v)!r}\n")
        return
    meta = slab_metadata(obj)
    if format == "json+raw-slab":
        raw = path.with_suffix(".f64")
        np.ascontiguousarray(obj.values, dtype="<f8").tofile(raw)
        meta["raw"] = raw.name
    else:
        meta["values"] = [float(v) for v in obj.values.ravel()]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh)
