"""One-sided and parabolic maximal operators.

Every operator has a fast engine and an independent naive engine that
re-sums each averaging window directly.  Cells with no admissible window are
``nan`` in the full-length arrays and are cropped from the returned grids.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import _blocks
from .geometry import (Family, Scale, anatomy_family, gap_pair_family,
                       prect_family)
from .grid import GridError, SampledLine, SampledSlab

KINDS_1D = ("standard-minus", "standard-plus", "gapped-minus", "natural-minus",
            "hardy-littlewood")


@dataclass(frozen=True)
class MaxVariant1D:
    kind: str
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS_1D:
            raise GridError(f"unknown maximal variant {self.kind!r}")
        if self.kind == "gapped-minus":
            if self.gamma is None:
                raise GridError("gapped-minus needs gamma")
            if not 0 < self.gamma <= 0.5:
                raise GridError(f"gamma must lie in (0, 1/2], got {self.gamma}")

    @classmethod
    def parse(cls, text, gamma: float | None = None) -> "MaxVariant1D":
        if isinstance(text, cls):
            return text
        m = re.fullmatch(r"\s*([a-z-]+)\s*(?:\(\s*([0-9.eE+-]+)\s*\))?\s*", text)
        if not m:
            raise GridError(f"cannot parse maximal variant {text!r}")
        g = float(m.group(2)) if m.group(2) else gamma
        return cls(m.group(1), g)

    @property
    def signed(self) -> bool:
        return self.kind == "natural-minus"


@dataclass
class MaxOutput:
    """Full-length result: values (``nan`` where undefined) and the argmax
    window of every cell as ``(start, length)`` cell indices."""

    values: np.ndarray
    start: np.ndarray
    length: np.ndarray

    def defined(self) -> slice:
        ok = np.flatnonzero(np.isfinite(self.values))
        if ok.size == 0:
            raise GridError("no cell admits a window of this variant")
        if ok[-1] - ok[0] + 1 != ok.size:
            raise GridError("defined cells are not contiguous")
        return slice(int(ok[0]), int(ok[-1]) + 1)


# ------------------------------------------------------------------ families

def interval_family(n_cells: int, max_len: int | None = None) -> Family:
    top = n_cells if max_len is None else min(max_len, n_cells)
    scales = [Scale(0, {"I": (0, ln)}, (0, n_cells - ln), {"length": ln})
              for ln in range(1, top + 1)]
    return Family("interval", (n_cells,), tuple(scales), "exhaustive", {"max_len": top})


def variant_family(n_cells: int, v: MaxVariant1D, mode: str = "exhaustive",
                   max_len: int | None = None):
    """Family and (source, target) block names for a scale-based variant."""
    if v.kind == "gapped-minus":
        max_m = None if max_len is None else max(1, max_len // 2)
        return gap_pair_family(n_cells, v.gamma, mode, max_m), "left", "right"
    if v.kind == "natural-minus":
        max_m = None if max_len is None else max(1, max_len // 2)
        return anatomy_family(n_cells, ("minus", "plus"), mode, max_m), "minus", "plus"
    if v.kind == "hardy-littlewood":
        return interval_family(n_cells, max_len), "I", "I"
    raise GridError(f"{v.kind} has no block family")


# ------------------------------------------------------------- standard-minus

def _suffix_max_hull(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Largest mean of ``a[s:e]`` over ``s < e`` for every end ``e``.

    The mean is the chord slope of the prefix sums ``P`` between ``s`` and
    ``e``.  The best start is the tangent point from ``(e, P[e])`` to the
    lower convex hull of ``(s, P[s])``, found by binary search.  Ties move to
    the later start, i.e. the shorter window.
    """
    n = a.size
    P = np.concatenate([[0.0], np.cumsum(a)])
    Pl = P.tolist()
    hull: list[int] = []
    best = np.empty(n, dtype=np.int64)
    for e in range(1, n + 1):
        s_new = e - 1
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # drop j when it is not strictly below the chord from i to s_new
            if (Pl[j] - Pl[i]) * (s_new - i) >= (Pl[s_new] - Pl[i]) * (j - i):
                hull.pop()
            else:
                break
        hull.append(s_new)
        qx, qy = e, Pl[e]
        lo, hi = 0, len(hull) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            u, w = hull[mid], hull[mid + 1]
            # moving from u to w does not lower the slope towards (qx, qy)
            if (Pl[w] - Pl[u]) * (qx - w) <= (qy - Pl[w]) * (w - u):
                lo = mid + 1
            else:
                hi = mid
        best[e - 1] = hull[lo]
    ends = np.arange(1, n + 1)
    vals = (P[ends] - P[best]) / (ends - best)
    return vals, best


def _suffix_max_capped(a: np.ndarray, max_len: int) -> tuple[np.ndarray, np.ndarray]:
    n = a.size
    P = np.concatenate([[0.0], np.cumsum(a)])
    vals = np.full(n, -np.inf)
    best = np.zeros(n, dtype=np.int64)
    ends = np.arange(1, n + 1)
    for k in range(1, min(max_len, n) + 1):
        e = ends[k - 1:]
        cand = (P[e] - P[e - k]) / k
        better = cand > vals[k - 1:]
        vals[k - 1:][better] = cand[better]
        best[k - 1:][better] = (e - k)[better]
    return vals, best


def standard_minus_fast(a: np.ndarray, max_len: int | None = None) -> MaxOutput:
    a = np.abs(np.asarray(a, dtype=np.float64))
    n = a.size
    if max_len is None or max_len >= n:
        vals, best = _suffix_max_hull(a)
    else:
        vals, best = _suffix_max_capped(a, max_len)
    return MaxOutput(vals, best, np.arange(1, n + 1) - best)


def standard_minus_naive(a: np.ndarray, max_len: int | None = None) -> MaxOutput:
    vals = [abs(float(v)) for v in np.asarray(a)]
    n = len(vals)
    top = n if max_len is None else max_len
    out = np.empty(n)
    start = np.empty(n, dtype=np.int64)
    for x in range(n):
        best, arg = -np.inf, x
        for k in range(1, min(top, x + 1) + 1):
            s = x - k + 1
            mean = sum(vals[s:x + 1]) / k
            if mean > best:
                best, arg = mean, s
        out[x], start[x] = best, arg
    return MaxOutput(out, start, np.arange(n) + 1 - start)


def _reverse(o: MaxOutput) -> MaxOutput:
    n = o.values.size
    vals = o.values[::-1].copy()
    length = o.length[::-1].copy()
    # a window ending at reversed cell n-1-x starts at x in original indexing
    start = np.arange(n)
    return MaxOutput(vals, start, length)


# ------------------------------------------------------------- block variants

def family_max_fast(a: np.ndarray, family: Family, source: str, target: str,
                    want_arg: bool = True) -> MaxOutput:
    """Per cell, the largest ``source`` block mean over placements whose
    ``target`` block covers the cell (lines only)."""
    n = a.size
    out = np.full(n, -np.inf)
    start = np.zeros(n, dtype=np.int64)
    length = np.zeros(n, dtype=np.int64)
    for sc in family.scales:
        means = _blocks.block_stat(a, sc, source, "mean")
        cand, anchor = _blocks.scatter_max(means, sc, target, (n,), want_arg=True)
        better = cand > out
        out[better] = cand[better]
        lo, hi = sc.blocks[source]
        start[better] = anchor[better] + lo
        length[better] = hi - lo
    vals = np.where(np.isfinite(out), out, np.nan)
    return MaxOutput(vals, start, length)


def family_max_naive(a: np.ndarray, family: Family, source: str, target: str) -> MaxOutput:
    vals = [float(v) for v in np.asarray(a)]
    n = len(vals)
    out = np.full(n, -np.inf)
    start = np.zeros(n, dtype=np.int64)
    length = np.zeros(n, dtype=np.int64)
    for sc in family.scales:
        lo, hi = sc.blocks[source]
        tlo, thi = sc.blocks[target]
        for anchor in range(sc.anchors[0], sc.anchors[1] + 1):
            s, e = anchor + lo, anchor + hi
            mean = sum(vals[s:e]) / (e - s)
            for x in range(anchor + tlo, anchor + thi):
                if mean > out[x]:
                    out[x], start[x], length[x] = mean, s, e - s
    return MaxOutput(np.where(np.isfinite(out), out, np.nan), start, length)


def onesided_max_full(f, v, engine: str = "fast", mode: str = "exhaustive",
                      max_len: int | None = None) -> MaxOutput:
    """Full-length maximal function of ``f`` (a line or an array)."""
    v = MaxVariant1D.parse(v)
    a = np.asarray(f.values if isinstance(f, SampledLine) else f, dtype=np.float64)
    if engine not in ("fast", "naive"):
        raise GridError(f"unknown engine {engine!r}")
    if v.kind in ("standard-minus", "standard-plus"):
        src = np.abs(a) if v.kind == "standard-minus" else np.abs(a[::-1])
        run = standard_minus_fast if engine == "fast" else standard_minus_naive
        res = run(src, max_len)
        return res if v.kind == "standard-minus" else _reverse(res)
    src = a if v.signed else np.abs(a)
    family, source, target = variant_family(a.size, v, mode, max_len)
    if engine == "fast":
        return family_max_fast(src, family, source, target)
    return family_max_naive(src, family, source, target)


def onesided_max(f: SampledLine, v, engine: str = "fast", mode: str = "exhaustive",
                 max_len: int | None = None) -> SampledLine:
    """Maximal function of ``f`` on the cells where the variant is defined."""
    res = onesided_max_full(f, v, engine, mode, max_len)
    sl = res.defined()
    return f.with_values(res.values[sl], start=sl.start)


# ------------------------------------------------------------------ parabolic

def parabolic_family(slab: SampledSlab, gamma: float, mode: str = "exhaustive",
                     max_k: int | None = None) -> Family:
    return prect_family(slab, gamma, mode, require=("minus", "plus"), max_k=max_k)


def parabolic_max_full(f: SampledSlab, gamma: float, kind: str = "maximal",
                       engine: str = "fast", family: Family | None = None,
                       mode: str = "exhaustive", max_k: int | None = None) -> np.ndarray:
    """Per cell, the largest ``minus``-block mean over rectangles whose
    ``plus`` block contains the cell; ``nan`` where no rectangle does."""
    if kind not in ("maximal", "natural"):
        raise GridError(f"unknown parabolic variant {kind!r}")
    if family is None:
        family = parabolic_family(f, gamma, mode, max_k)
    a = f.values if kind == "natural" else np.abs(f.values)
    out = np.full(f.dims, -np.inf)
    if engine == "fast":
        for sc in family.scales:
            means = _blocks.block_stat(a, sc, "minus", "mean")
            out = np.maximum(out, _blocks.scatter_max(means, sc, "plus", f.dims))
    elif engine == "naive":
        for rect in family:
            block = a[rect.minus.slices()].ravel().tolist()
            mean = sum(block) / len(block)
            sl = rect.plus.slices()
            out[sl] = np.maximum(out[sl], mean)
    else:
        raise GridError(f"unknown engine {engine!r}")
    return np.where(np.isfinite(out), out, np.nan)


def defined_time_range(values: np.ndarray) -> slice:
    """Time cells at which every spatial cell is defined."""
    ok = np.all(np.isfinite(values), axis=tuple(range(values.ndim - 1)))
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        raise GridError("no time slice is fully covered by the family")
    if idx[-1] - idx[0] + 1 != idx.size:
        raise GridError("covered time slices are not contiguous")
    return slice(int(idx[0]), int(idx[-1]) + 1)


def parabolic_max(f: SampledSlab, gamma: float, kind: str = "maximal",
                  engine: str = "fast", mode: str = "exhaustive",
                  max_k: int | None = None) -> SampledSlab:
    """Parabolic maximal (``|f|``) or natural (``f``) maximal function, cropped
    to the time slices where every cell is covered."""
    full = parabolic_max_full(f, gamma, kind, engine, mode=mode, max_k=max_k)
    sl = defined_time_range(full)
    return f.with_values(full[..., sl], t_start=sl.start)
