"""Vectorised block reductions shared by the operators.

A *scale* fixes a spatial cube width ``w`` (zero on a line) and a set of named
blocks given as half-open offset ranges ``[lo, hi)`` along the last axis,
relative to an anchor index.  For every admissible placement (spatial start,
anchor) each block is the box ``[s, s + w)^n x [anchor + lo, anchor + hi)``.
The helpers below evaluate per-placement statistics for all placements of a
scale at once.  Results are arrays of shape ``spatial_positions + (anchors,)``.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

CHUNK_ELEMENTS = 1 << 22


def _window_shape(ndim_space: int, width: int, length: int) -> tuple:
    return (width,) * ndim_space + (length,)


def box_sums(a: np.ndarray, shape: tuple) -> np.ndarray:
    """Sums of ``a`` over every box of ``shape`` (prefix-sum differences)."""
    out = a
    for axis, w in enumerate(shape):
        c = np.cumsum(out, axis=axis)
        zero = np.zeros_like(np.take(c, [0], axis=axis))
        c = np.concatenate([zero, c], axis=axis)
        n = c.shape[axis]
        out = np.take(c, np.arange(w, n), axis=axis) - np.take(c, np.arange(0, n - w), axis=axis)
    return out


def box_extreme(a: np.ndarray, shape: tuple, how: str = "min") -> np.ndarray:
    """Separable sliding minimum or maximum over every box of ``shape``."""
    out = a
    for axis, w in enumerate(shape):
        if w == 1:
            continue
        view = sliding_window_view(out, w, axis=axis)
        out = view.min(axis=-1) if how == "min" else view.max(axis=-1)
    return out


def block_stat(values: np.ndarray, scale, name: str, stat: str) -> np.ndarray:
    """``mean``, ``min`` or ``max`` of block ``name`` for all placements."""
    lo, hi = scale.blocks[name]
    nsp = values.ndim - 1
    shape = _window_shape(nsp, scale.width, hi - lo)
    if stat == "mean":
        arr = box_sums(values, shape) / float(np.prod(shape))
    else:
        arr = box_extreme(values, shape, stat)
    a0, a1 = scale.anchors
    return arr[..., a0 + lo:a1 + lo + 1]


def block_apply(values: np.ndarray, scale, names, func, extras=()):
    """Apply ``func`` to the raw cells of several blocks for every placement.

    ``func(blocks, extras)`` receives a list of arrays shaped
    ``(positions..., cells)`` (one per block name) and the matching chunks
    of the ``extras`` arrays, and returns an array shaped ``(positions...)``.
    Work is chunked along the first position axis to bound memory.
    """
    nsp = values.ndim - 1
    a0, a1 = scale.anchors
    views = []
    for name in names:
        lo, hi = scale.blocks[name]
        shape = _window_shape(nsp, scale.width, hi - lo)
        index = (slice(None),) * nsp + (slice(a0 + lo, a1 + lo + 1),) + (slice(None),) * (nsp + 1)
        view = sliding_window_view(values, shape)[index]
        views.append((view, int(np.prod(shape))))
    npos = views[0][0].shape[: nsp + 1]
    per_row = int(np.prod(npos[1:])) * sum(v for _, v in views)
    rows = max(1, CHUNK_ELEMENTS // max(per_row, 1))
    pieces = []
    for r0 in range(0, npos[0], rows):
        r1 = min(npos[0], r0 + rows)
        blocks = [v[r0:r1].reshape(v[r0:r1].shape[: nsp + 1] + (size,)) for v, size in views]
        chunk_extras = [e[r0:r1] for e in extras]
        pieces.append(func(blocks, chunk_extras))
    return np.concatenate(pieces, axis=0)


def _scatter_axis(v: np.ndarray, axis: int, w: int, shift: int, out_len: int,
                  want_arg: bool = False):
    """``out[y] = max v[s]`` over ``s`` with ``s + shift <= y < s + shift + w``."""
    v = np.moveaxis(v, axis, -1)
    z = np.full(v.shape[:-1] + (out_len + w - 1,), -np.inf)
    s = np.arange(v.shape[-1])
    idx = s + shift + w - 1
    ok = (idx >= 0) & (idx < z.shape[-1])
    z[..., idx[ok]] = v[..., s[ok]]
    view = sliding_window_view(z, w, axis=-1)
    out = view.max(axis=-1)
    arg = None
    if want_arg:
        # first maximal position inside each window, mapped back to v's index
        arg = view.argmax(axis=-1) + np.arange(out_len) - shift - (w - 1)
    out = np.moveaxis(out, -1, axis)
    return (out, arg) if want_arg else out


def scatter_max(v: np.ndarray, scale, target: str, out_shape: tuple, want_arg: bool = False):
    """Per cell, the largest placement value whose ``target`` block covers it.

    Cells covered by no placement get ``-inf``.  With ``want_arg`` (lines
    only) the anchor of the maximising placement is returned as well.
    """
    nsp = len(out_shape) - 1
    out = v
    for axis in range(nsp):
        out = _scatter_axis(out, axis, scale.width, 0, out_shape[axis])
    lo, hi = scale.blocks[target]
    res = _scatter_axis(out, nsp, hi - lo, scale.anchors[0] + lo, out_shape[-1], want_arg)
    if want_arg:
        out, arg = res
        return out, arg + scale.anchors[0]
    return res
