"""Seeded test functions shared by the self-test and the test suite."""

from __future__ import annotations

import numpy as np

from .grid import SampledLine, SampledSlab
from .maximal import standard_minus_fast

LINE_WINDOW = (0.0, 16.0)
LINE_CELLS = 256
SEED = 20251012


def _line(func, window=LINE_WINDOW, cells=LINE_CELLS) -> SampledLine:
    return SampledLine.from_function(func, window[0], window[1], cells)


def _log_max_indicator(x):
    ind = (x < 1).astype(float)
    return np.log(standard_minus_fast(ind).values)


def _piecewise(rng, x):
    cuts = np.sort(rng.uniform(x[0], x[-1], 6))
    levels = rng.normal(size=7)
    return levels[np.searchsorted(cuts, x)]


def line_functions() -> dict[str, SampledLine]:
    """Twenty functions on one window, keyed by a short label."""
    rng = np.random.default_rng(SEED)
    rough = rng.normal(size=LINE_CELLS)
    walk = np.cumsum(rng.normal(size=LINE_CELLS)) / 4
    steps = _piecewise(rng, np.linspace(*LINE_WINDOW, LINE_CELLS))
    funcs = {
        "increasing": lambda x: x,
        "decreasing": lambda x: -x,
        "sine": np.sin,
        "sine-drift": lambda x: np.sin(x) + 0.3 * x,
        "tent": lambda x: -np.abs(x - 8),
        "vee": lambda x: np.abs(x - 8),
        "log-singular": lambda x: np.log(np.abs(x - 8.03)),
        "neg-log-singular": lambda x: -np.log(np.abs(x - 8.03)),
        "log-max-indicator": _log_max_indicator,
        "square-wave": lambda x: np.sign(np.sin(2 * x)),
        "step-down": lambda x: (x < 8).astype(float),
        "step-up": lambda x: (x >= 8).astype(float),
        "gaussian-bump": lambda x: np.exp(-(x - 5) ** 2),
        "chirp": lambda x: np.cos(x ** 1.5 / 4),
        "sqrt": np.sqrt,
        "neg-sqrt": lambda x: -np.sqrt(x),
        "sawtooth": lambda x: x % 3,
    }
    out = {k: _line(f) for k, f in funcs.items()}
    base = out["increasing"]
    out["noise"] = base.with_values(rough)
    out["random-walk"] = base.with_values(walk)
    out["random-steps"] = base.with_values(steps)
    return out


def line_weights() -> dict[str, SampledLine]:
    """Positive weights ``exp(f / max(1, max|f|))`` of the line corpus."""
    out = {}
    for k, f in line_functions().items():
        v = np.asarray(f.values)
        out[k] = f.with_values(np.exp(v / max(1.0, float(np.max(np.abs(v))))))
    return out


def indicators() -> dict[str, SampledLine]:
    rng = np.random.default_rng(SEED + 1)
    base = _line(lambda x: (x < 1).astype(float))
    mixed = (rng.uniform(size=LINE_CELLS) < 0.2).astype(float)
    mixed[0] = 1.0
    return {
        "unit-interval": base,
        "two-intervals": _line(lambda x: (((x >= 2) & (x < 3)) | ((x >= 5) & (x < 6))).astype(float)),
        "late-interval": _line(lambda x: ((x >= 10) & (x < 11)).astype(float)),
        "random-cells": base.with_values(mixed),
        "random-nonnegative": base.with_values(rng.exponential(size=LINE_CELLS)),
    }


def kinked_profile(x):
    """Increasing profile ``2x`` on ``x >= 0`` and ``(x - 1)^-2 - 1`` below."""
    x = np.asarray(x, dtype=np.float64)
    neg = np.minimum(x, 0.0)
    return np.where(x >= 0, 2 * x, 1 / (neg - 1) ** 2 - 1)


def kinked_profile_abs_antiderivative(y):
    """Antiderivative of the profile's absolute value, zero at ``y = 0``."""
    y = np.asarray(y, dtype=np.float64)
    neg = np.minimum(y, 0.0)
    return np.where(y >= 0, y ** 2, neg + 1 / (neg - 1) + 1)


SLAB_DIMS = (12, 96)


def slab_functions(dims=SLAB_DIMS) -> dict[str, SampledSlab]:
    """Functions on ``[0, 1] x [0, 1]`` with ``p = 2``, keyed by label."""
    rng = np.random.default_rng(SEED + 2)
    mk = lambda f: SampledSlab.from_function(f, 2.0, (0.0, 1.0), (0.0, 1.0), dims)
    out = {
        "exp-x-plus-t": mk(lambda x, t: np.exp(x + t)),
        "quadratic-heat": mk(lambda x, t: 1 + x ** 2 + 2 * t),
        "sine-space": mk(lambda x, t: np.sin(6 * x) + t),
        "decreasing-time": mk(lambda x, t: -3 * t),
        "log-point": mk(lambda x, t: -np.log(np.maximum(np.abs(x - 0.5), np.sqrt(np.abs(t - 0.5))))),
        "time-step": mk(lambda x, t: (t < 0.5).astype(float)),
    }
    out["noise"] = out["exp-x-plus-t"].with_values(rng.normal(size=dims))
    return out


def slab_weights(dims=SLAB_DIMS) -> dict[str, SampledSlab]:
    out = {}
    for k, f in slab_functions(dims).items():
        v = np.asarray(f.values)
        out[k] = f.with_values(np.exp(v / max(1.0, float(np.max(np.abs(v))))))
    return out
