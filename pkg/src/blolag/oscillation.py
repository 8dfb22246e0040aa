"""One-sided and parabolic BMO/BLO-type oscillation norms.

All norms are suprema of a per-configuration functional over a finite
family; they are lower bounds of the continuum norms, and every report
carries the family caps.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import _blocks
from .geometry import Family, anatomy_family, gap_pair_family, prect_family
from .grid import GridError, SampledLine, SampledSlab

KINDS = ("bmo-plus", "bmo-plus-gapped", "bmo-plus-gapped-mean", "blo-plus",
         "blo-plus-gapped", "blo-plus-q", "pbmo-minus", "pblo-minus", "pblo-minus-gapped")

AUTO_BUDGET = 4e7


@dataclass(frozen=True)
class OscKind:
    kind: str
    gamma: float | None = None
    q: float | None = None
    alpha: float | None = None
    tau: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GridError(f"unknown norm kind {self.kind!r}")
        if self.kind == "blo-plus-q":
            if self.q is None or not self.q >= 1:
                raise GridError(f"blo-plus-q needs q >= 1, got {self.q}")
        if self.kind in ("bmo-plus-gapped", "bmo-plus-gapped-mean", "blo-plus-gapped"):
            if self.gamma is None or not 0 < self.gamma <= 0.5:
                raise GridError(f"{self.kind} needs gamma in (0, 1/2], got {self.gamma}")
        if self.kind in ("pbmo-minus", "pblo-minus"):
            if self.gamma is None or not 0 <= self.gamma < 1:
                raise GridError(f"{self.kind} needs gamma in [0, 1), got {self.gamma}")
        if self.kind == "pblo-minus-gapped":
            if self.alpha is None or self.tau is None:
                raise GridError("pblo-minus-gapped needs alpha and tau")
            if not (0 <= self.alpha < 1 and self.tau > 1 - self.alpha):
                raise GridError("pblo-minus-gapped needs 0 <= alpha < 1 and tau > 1 - alpha")

    @property
    def parabolic(self) -> bool:
        return self.kind.startswith("p")

    @classmethod
    def parse(cls, text, **params) -> "OscKind":
        """Parse ``blo-plus-q(2)``, ``pblo-minus(0.25)``, ``pblo-minus-gapped(0.25,0.3,1.5)``."""
        if isinstance(text, cls):
            return text
        m = re.fullmatch(r"\s*([a-z-]+)\s*(?:\((.*)\))?\s*", text)
        if not m:
            raise GridError(f"cannot parse norm kind {text!r}")
        kind, args = m.group(1), m.group(2)
        if args:
            nums = [float(v) for v in args.split(",")]
            if kind == "blo-plus-q":
                params["q"] = nums[0]
            elif kind == "pblo-minus-gapped":
                params.update(zip(("gamma", "alpha", "tau"), nums))
            else:
                params["gamma"] = nums[0]
        return cls(kind, **{k: v for k, v in params.items() if v is not None})

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass
class NormReport:
    kind: str
    params: dict
    norm: float
    witness: object
    family_caps: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": self.params, "norm": self.norm,
                "witness": config_to_json(self.witness), "family_caps": self.family_caps}


def config_to_json(cfg) -> dict | None:
    if cfg is None:
        return None
    if hasattr(cfg, "boxes"):
        return {"start": cfg.start, "m": cfg.m,
                "boxes": {k: v.to_json() for k, v in sorted(cfg.boxes.items())}}
    if hasattr(cfg, "left"):
        return {"left": cfg.left.to_json(), "right": cfg.right.to_json(),
                "gamma_eff": cfg.gamma_eff}
    if hasattr(cfg, "blocks") and hasattr(cfg, "tau"):
        return {"center": list(cfg.center), "tau": cfg.tau, "k": cfg.k, "T": cfg.T,
                "G": cfg.G, "gamma_eff": cfg.gamma_eff, "Lp_eff": cfg.Lp_eff,
                "blocks": {k: v.to_json() for k, v in sorted(cfg.blocks.items())}}
    if isinstance(cfg, dict):
        return cfg
    return {"value": str(cfg)}


# ---------------------------------------------------------- per-block kernels

def _excess_mean(blocks, extras, sign: float = 1.0, q: float = 1.0):
    diff = sign * (blocks[0] - extras[0][..., None])
    pos = np.maximum(diff, 0.0)
    if q == 1.0:
        return pos.mean(axis=-1)
    return np.mean(pos ** q, axis=-1) ** (1.0 / q)


def _split_inf(blocks, extras):
    """``inf_c mean_A (f-c)+ + mean_B (c-f)+`` for equal-size blocks A, B.

    The objective is convex and piecewise linear in ``c`` with zero slope
    between the m-th and (m+1)-th smallest pooled values, so the m-th
    smallest pooled value is a minimiser.
    """
    a, b = blocks
    m = a.shape[-1]
    pooled = np.concatenate([a, b], axis=-1)
    c = np.partition(pooled, m - 1, axis=-1)[..., m - 1:m]
    return np.maximum(a - c, 0.0).mean(axis=-1) + np.maximum(c - b, 0.0).mean(axis=-1)


def split_inf_scan(a, b) -> float:
    """Reference for :func:`_split_inf`: evaluate the objective at every
    breakpoint (each cell value of either block) and keep the smallest."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    best = np.inf
    for c in np.sort(np.concatenate([a, b])):
        val = np.maximum(a - c, 0).mean() + np.maximum(c - b, 0).mean()
        best = min(best, val)
    return float(best)


# --------------------------------------------------------------- evaluation

def scale_functional(values: np.ndarray, sc, k: OscKind) -> np.ndarray:
    """Functional of ``k`` for every placement of one scale."""
    kind = k.kind
    if kind in ("blo-plus", "blo-plus-q"):
        thr = _blocks.block_stat(values, sc, "plus", "min")
        q = k.q if kind == "blo-plus-q" else 1.0
        return _blocks.block_apply(values, sc, ["minus"], lambda b, e: _excess_mean(b, e, q=q), [thr])
    if kind == "bmo-plus":
        thr = _blocks.block_stat(values, sc, "plus", "mean")
        return _blocks.block_apply(values, sc, ["minus"], _excess_mean, [thr])
    if kind == "blo-plus-gapped":
        thr = _blocks.block_stat(values, sc, "right", "min")
        return _blocks.block_apply(values, sc, ["left"], _excess_mean, [thr])
    if kind == "bmo-plus-gapped-mean":
        thr = _blocks.block_stat(values, sc, "right", "mean")
        return _blocks.block_apply(values, sc, ["left"], _excess_mean, [thr])
    if kind == "bmo-plus-gapped":
        return _blocks.block_apply(values, sc, ["left", "right"], _split_inf)
    if kind == "pbmo-minus":
        return _blocks.block_apply(values, sc, ["minus", "plus"], _split_inf)
    if kind in ("pblo-minus", "pblo-minus-gapped"):
        upper, lower, later = (("plus", "minus", "plusplus") if kind == "pblo-minus"
                               else ("S+", "minus", "S++"))
        thr = _blocks.block_stat(values, sc, upper, "min")
        past = _blocks.block_apply(values, sc, [lower], _excess_mean, [thr])
        future = _blocks.block_apply(values, sc, [later],
                                     lambda b, e: _excess_mean(b, e, sign=-1.0), [thr])
        return past + future
    raise GridError(f"unhandled kind {kind}")


def family_cost(fam: Family) -> float:
    nsp = len(fam.shape) - 1
    total = 0.0
    for sc in fam.scales:
        cells = sum((hi - lo) for lo, hi in sc.blocks.values()) * max(sc.width, 1) ** nsp
        spatial = float(np.prod([d - sc.width + 1 for d in fam.shape[:nsp]])) if nsp else 1.0
        total += cells * spatial * sc.n_anchors()
    return total


def norm_family(f, k: OscKind, mode: str = "auto", max_m: int | None = None,
                max_k: int | None = None) -> Family:
    """The configuration family a norm kind is evaluated on.

    ``auto`` picks the exhaustive family when its cost is within budget and
    the power-of-two ladder otherwise.
    """
    def build(md):
        if k.parabolic:
            if not isinstance(f, SampledSlab):
                raise GridError(f"{k.kind} needs a space-time slab")
            if k.kind == "pbmo-minus":
                return prect_family(f, k.gamma, md, ("minus", "plus"), max_k)
            if k.kind == "pblo-minus":
                return prect_family(f, k.gamma, md, ("minus", "plus", "plusplus"), max_k)
            return prect_family(f, k.alpha, md, ("minus",), max_k, tau=k.tau)
        if not isinstance(f, SampledLine):
            raise GridError(f"{k.kind} needs a sampled line")
        if k.kind in ("blo-plus-gapped", "bmo-plus-gapped", "bmo-plus-gapped-mean"):
            return gap_pair_family(f.N, k.gamma, md, max_m)
        return anatomy_family(f.N, ("minus", "plus"), md, max_m)

    if mode != "auto":
        return build(mode)
    fam = build("exhaustive")
    if family_cost(fam) > AUTO_BUDGET:
        fam = build("ladder")
    return fam


def evaluate_family(values: np.ndarray, fam: Family, k: OscKind):
    """Largest functional value over ``fam`` and the attaining configuration."""
    best, arg = -np.inf, None
    for sc in fam.scales:
        vals = scale_functional(values, sc, k)
        i = int(np.argmax(vals))
        if vals.flat[i] > best:
            idx = np.unravel_index(i, vals.shape)
            best = float(vals.flat[i])
            arg = (sc, tuple(int(v) for v in idx[:-1]), sc.anchors[0] + int(idx[-1]))
    witness = fam.config(*arg) if arg is not None else None
    return best, witness


def osc_norm(f, kind, *, gamma: float | None = None, q: float | None = None,
             alpha: float | None = None, tau: float | None = None, mode: str = "auto",
             max_m: int | None = None, max_k: int | None = None,
             family: Family | None = None) -> NormReport:
    """Oscillation norm of ``f`` with the attaining configuration."""
    k = OscKind.parse(kind, gamma=gamma, q=q, alpha=alpha, tau=tau)
    fam = family if family is not None else norm_family(f, k, mode, max_m, max_k)
    norm, witness = evaluate_family(np.asarray(f.values, dtype=np.float64), fam, k)
    caps = fam.caveat()
    if k.kind == "bmo-plus-gapped-mean":
        caps["note"] = "no equivalence guarantee with bmo-plus"
    return NormReport(k.kind, k.to_json(), norm, witness, caps)


def osc_norm_naive(f, kind, family: Family, **params) -> float:
    """Direct loop over the configurations of ``family`` (reference engine)."""
    k = OscKind.parse(kind, **params)
    v = np.asarray(f.values, dtype=np.float64)
    best = -np.inf
    for cfg in family:
        b = cfg.boxes if hasattr(cfg, "boxes") else (
            cfg.blocks if hasattr(cfg, "blocks") else {"left": cfg.left, "right": cfg.right})
        blk = {name: v[box.slices()].ravel() for name, box in b.items()}
        if k.kind in ("blo-plus", "blo-plus-q"):
            qq = k.q or 1.0
            val = np.mean(np.maximum(blk["minus"] - blk["plus"].min(), 0) ** qq) ** (1 / qq)
        elif k.kind == "bmo-plus":
            val = np.maximum(blk["minus"] - blk["plus"].mean(), 0).mean()
        elif k.kind == "blo-plus-gapped":
            val = np.maximum(blk["left"] - blk["right"].min(), 0).mean()
        elif k.kind == "bmo-plus-gapped-mean":
            val = np.maximum(blk["left"] - blk["right"].mean(), 0).mean()
        elif k.kind == "bmo-plus-gapped":
            val = split_inf_scan(blk["left"], blk["right"])
        elif k.kind == "pbmo-minus":
            val = split_inf_scan(blk["minus"], blk["plus"])
        else:
            up, later = ("plus", "plusplus") if k.kind == "pblo-minus" else ("S+", "S++")
            thr = blk[up].min()
            val = (np.maximum(blk["minus"] - thr, 0).mean()
                   + np.maximum(thr - blk[later], 0).mean())
        best = max(best, float(val))
    return best


# ------------------------------------------------------------- null spaces

def null_space_check(f, setting: str = "1d"):
    """Structural null-space test.

    On a line: ``f`` non-decreasing cell by cell, which is exactly
    ``blo-plus(f) = 0``.  On a slab: ``f`` constant in space on every time
    slice and non-decreasing in time, the continuum null space of the
    parabolic norms.  Returns ``(flag, witness)`` with the first violating
    cell pair.
    """
    v = np.asarray(f.values)
    if setting == "1d" or v.ndim == 1:
        if v.ndim != 1:
            raise GridError("1d setting needs a sampled line")
        bad = np.flatnonzero(v[1:] < v[:-1])
        if bad.size:
            i = int(bad[0])
            return False, {"cells": [i, i + 1], "values": [float(v[i]), float(v[i + 1])]}
        return True, None
    flat = v.reshape(-1, v.shape[-1])
    for t in range(v.shape[-1]):
        col = flat[:, t]
        j = int(np.argmax(col != col[0]))
        if col[j] != col[0]:
            a = np.unravel_index(0, v.shape[:-1]) + (t,)
            b = np.unravel_index(j, v.shape[:-1]) + (t,)
            return False, {"cells": [list(map(int, a)), list(map(int, b))],
                           "reason": "varies in space"}
    g = flat[0]
    bad = np.flatnonzero(g[1:] < g[:-1])
    if bad.size:
        t = int(bad[0])
        return False, {"cells": [t, t + 1], "values": [float(g[t]), float(g[t + 1])],
                       "reason": "decreases in time"}
    return True, None
