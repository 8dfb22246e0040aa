"""Interval anatomy, gapped pairs, parabolic rectangles and dyadic trees.

Families of configurations are stored compactly as a list of scales.  Each
scale records the spatial cube width, the named blocks as time (or line)
offsets from an anchor cell edge, and the range of anchors for which every
required block fits in the window.  Iterating a family yields the typed
configuration objects; the operators work on the compact form directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .grid import GridError, IndexBox, SampledLine, SampledSlab


def round_half_up(x: float) -> int:
    # tolerate representation noise such as 2/(1/3) = 6.000000000000001
    return int(math.floor(x + 0.5 + 1e-9))


@dataclass(frozen=True)
class Scale:
    width: int
    blocks: dict
    anchors: tuple
    params: dict = field(default_factory=dict)

    def n_anchors(self) -> int:
        return self.anchors[1] - self.anchors[0] + 1


@dataclass(frozen=True)
class Family:
    """A family of configurations over one window."""

    kind: str
    shape: tuple
    scales: tuple
    mode: str
    caps: dict

    def __len__(self) -> int:
        nsp = len(self.shape) - 1
        total = 0
        for sc in self.scales:
            spatial = math.prod(d - sc.width + 1 for d in self.shape[:nsp])
            total += spatial * sc.n_anchors()
        return total

    def __iter__(self):
        nsp = len(self.shape) - 1
        for sc in self.scales:
            ranges = [range(d - sc.width + 1) for d in self.shape[:nsp]]
            for sx in product(*ranges):
                for a in range(sc.anchors[0], sc.anchors[1] + 1):
                    yield self.config(sc, sx, a)

    def config(self, sc: Scale, spatial_start, anchor: int):
        boxes = {}
        for name, (lo, hi) in sc.blocks.items():
            boxes[name] = IndexBox(tuple(spatial_start) + (anchor + lo,),
                                   (sc.width,) * len(spatial_start) + (hi - lo,))
        if self.kind == "anatomy":
            return IntervalAnatomy(anchor, sc.params["m"], boxes, ())
        if self.kind == "gap-pair":
            return GapPairConfig(boxes["left"], boxes["right"], sc.params["gamma_eff"])
        if self.kind == "prect":
            k = sc.params["k"]
            return PRect(tuple(s + k for s in spatial_start), anchor, k,
                         sc.params["T"], sc.params["G"], sc.params["gamma"],
                         sc.params["gamma_eff"], sc.params["Lp_eff"], boxes)
        return boxes

    def caveat(self) -> dict:
        return {"family": self.kind, "mode": self.mode, "configurations": len(self), **self.caps}


# ------------------------------------------------------------------ 1D anatomy

ANATOMY_OFFSETS = {
    "I": (0, 2), "minus": (0, 1), "plus": (1, 2), "plusplus": (2, 3),
    "minusminus": (-1, 0), "plusplusplus": (3, 4),
}


@dataclass(frozen=True)
class IntervalAnatomy:
    """``I = [start, start + 2m)`` and its neighbouring m-cell boxes."""

    start: int
    m: int
    boxes: dict
    unavailable: tuple

    def __getattr__(self, name):
        boxes = object.__getattribute__(self, "boxes")
        if name in ANATOMY_OFFSETS:
            return boxes.get(name)
        raise AttributeError(name)


def interval_anatomy(line: SampledLine, start: int, m: int) -> IntervalAnatomy:
    """Anatomy of the interval of ``2m`` cells starting at cell ``start``.

    Boxes falling outside the window are listed in ``unavailable``.
    """
    if m < 1:
        raise GridError("m must be at least 1")
    boxes, missing = {}, []
    for name, (a, b) in ANATOMY_OFFSETS.items():
        box = IndexBox((start + a * m,), ((b - a) * m,))
        if box.fits(line.shape):
            boxes[name] = box
        else:
            missing.append(name)
    if "I" in missing:
        raise GridError(f"interval [{start}, {start + 2 * m}) exceeds the window of {line.N} cells")
    return IntervalAnatomy(start, m, boxes, tuple(missing))


def _ladder(limit: int, mode: str) -> list[int]:
    if mode in ("dyadic-ladder", "ladder"):
        return [1 << j for j in range(max(limit, 1).bit_length()) if (1 << j) <= limit]
    if mode == "exhaustive":
        return list(range(1, limit + 1))
    raise GridError(f"unknown family mode {mode!r}")


def anatomy_family(n_cells: int, require=("minus", "plus"), mode: str = "exhaustive",
                   max_m: int | None = None) -> Family:
    """All anatomies whose ``require``d boxes (and ``I`` itself) fit the window."""
    names = tuple(dict.fromkeys(("minus", "plus") + tuple(require)))
    lo = min(ANATOMY_OFFSETS[n][0] for n in names)
    hi = max(ANATOMY_OFFSETS[n][1] for n in names + ("I",))
    cap = n_cells // (hi - lo)
    if max_m is not None:
        cap = min(cap, max_m)
    scales = []
    for m in _ladder(cap, mode):
        blocks = {n: (ANATOMY_OFFSETS[n][0] * m, ANATOMY_OFFSETS[n][1] * m) for n in names}
        a0, a1 = -lo * m, n_cells - hi * m
        if a1 >= a0:
            scales.append(Scale(0, blocks, (a0, a1), {"m": m}))
    if not scales:
        raise GridError(f"no admissible interval in a window of {n_cells} cells")
    return Family("anatomy", (n_cells,), tuple(scales), mode,
                  {"max_m": scales[-1].params["m"], "blocks": list(names)})


# ------------------------------------------------------------------ gap pairs

@dataclass(frozen=True)
class GapPairConfig:
    left: IndexBox
    right: IndexBox
    gamma_eff: float


def gap_cells(m: int, gamma: float) -> int:
    """Gap between equal m-cell blocks whose span is ``m / gamma`` cells."""
    return max(round_half_up(m / gamma) - 2 * m, 0)


def gap_pair_family(line, gamma: float, mode: str = "exhaustive",
                    max_m: int | None = None) -> Family:
    """Equal-length pairs ``left | gap | right`` with ``m / span ~ gamma``.

    ``line`` may be a :class:`SampledLine` or a cell count.
    """
    n_cells = line if isinstance(line, (int, np.integer)) else line.N
    if not 0 < gamma <= 0.5:
        raise GridError(f"gamma must lie in (0, 1/2], got {gamma}")
    if n_cells < math.ceil(1 / gamma - 1e-9):
        raise GridError(f"window of {n_cells} cells is too small for gamma={gamma}")
    scales = []
    limit = n_cells // 2 if max_m is None else min(max_m, n_cells // 2)
    for m in _ladder(limit, mode):
        g = gap_cells(m, gamma)
        span = 2 * m + g
        if span > n_cells:
            continue
        blocks = {"left": (0, m), "right": (m + g, span)}
        scales.append(Scale(0, blocks, (0, n_cells - span),
                            {"m": m, "gap": g, "gamma_eff": m / span}))
    if not scales:
        raise GridError(f"window of {n_cells} cells admits no pair for gamma={gamma}")
    return Family("gap-pair", (n_cells,), tuple(scales), mode,
                  {"gamma": gamma, "max_m": scales[-1].params["m"],
                   "min_gamma_eff": min(s.params["gamma_eff"] for s in scales)})


# ------------------------------------------------------------ parabolic boxes

@dataclass(frozen=True)
class PRect:
    """Parabolic rectangle with spatial centre edge indices and time anchor.

    The spatial cube is ``[c - k, c + k)`` cells per axis and the time centre
    is the cell edge ``tau``.  Blocks are stored in ``blocks`` by name.
    """

    center: tuple
    tau: int
    k: int
    T: int
    G: int
    gamma: float
    gamma_eff: float
    Lp_eff: float
    blocks: dict

    @property
    def minus(self) -> IndexBox:
        return self.blocks["minus"]

    @property
    def plus(self) -> IndexBox:
        return self.blocks["plus"]

    @property
    def plusplus(self) -> IndexBox | None:
        return self.blocks.get("plusplus")


def snap_time(k: int, hx: float, ht: float, p: float, gamma: float) -> tuple[int, int]:
    """Time half-length ``T`` and lag ``G`` in cells for half-edge ``k``."""
    T = max(1, round_half_up((k * hx) ** p / ht))
    G = round_half_up(gamma * T)
    return T, G


def prect_blocks(T: int, G: int, shift: int | None = None) -> dict:
    blocks = {"minus": (-T, -G), "plus": (G, T), "plusplus": (T + 2 * G, 2 * T + G)}
    if shift is not None:
        blocks["S+"] = (-T + shift, -G + shift)
        blocks["S++"] = (-T + 2 * shift, -G + 2 * shift)
    return blocks


def prect_family(slab, gamma: float, mode: str = "exhaustive",
                 require=("minus", "plus", "plusplus"), max_k: int | None = None,
                 tau: float | None = None, min_k: int = 1,
                 min_T: int | None = None) -> Family:
    """Parabolic rectangles over the slab window.

    ``require`` lists the blocks that must fit; ``tau`` adds the translates
    ``S+ = R- + tau*L^p`` and ``S++ = S+ + tau*L^p`` (snapped to
    ``round(tau*T)`` cells) as required blocks.  A family requiring only
    ``minus`` and ``plus`` contains, for every member whose ``plusplus``
    block fits, the shifted rectangle whose ``minus`` and ``plus`` blocks are
    that member's ``plus`` and ``plusplus``.

    For ``gamma > 0`` scales with fewer than ``ceil(1/gamma)`` time cells
    per half-length are skipped by default, so every realised lag is at least
    one cell and ``|gamma_eff - gamma| <= gamma / 2``.
    """
    shape = slab.dims if isinstance(slab, SampledSlab) else tuple(slab["dims"])
    hx = slab.hx if isinstance(slab, SampledSlab) else slab["hx"]
    ht = slab.ht if isinstance(slab, SampledSlab) else slab["ht"]
    p = slab.p if isinstance(slab, SampledSlab) else slab["p"]
    if not 0 <= gamma < 1:
        raise GridError(f"gamma must lie in [0, 1), got {gamma}")
    nx = min(shape[:-1])
    nt = shape[-1]
    cap = max(1, nx // 4) if max_k is None else min(max_k, nx // 2)
    names = list(dict.fromkeys(("minus",) + tuple(require)))
    if tau is not None:
        names += ["S+", "S++"]
    if min_T is None:
        min_T = math.ceil(1 / gamma - 1e-9) if gamma > 0 else 1
    scales = []
    for k in _ladder(cap, mode):
        if k < min_k:
            continue
        T, G = snap_time(k, hx, ht, p, gamma)
        if T < min_T or T - G < 1:
            continue
        shift = None if tau is None else round_half_up(tau * T)
        if shift is not None and shift < T - G:
            continue
        allb = prect_blocks(T, G, shift)
        blocks = {nm: allb[nm] for nm in names}
        lo = min(b[0] for b in blocks.values())
        hi = max(b[1] for b in blocks.values())
        a0, a1 = -lo, nt - hi
        if a1 < a0:
            continue
        params = {"k": k, "T": T, "G": G, "gamma": gamma, "gamma_eff": G / T,
                  "Lp_eff": T * ht, "L": k * hx}
        if shift is not None:
            params.update(shift=shift, tau=tau, tau_eff=shift / T)
        scales.append(Scale(2 * k, blocks, (a0, a1), params))
    if not scales:
        raise GridError("slab admits no parabolic rectangle with the requested blocks")
    caps = {"gamma": gamma, "max_k": scales[-1].params["k"], "min_T": min_T, "blocks": names,
            "gamma_eff": sorted({s.params["gamma_eff"] for s in scales})}
    if tau is not None:
        caps["tau"] = tau
    return Family("prect", tuple(shape), tuple(scales), mode, caps)


def shifted_rect(fam: Family, rect: PRect) -> PRect | None:
    """The member ``R'`` of ``fam`` with ``R'- = R+`` and ``R'+ = R++``."""
    for sc in fam.scales:
        if sc.params["k"] == rect.k:
            a = rect.tau + rect.T + rect.G
            if sc.anchors[0] <= a <= sc.anchors[1]:
                return fam.config(sc, tuple(c - rect.k for c in rect.center), a)
    return None


# ------------------------------------------------------------- dyadic trees

@dataclass
class DyadicNode:
    """Node of a parabolic dyadic tree.

    ``lo``/``hi`` are the continuous corners (spatial axes first, time last)
    and ``box`` the snapped cell box, or ``None`` when the node is finer than
    the grid.  ``lx`` is the spatial half-edge and ``lt`` the time length.
    """

    level: int
    lo: tuple
    hi: tuple
    lx: float
    lt: float
    box: IndexBox | None
    children: list = field(default_factory=list)

    @property
    def volume(self) -> float:
        return math.prod(b - a for a, b in zip(self.lo, self.hi))

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def levels(self) -> list[list["DyadicNode"]]:
        out, layer = [], [self]
        while layer:
            out.append(layer)
            layer = [c for node in layer for c in node.children]
        return out

    def to_json(self) -> dict:
        return {"level": self.level, "lo": list(self.lo), "hi": list(self.hi),
                "lx": self.lx, "lt": self.lt,
                "box": None if self.box is None else self.box.to_json(),
                "children": [c.to_json() for c in self.children]}


def time_parts(lt: float, p: float, root_lt: float, level: int) -> int:
    """Number of time pieces used when producing nodes of ``level``."""
    lower, upper = math.floor(2 ** p), math.ceil(2 ** p)
    target = root_lt / 2 ** (p * level)
    return lower if lt / lower < target else upper


def _split(a: int, size: int, parts: int) -> list[tuple[int, int]]:
    cuts = [a + round_half_up(i * size / parts) for i in range(parts + 1)]
    return list(zip(cuts[:-1], cuts[1:]))


def dyadic_decompose(block: IndexBox, p: float, gamma: float, depth: int, *,
                     hx: float = 1.0, ht: float = 1.0, origin=None,
                     strict: bool = True) -> DyadicNode:
    """Parabolic dyadic tree of a block down to ``depth`` levels.

    Spatial edges are halved at every level.  The time edge of a node of
    level ``j - 1`` is cut into ``floor(2^p)`` pieces when that leaves pieces
    shorter than the level-``j`` target ``root_lt / 2^(p j)``, and into
    ``ceil(2^p)`` pieces otherwise.  ``root_lt`` is the block's time length,
    i.e. ``(1 - gamma_eff) * Lp_eff`` for a snapped rectangle.  Continuous
    corners are tracked exactly; snapped boxes follow the same cuts rounded to
    cell edges.  With ``strict`` a node thinner than one cell raises.
    """
    n = len(block.size) - 1
    if n < 0:
        raise GridError("block needs at least one axis")
    if origin is None:
        origin = tuple(0.0 for _ in block.start)
    lo = tuple(origin[a] + block.start[a] * (hx if a < n else ht) for a in range(n + 1))
    hi = tuple(lo[a] + block.size[a] * (hx if a < n else ht) for a in range(n + 1))
    if n and len(set(block.size[:n])) != 1:
        raise GridError("spatial edges of a dyadic block must be equal")
    lx = block.size[0] * hx / 2 if n else 0.0
    root_lt = block.size[-1] * ht
    root = DyadicNode(0, lo, hi, lx, root_lt, block)
    layer = [root]
    for level in range(1, depth + 1):
        nxt = []
        for node in layer:
            parts = time_parts(node.lt, p, root_lt, level)
            child_lt = node.lt / parts
            t_edges = [node.lo[-1] + i * child_lt for i in range(parts)] + [node.hi[-1]]
            halves = [((node.lo[a], (node.lo[a] + node.hi[a]) / 2),
                       ((node.lo[a] + node.hi[a]) / 2, node.hi[a])) for a in range(n)]
            if node.box is not None:
                bsp = [_split(node.box.start[a], node.box.size[a], 2) for a in range(n)]
                bt = _split(node.box.start[-1], node.box.size[-1], parts)
            for sp in product(range(2), repeat=n):
                for ti in range(parts):
                    clo = tuple(halves[a][sp[a]][0] for a in range(n)) + (t_edges[ti],)
                    chi = tuple(halves[a][sp[a]][1] for a in range(n)) + (t_edges[ti + 1],)
                    box = None
                    if node.box is not None:
                        cuts = [bsp[a][sp[a]] for a in range(n)] + [bt[ti]]
                        if all(e > s for s, e in cuts):
                            box = IndexBox(tuple(s for s, _ in cuts), tuple(e - s for s, e in cuts))
                    if box is None and strict:
                        raise GridError(f"depth {depth} exceeds the cell resolution of the block")
                    child = DyadicNode(level, clo, chi, node.lx / 2, child_lt, box)
                    node.children.append(child)
                    nxt.append(child)
        layer = nxt
    return root


def check_dyadic(root: DyadicNode, p: float, n: int, tol: float = 1e-12) -> dict:
    """Verify (D0)-(D4) on a tree; returns per-property pass flags.

    D0: at every level the snapped boxes cover each root cell exactly once and
    the continuous volumes add up to the root volume.  D1/D3: every child
    lies inside its parent and siblings are pairwise disjoint, which makes
    any two nodes nested or disjoint and gives each node a unique parent.
    D2: child counts.  D4: continuous edge lengths.
    """
    lower, upper = math.floor(2 ** p), math.ceil(2 ** p)
    allowed = {2 ** n * lower, 2 ** n * upper}
    res = {"D0": True, "D1": True, "D2": True, "D3": True, "D4": True}
    L, root_lt = root.lx, root.lt
    for j, layer in enumerate(root.levels()):
        vol = math.fsum(nd.volume for nd in layer)
        if abs(vol - root.volume) > tol * root.volume:
            res["D0"] = False
        if root.box is not None and all(nd.box is not None for nd in layer):
            cover = np.zeros(root.box.size, dtype=np.int64)
            for nd in layer:
                sl = tuple(slice(s - r, s - r + z) for s, r, z in
                           zip(nd.box.start, root.box.start, nd.box.size))
                cover[sl] += 1
            if not np.all(cover == 1):
                res["D0"] = False
        target = root_lt / 2 ** (p * j)
        for nd in layer:
            if n and abs(nd.lx - L / 2 ** j) > tol * L:
                res["D4"] = False
            if not (0.5 * target * (1 - tol) <= nd.lt <= target * (1 + tol)):
                res["D4"] = False
            if not nd.children:
                continue
            if len(nd.children) not in allowed:
                res["D2"] = False
            for i, c in enumerate(nd.children):
                if c.level != nd.level + 1 or not _contains(nd, c, tol):
                    res["D1"] = False
                if c.box is not None and nd.box is not None and not nd.box.contains(c.box):
                    res["D1"] = False
                for d in nd.children[i + 1:]:
                    if not _disjoint(c, d, tol):
                        res["D3"] = False
                    if c.box is not None and d.box is not None and not c.box.disjoint(d.box):
                        res["D3"] = False
    return res


def _contains(a: DyadicNode, b: DyadicNode, tol: float) -> bool:
    e = tol * (max(abs(v) for v in a.hi + a.lo) or 1.0)
    return all(al - e <= bl and bh <= ah + e for al, ah, bl, bh in zip(a.lo, a.hi, b.lo, b.hi))


def _disjoint(a: DyadicNode, b: DyadicNode, tol: float) -> bool:
    e = tol * (max(abs(v) for v in a.hi + a.lo) or 1.0)
    return any(bh <= al + e or ah <= bl + e for al, ah, bl, bh in zip(a.lo, a.hi, b.lo, b.hi))
