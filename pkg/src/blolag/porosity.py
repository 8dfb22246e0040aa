"""Set models, parabolic distance, porosity certificates and the Harnack pipeline.

Sets are closed; dyadic rectangles and subintervals are tested as open boxes,
so a set and its closure always receive the same verdict.  On a line
(``n = 0``) the single coordinate plays the role of the ordered time axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _blocks
from .geometry import DyadicNode, IndexBox, anatomy_family, dyadic_decompose, prect_family
from .grid import GridError, SampledLine, SampledSlab
from .oscillation import osc_norm
from .weights import WeightConstantSpec, bridge_check, weight_constant

POWERS = tuple(2.0 ** -j for j in range(1, 9))
REL_TOL = 1e-12


# ------------------------------------------------------------- set models

@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple


@dataclass(frozen=True)
class TimeSlab:
    times: tuple


@dataclass(frozen=True)
class Points:
    coords: np.ndarray


@dataclass(frozen=True)
class SetModel:
    """Finite union of closed primitives in ``R^n x R`` (time last)."""

    n: int
    primitives: tuple

    def __post_init__(self):
        if not self.primitives:
            raise GridError("a set model needs at least one primitive")
        d = self.n + 1
        for pr in self.primitives:
            if isinstance(pr, Box):
                if len(pr.lo) != d or len(pr.hi) != d or any(a > b for a, b in zip(pr.lo, pr.hi)):
                    raise GridError(f"bad box primitive {pr}")
            elif isinstance(pr, TimeSlab):
                if not pr.times:
                    raise GridError("empty time-slab primitive")
            elif isinstance(pr, Points):
                if pr.coords.ndim != 2 or pr.coords.shape[1] != d or pr.coords.shape[0] == 0:
                    raise GridError(f"points need shape (k, {d})")
            else:
                raise GridError(f"unknown primitive {pr!r}")

    @classmethod
    def box(cls, xmin, xmax, tmin, tmax) -> "SetModel":
        return cls(len(xmin), (Box(tuple(xmin) + (tmin,), tuple(xmax) + (tmax,)),))

    @classmethod
    def slabs(cls, n: int, times) -> "SetModel":
        return cls(n, (TimeSlab(tuple(float(t) for t in times)),))

    @classmethod
    def points(cls, coords) -> "SetModel":
        arr = np.atleast_2d(np.asarray(coords, dtype=np.float64))
        arr.setflags(write=False)
        return cls(arr.shape[1] - 1, (Points(arr),))

    def union(self, other: "SetModel") -> "SetModel":
        if other.n != self.n:
            raise GridError("cannot join sets of different dimension")
        return SetModel(self.n, self.primitives + other.primitives)

    @classmethod
    def from_json(cls, obj: dict) -> "SetModel":
        n = int(obj["n"])
        prims = []
        for item in obj["primitives"]:
            if "box" in item:
                b = item["box"]
                xmin, xmax = tuple(b.get("xmin", ())), tuple(b.get("xmax", ()))
                prims.append(Box(xmin + (b["tmin"],), xmax + (b["tmax"],)))
            elif "time-slab" in item:
                prims.append(TimeSlab(tuple(float(t) for t in item["time-slab"])))
            elif "points" in item:
                arr = np.asarray(item["points"], dtype=np.float64).reshape(-1, n + 1)
                arr.setflags(write=False)
                prims.append(Points(arr))
            else:
                raise GridError(f"unknown primitive {sorted(item)}")
        return cls(n, tuple(prims))

    def to_json(self) -> dict:
        out = []
        for pr in self.primitives:
            if isinstance(pr, Box):
                out.append({"box": {"xmin": list(pr.lo[:-1]), "xmax": list(pr.hi[:-1]),
                                    "tmin": pr.lo[-1], "tmax": pr.hi[-1]}})
            elif isinstance(pr, TimeSlab):
                out.append({"time-slab": list(pr.times)})
            else:
                out.append({"points": pr.coords.tolist()})
        return {"n": self.n, "primitives": out}

    def hits(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Whether each open box ``(lo, hi)`` meets the set; boxes on the last axis."""
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        out = np.zeros(lo.shape[:-1], dtype=bool)
        for pr in self.primitives:
            if isinstance(pr, Box):
                a, b = np.asarray(pr.lo), np.asarray(pr.hi)
                out |= np.all((a < hi) & (b > lo), axis=-1)
            elif isinstance(pr, TimeSlab):
                for s in pr.times:
                    out |= (lo[..., -1] < s) & (s < hi[..., -1])
            else:
                for q in pr.coords:
                    out |= np.all((lo < q) & (q < hi), axis=-1)
        return out

    def measure_in(self, lo, hi) -> float:
        """Upper bound on the measure of the set inside the closed box ``[lo, hi]``."""
        total = 0.0
        for pr in self.primitives:
            if isinstance(pr, Box):
                total += math.prod(max(0.0, min(b, h) - max(a, l))
                                   for a, b, l, h in zip(pr.lo, pr.hi, lo, hi))
        return total


def binary_slab_times(tmin: float, tmax: float) -> list[float]:
    """Times ``k`` for ``k >= 0`` and ``-2^j`` for ``j >= 1`` inside ``[tmin, tmax]``."""
    out = [float(k) for k in range(max(0, math.ceil(tmin)), math.floor(tmax) + 1)]
    j = 1
    while -(2.0 ** j) >= tmin:
        if -(2.0 ** j) <= tmax:
            out.append(-(2.0 ** j))
        j += 1
    return sorted(out)


# ------------------------------------------------------------- distances

def parabolic_distance(points, E: SetModel, p: float) -> np.ndarray:
    """``max(|x_i - y_i|, |t - s|^(1/p))`` distance from each point to ``E``.

    ``points`` has the coordinates on its last axis; a single point gives a
    0-d array.
    """
    q = np.asarray(points, dtype=np.float64)
    if q.shape[-1] != E.n + 1:
        raise GridError(f"points need {E.n + 1} coordinates")
    x, t = q[..., :-1], q[..., -1]
    best = np.full(q.shape[:-1], np.inf)
    for pr in E.primitives:
        if isinstance(pr, Box):
            a, b = np.asarray(pr.lo), np.asarray(pr.hi)
            gap = np.maximum(0.0, np.maximum(a - q, q - b))
            d = np.abs(gap[..., -1]) ** (1 / p)
            if E.n:
                d = np.maximum(d, gap[..., :-1].max(axis=-1))
            best = np.minimum(best, d)
        elif isinstance(pr, TimeSlab):
            for s in pr.times:
                best = np.minimum(best, np.abs(t - s) ** (1 / p))
        else:
            for y in pr.coords:
                d = np.abs(t - y[-1]) ** (1 / p)
                if E.n:
                    d = np.maximum(d, np.abs(x - y[:-1]).max(axis=-1))
                best = np.minimum(best, d)
    return best


def window(p: float, xlim, tlim, dims) -> SampledSlab:
    """A zero-valued slab describing a search window."""
    return SampledSlab.from_function(lambda *c: np.zeros_like(c[0]), p, xlim, tlim, dims)


# ------------------------------------------------------- dyadic searches

@dataclass
class _Tree:
    lo: np.ndarray
    hi: np.ndarray
    vol: np.ndarray
    level: np.ndarray
    parent: np.ndarray
    level_slices: list


def _flatten(root: DyadicNode) -> _Tree:
    nodes, parents, slices = [], [], []
    where = {}
    for layer in root.levels():
        layer = sorted(layer, key=lambda nd: nd.lo)
        start = len(nodes)
        for nd in layer:
            where[id(nd)] = len(nodes)
            nodes.append(nd)
            parents.append(-1)
        slices.append(slice(start, len(nodes)))
    for nd in nodes:
        for c in nd.children:
            parents[where[id(c)]] = where[id(nd)]
    lo = np.array([nd.lo for nd in nodes])
    hi = np.array([nd.hi for nd in nodes])
    return _Tree(lo, hi, np.prod(hi - lo, axis=1), np.array([nd.level for nd in nodes]),
                 np.array(parents), slices)


def _tree_for(size: tuple, p: float, hx: float, ht: float, depth: int) -> _Tree:
    root = dyadic_decompose(IndexBox((0,) * len(size), size), p, 0.0, depth,
                            hx=hx, ht=ht, strict=False)
    return _flatten(root)


def _largest(free: np.ndarray, tree: _Tree) -> tuple[np.ndarray, np.ndarray]:
    """Volume and index of the largest free node per row; ties go to the
    lower level, then the lexicographically smaller origin."""
    vols = np.where(free, tree.vol, 0.0)
    top = vols.max(axis=-1)
    cand = free & (tree.vol >= top[..., None] * (1 - REL_TOL))
    idx = np.argmax(cand, axis=-1)
    return top, np.where(top > 0, idx, -1)


def _maximal_free(free: np.ndarray, tree: _Tree) -> np.ndarray:
    covered = np.zeros_like(free)
    for sl in tree.level_slices[1:]:
        par = tree.parent[sl]
        covered[..., sl] = free[..., par] | covered[..., par]
    return free & ~covered


def largest_free_dyadic(block: IndexBox, E: SetModel, p: float, grid: SampledSlab,
                        max_depth: int = 3) -> tuple[DyadicNode | None, float]:
    """Largest ``E``-free node of the dyadic tree of a snapped block."""
    root = dyadic_decompose(block, p, 0.0, max_depth, hx=grid.hx, ht=grid.ht,
                            origin=tuple(grid.x0) + (grid.t0,), strict=False)
    tree = _flatten(root)
    free = ~E.hits(tree.lo, tree.hi)
    vol, idx = _largest(free, tree)
    if idx < 0:
        return None, 0.0
    flat = [nd for layer in root.levels() for nd in sorted(layer, key=lambda nd: nd.lo)]
    return flat[int(idx)], float(vol)


# ---------------------------------------------------------- certificates

@dataclass
class PorosityCertificate:
    porous: bool
    c: float | None
    delta: float | None
    table: list
    witnesses: list
    failure: dict | None
    caps: dict = field(default_factory=dict)

    def valid_pairs(self) -> list[tuple[float, float]]:
        return [(c, d) for d, cd in self.table for c in POWERS if c <= cd]

    def to_json(self, witnesses: bool = True) -> dict:
        out = {"porous": self.porous, "c": self.c, "delta": self.delta,
               "table": [{"delta": d, "c_max": c} for d, c in self.table],
               "failure": self.failure, "caps": self.caps,
               "n_witnesses": len(self.witnesses)}
        if witnesses:
            out["witnesses"] = self.witnesses
        return out


def _choose(table) -> tuple[float | None, float | None]:
    """Largest ``c * delta`` over valid grid pairs, ties to the larger delta."""
    best = None
    for d, cd in table:
        cs = [c for c in POWERS if c <= cd * (1 + REL_TOL)]
        if not cs:
            continue
        key = (max(cs) * d, d)
        if best is None or key > best[0]:
            best = (key, max(cs), d)
    return (None, None) if best is None else (best[1], best[2])


def _box_json(lo, hi) -> dict:
    return {"lo": [float(v) for v in lo], "hi": [float(v) for v in hi]}


def fit_porosity_check(E: SetModel, gamma: float, grid: SampledSlab, *, max_depth: int = 3,
                       mode: str = "exhaustive", max_k: int | None = None,
                       keep_witnesses: bool = True) -> PorosityCertificate:
    """Forward-in-time porosity search over the rectangles of ``grid``.

    For every rectangle the largest free node of the ``plus`` tree sets the
    size threshold; in the ``minus`` tree the maximal free nodes above
    ``delta`` times that size are selected, which maximises the covered
    volume.  ``c_max(delta)`` is the smallest covered fraction over the family.
    """
    if E.n != grid.n:
        raise GridError("set and window dimensions differ")
    fam = prect_family(grid, gamma, mode, ("minus", "plus"), max_k)
    origin = np.array(tuple(grid.x0) + (grid.t0,))
    n = grid.n
    worst = np.ones(len(POWERS))
    where_worst = [None] * len(POWERS)
    records = []
    for sc in fam.scales:
        k, T, G = sc.params["k"], sc.params["T"], sc.params["G"]
        tree = _tree_for((2 * k,) * n + (T - G,), grid.p, grid.hx, grid.ht, max_depth)
        starts = np.stack(np.meshgrid(*[np.arange(d - 2 * k + 1) for d in grid.dims[:-1]],
                                      indexing="ij"), -1).reshape(-1, n)
        anchors = np.arange(sc.anchors[0], sc.anchors[1] + 1)
        sp = np.repeat(starts, anchors.size, axis=0) * grid.hx
        an = np.tile(anchors, starts.shape[0])
        minus_org = np.concatenate([sp, ((an - T) * grid.ht)[:, None]], axis=1) + origin
        plus_org = np.concatenate([sp, ((an + G) * grid.ht)[:, None]], axis=1) + origin
        root_vol = float(tree.vol[0])
        for c0 in range(0, an.size, 2048):
            mo, po = minus_org[c0:c0 + 2048, None, :], plus_org[c0:c0 + 2048, None, :]
            free_p = ~E.hits(po + tree.lo, po + tree.hi)
            mvol, midx = _largest(free_p, tree)
            if np.any(midx < 0):
                r = int(np.flatnonzero(midx < 0)[0])
                fail = {"reason": "future block has no free dyadic rectangle",
                        "rect": {"k": k, "T": T, "G": G,
                                 "minus": _box_json(mo[r, 0], mo[r, 0] + tree.hi[0]),
                                 "plus": _box_json(po[r, 0], po[r, 0] + tree.hi[0])}}
                return PorosityCertificate(False, None, None, [(d, 0.0) for d in POWERS], [],
                                           fail, fam.caveat())
            free_m = ~E.hits(mo + tree.lo, mo + tree.hi)
            maximal = _maximal_free(free_m, tree)
            fracs = []
            for d in POWERS:
                sel = maximal & (tree.vol >= d * mvol[:, None] * (1 - REL_TOL))
                fracs.append((sel * tree.vol).sum(axis=1) / root_vol)
            fracs = np.array(fracs)
            for j in range(len(POWERS)):
                r = int(np.argmin(fracs[j]))
                if fracs[j, r] < worst[j]:
                    worst[j] = fracs[j, r]
                    where_worst[j] = {"k": k, "minus": _box_json(mo[r, 0], mo[r, 0] + tree.hi[0])}
            if keep_witnesses:
                records.append((k, T, G, tree, mo[:, 0], po[:, 0], midx, maximal, mvol))
    table = list(zip(POWERS, worst.tolist()))
    c, delta = _choose(table)
    caps = {**fam.caveat(), "max_depth": max_depth}
    if c is None:
        j = len(POWERS) - 1
        return PorosityCertificate(False, None, None, table, [],
                                   {"reason": "covered fraction vanishes at every delta",
                                    "rect": where_worst[j]}, caps)
    wits = []
    for k, T, G, tree, mo, po, midx, maximal, mvol in records:
        sel = maximal & (tree.vol >= delta * mvol[:, None] * (1 - REL_TOL))
        for r in range(mo.shape[0]):
            m = int(midx[r])
            wits.append({"k": k, "T": T, "G": G,
                         "minus": _box_json(mo[r], mo[r] + tree.hi[0]),
                         "plus": _box_json(po[r], po[r] + tree.hi[0]),
                         "largest_future": _box_json(po[r] + tree.lo[m], po[r] + tree.hi[m]),
                         "selected": [_box_json(mo[r] + tree.lo[i], mo[r] + tree.hi[i])
                                      for i in np.flatnonzero(sel[r])]})
    return PorosityCertificate(True, c, delta, table, wits, None, caps)


def right_sided_porosity_1d(E: SetModel, grid: SampledLine, *, mode: str = "exhaustive",
                            max_m: int | None = None, keep_witnesses: bool = True) -> PorosityCertificate:
    """Line analogue over interval anatomies with exact free gaps."""
    if E.n != 0:
        raise GridError("right-sided porosity needs a set on the line (n = 0)")
    spans = _merged_intervals(E)
    fam = anatomy_family(grid.N, ("minus", "plus"), mode, max_m)
    worst = np.ones(len(POWERS))
    where_worst = [None] * len(POWERS)
    rows = []
    for sc in fam.scales:
        m = sc.params["m"]
        for s in range(sc.anchors[0], sc.anchors[1] + 1):
            a, mid, b = grid.edge(s), grid.edge(s + m), grid.edge(s + 2 * m)
            future = _gaps(spans, mid, b)
            longest = max((hi - lo for lo, hi in future), default=0.0)
            if longest <= 0:
                return PorosityCertificate(False, None, None, [(d, 0.0) for d in POWERS], [],
                                           {"reason": "future interval has no free subinterval",
                                            "interval": [a, b]}, fam.caveat())
            past = _gaps(spans, a, mid)
            lens = np.array([hi - lo for lo, hi in past])
            for j, d in enumerate(POWERS):
                frac = float(lens[lens >= d * longest * (1 - REL_TOL)].sum()) / (mid - a)
                if frac < worst[j]:
                    worst[j] = frac
                    where_worst[j] = [a, b]
            if keep_witnesses:
                rows.append((a, mid, b, longest, past))
    table = list(zip(POWERS, worst.tolist()))
    c, delta = _choose(table)
    if c is None:
        return PorosityCertificate(False, None, None, table, [],
                                   {"reason": "covered fraction vanishes at every delta",
                                    "interval": where_worst[-1]}, fam.caveat())
    wits = [{"minus": _box_json([a], [mid]), "plus": _box_json([mid], [b]), "longest_future": longest,
             "selected": [_box_json([lo], [hi]) for lo, hi in past
                          if hi - lo >= delta * longest * (1 - REL_TOL)]}
            for a, mid, b, longest, past in rows]
    return PorosityCertificate(True, c, delta, table, wits, None, fam.caveat())


def _merged_intervals(E: SetModel) -> list[tuple[float, float]]:
    spans = []
    for pr in E.primitives:
        if isinstance(pr, Box):
            spans.append((pr.lo[0], pr.hi[0]))
        elif isinstance(pr, TimeSlab):
            spans += [(t, t) for t in pr.times]
        else:
            spans += [(float(q[0]), float(q[0])) for q in pr.coords]
    spans.sort()
    merged = []
    for lo, hi in spans:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _gaps(spans, a: float, b: float) -> list[tuple[float, float]]:
    """Maximal open subintervals of ``(a, b)`` missing the merged spans."""
    out, cur = [], a
    for lo, hi in spans:
        if hi < a or lo > b:
            continue
        if lo > cur:
            out.append((cur, min(lo, b)))
        cur = max(cur, hi)
        if cur >= b:
            break
    if cur < b:
        out.append((cur, b))
    return out


# ------------------------------------------------------------- validator

def _scalar_hits(E: SetModel, lo, hi) -> bool:
    for pr in E.primitives:
        if isinstance(pr, Box):
            if all(a < h and b > l for a, b, l, h in zip(pr.lo, pr.hi, lo, hi)):
                return True
        elif isinstance(pr, TimeSlab):
            if any(lo[-1] < s < hi[-1] for s in pr.times):
                return True
        else:
            for q in pr.coords.tolist():
                if all(l < v < h for v, l, h in zip(q, lo, hi)):
                    return True
    return False


def _vol(b) -> float:
    return math.prod(h - l for l, h in zip(b["lo"], b["hi"]))


def validate_certificate(cert: PorosityCertificate, E: SetModel, tol: float = 1e-12) -> dict:
    """Re-check a certificate with scalar geometry only.

    Selected boxes must lie in the past block, be pairwise disjoint and free,
    reach ``delta`` times the recorded future size and cover a fraction
    ``c`` of the past block; the recorded future box must itself be free and
    inside the future block.
    """
    problems = []
    if not cert.porous:
        if cert.failure is None:
            problems.append("non-porous certificate without a failure witness")
        return {"ok": not problems, "problems": problems}
    for w in cert.witnesses:
        past = w["minus"]
        if "largest_future" in w and isinstance(w["largest_future"], dict):
            lf = w["largest_future"]
            if _scalar_hits(E, lf["lo"], lf["hi"]):
                problems.append(f"future witness meets E in {w['plus']}")
            if not _inside(lf, w["plus"], tol):
                problems.append("future witness outside the future block")
            future = _vol(lf)
        else:
            future = w["longest_future"]
        sel = w["selected"]
        for i, b in enumerate(sel):
            if not _inside(b, past, tol):
                problems.append(f"selected box outside the past block {past}")
            if _scalar_hits(E, b["lo"], b["hi"]):
                problems.append(f"selected box meets E: {b}")
            if _vol(b) < cert.delta * future * (1 - 1e-9):
                problems.append(f"selected box below the size threshold: {b}")
            for d in sel[i + 1:]:
                if not any(bh <= dl + tol or dh <= bl + tol
                           for bl, bh, dl, dh in zip(b["lo"], b["hi"], d["lo"], d["hi"])):
                    problems.append(f"overlapping selected boxes {b} {d}")
        if sum(_vol(b) for b in sel) < cert.c * _vol(past) * (1 - 1e-9):
            problems.append(f"covered fraction below c in {past}")
        if len(problems) > 20:
            break
    return {"ok": not problems, "problems": problems[:20]}


def _inside(b, outer, tol) -> bool:
    scale = max(1.0, max(abs(v) for v in outer["lo"] + outer["hi"]))
    return all(ol - tol * scale <= bl and bh <= oh + tol * scale
               for bl, bh, ol, oh in zip(b["lo"], b["hi"], outer["lo"], outer["hi"]))


# ------------------------------------------------------------- pipelines

def refine(grid: SampledSlab) -> SampledSlab:
    """Halve spatial cells and divide time cells by ``2^p``."""
    tfac = round(2 ** grid.p)
    if not math.isclose(tfac, 2 ** grid.p):
        raise GridError("parabolic refinement needs an integer 2^p")
    dims = tuple(2 * d for d in grid.dims[:-1]) + (grid.dims[-1] * tfac,)
    return SampledSlab(grid.n, grid.p, grid.x0, grid.hx / 2, grid.t0, grid.ht / tfac,
                       np.zeros(dims), dims)


def distance_weight(E: SetModel, alpha: float, grid: SampledSlab) -> SampledSlab:
    d = parabolic_distance(np.stack(grid.mesh(), -1), E, grid.p)
    if np.any(d <= 0):
        raise GridError("a cell centre lies on E; shift the window")
    return grid.with_values(d ** -alpha)


def distance_weight_pipeline(E: SetModel, alpha: float, gamma: float, grid: SampledSlab, *,
                             cap: float = 1e6, stability: float = 0.1, max_depth: int = 3,
                             max_k: int | None = None) -> dict:
    """Weight constant of ``d_p(., E)^-alpha`` on two resolutions, the norm of
    ``-ln d_p(., E)`` and a porosity search; only the forward implication
    (finite stable constant gives porosity) is checked."""
    cells = np.prod([grid.hx] * grid.n + [grid.ht])
    lo = tuple(grid.x0) + (grid.t0,)
    hi = tuple(x + d * grid.hx for x, d in zip(grid.x0, grid.dims[:-1])) + (grid.t0 + grid.nt * grid.ht,)
    if E.measure_in(lo, hi) > 0:
        raise GridError("E has positive measure inside the window")
    spec = WeightConstantSpec(q=1, setting="parabolic", gamma=gamma, max_k=max_k)
    w = distance_weight(E, alpha, grid)
    coarse = weight_constant(w, spec).constant
    fine_grid = refine(grid)
    fine_k = None if max_k is None else 2 * max_k
    fine = weight_constant(distance_weight(E, alpha, fine_grid),
                           WeightConstantSpec(q=1, setting="parabolic", gamma=gamma,
                                              max_k=fine_k)).constant
    drift = abs(fine - coarse) / coarse
    norm = osc_norm(w.with_values(-np.log(parabolic_distance(np.stack(grid.mesh(), -1), E, grid.p))),
                    "pblo-minus", gamma=gamma, max_k=max_k).norm
    cert = fit_porosity_check(E, gamma, grid, max_depth=max_depth, max_k=max_k)
    hypothesis = coarse <= cap and drift <= stability
    if not hypothesis:
        status = "hypothesis not met"
    else:
        status = "holds" if cert.porous else "violated"
    return {"alpha": alpha, "gamma": gamma, "constant": coarse, "constant_refined": fine,
            "drift": drift, "cap": cap, "norm_neg_log_distance": norm,
            "porosity": cert.to_json(witnesses=False), "implication": status,
            "cell_volume": float(cells), "certificate": cert}


def harnack_check(u: SampledSlab, gamma: float, *, mode: str = "exhaustive",
                  max_k: int | None = None, slack: float = 1e-9) -> dict:
    """Harnack ratio, weight constant, log-norm and bridge for ``u > 0``."""
    v = np.asarray(u.values, dtype=np.float64)
    if np.any(v <= 0):
        raise GridError("harnack_check needs a strictly positive u")
    fam = prect_family(u, gamma, mode, ("minus", "plus"), max_k)
    ratio = 0.0
    for sc in fam.scales:
        top = _blocks.block_stat(v, sc, "minus", "max")
        low = _blocks.block_stat(v, sc, "plus", "min")
        ratio = max(ratio, float(np.max(top / low)))
    br = bridge_check(u, "parabolic", gamma, mode, None, max_k, slack)
    return {"harnack_constant": ratio, "weight_constant": br.details["constant"],
            "log_norm": br.lhs, "bridge_rhs": br.rhs, "bridge_pass": br.passed,
            "family_caps": fam.caveat()}


def heat_residual(u: SampledSlab) -> float:
    """Largest interior ``|du/dt - laplacian u|`` with centred differences."""
    if u.p != 2:
        raise GridError("heat residual is defined for p = 2 only")
    v = np.asarray(u.values, dtype=np.float64)
    if any(d < 3 for d in v.shape):
        raise GridError("no interior cells")
    inner = tuple(slice(1, -1) for _ in v.shape)
    dt = (v[..., 2:] - v[..., :-2])[tuple(slice(1, -1) for _ in v.shape[:-1])] / (2 * u.ht)
    lap = np.zeros_like(dt)
    for a in range(u.n):
        up = [slice(1, -1)] * v.ndim
        dn = [slice(1, -1)] * v.ndim
        up[a], dn[a] = slice(2, None), slice(None, -2)
        lap += (v[tuple(up)] - 2 * v[inner] + v[tuple(dn)]) / u.hx ** 2
    return float(np.max(np.abs(dt - lap)))
