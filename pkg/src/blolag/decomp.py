"""Level-set profiles, Coifman-Rochberg factorisation and decompositions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _blocks
from .geometry import anatomy_family, prect_family
from .grid import GridError, SampledLine, SampledSlab
from .maximal import (defined_time_range, onesided_max_full, parabolic_max_full,
                      standard_minus_fast)
from .oscillation import osc_norm
from .weights import (DEFAULT_EPS_GRID, WeightConstantSpec, eps_scan,
                      extrapolate_zero, weight_constant)

JN_REFERENCE = {"A": 2.0, "B": math.log(2) / 6}
DEFAULT_DELTA_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))


def _is_line(f) -> bool:
    return isinstance(f, SampledLine)


# ----------------------------------------------------------- John-Nirenberg

@dataclass
class JNProfile:
    setting: str
    lambdas: np.ndarray
    tails: np.ndarray
    tails_negative: np.ndarray | None
    A_fit: float | None
    B_fit: float | None
    norm_used: float
    reference: dict = field(default_factory=dict)
    family_caps: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"setting": self.setting, "lambdas": self.lambdas.tolist(),
               "tails": self.tails.tolist(), "A_fit": self.A_fit, "B_fit": self.B_fit,
               "norm_used": self.norm_used, "reference": self.reference,
               "family_caps": self.family_caps}
        if self.tails_negative is not None:
            out["tails_negative"] = self.tails_negative.tolist()
        return out


def _jn_setup(f, setting: str, gamma, mode, max_m, max_k):
    if setting == "1d-lagged":
        fam = anatomy_family(f.N, ("minus", "plus", "plusplus"), mode, max_m)
        return fam, "minus", "plusplus", None, osc_norm(f, "blo-plus", mode=mode, max_m=max_m).norm
    if setting == "1d-adjacent":
        fam = anatomy_family(f.N, ("minus", "plus"), mode, max_m)
        return fam, "minus", "plus", None, osc_norm(f, "blo-plus", family=fam).norm
    if setting == "parabolic":
        fam = prect_family(f, gamma, mode, ("minus", "plus", "plusplus"), max_k)
        return fam, "minus", "plus", "plusplus", osc_norm(f, "pblo-minus", gamma=gamma, family=fam).norm
    raise GridError(f"unknown JN setting {setting!r}")


def _largest_excess(values, fam, lower, upper, later) -> float:
    top = 0.0
    for sc in fam.scales:
        thr = _blocks.block_stat(values, sc, upper, "min")
        top = max(top, float(np.max(_blocks.block_stat(values, sc, lower, "max") - thr)))
        if later:
            top = max(top, float(np.max(thr - _blocks.block_stat(values, sc, later, "min"))))
    return top


def _largest_block(fam, name, ndim) -> int:
    return max(sc.width ** (ndim - 1) * (sc.blocks[name][1] - sc.blocks[name][0])
               for sc in fam.scales)


def _tail_counts(values, sc, block, thr, lambdas, sign):
    def count(blocks, extras):
        diff = sign * (blocks[0] - extras[0][..., None])
        return np.stack([(diff > lam).mean(axis=-1) for lam in lambdas], axis=-1)
    arr = _blocks.block_apply(values, sc, [block], count, [thr])
    return arr.reshape(-1, len(lambdas)).max(axis=0)


def jn_profile(f, setting: str = "1d-lagged", lambda_grid=None, *, gamma: float | None = None,
               mode: str = "exhaustive", max_m: int | None = None, max_k: int | None = None,
               fit: bool | None = None) -> JNProfile:
    """Largest relative measure of ``{(f - min_upper f)+ > lambda}`` in the
    lower block, over the family, for every ``lambda``.

    The slab setting also records the negative-part tail on the ``plusplus``
    block.  By default ``lambda`` runs over 96 equal steps up to the largest
    excess realised on the family, where every tail vanishes.

    The exponential fit ``tails ~ A exp(-B lambda / norm)`` is a least
    squares line through the positive ``log tails``.  The first vanishing
    tail enters at the resolution floor, one cell of the largest lower block,
    so a profile that drops straight from 1 to 0 still yields a finite rate.
    """
    fam, lower, upper, later, norm = _jn_setup(f, setting, gamma, mode, max_m, max_k)
    values = np.asarray(f.values, dtype=np.float64)
    if lambda_grid is None:
        top = _largest_excess(values, fam, lower, upper, later)
        lambda_grid = (top if top > 0 else 1.0) * np.arange(1, 97) / 96
    lambdas = np.asarray(lambda_grid, dtype=np.float64)
    tails = np.zeros(lambdas.size)
    neg = np.zeros(lambdas.size) if later else None
    for sc in fam.scales:
        thr = _blocks.block_stat(values, sc, upper, "min")
        tails = np.maximum(tails, _tail_counts(values, sc, lower, thr, lambdas, 1.0))
        if later:
            neg = np.maximum(neg, _tail_counts(values, sc, later, thr, lambdas, -1.0))
    A_fit = B_fit = None
    combined = tails if neg is None else np.maximum(tails, neg)
    if fit is None:
        fit = norm > 0
    if fit:
        if not np.any(combined > 0):
            raise GridError("all tails vanish; no exponential fit possible")
        pos = np.flatnonzero(combined > 0)
        xs, ys = list(lambdas[pos] / norm), list(np.log(combined[pos]))
        if pos[-1] + 1 < lambdas.size:
            xs.append(lambdas[pos[-1] + 1] / norm)
            ys.append(-math.log(_largest_block(fam, lower, values.ndim)))
        if len(xs) >= 2:
            slope, icpt = np.polyfit(xs, ys, 1)
            A_fit, B_fit = float(math.exp(icpt)), float(-slope)
    ref = JN_REFERENCE if setting == "1d-lagged" else {}
    return JNProfile(setting, lambdas, tails, neg, A_fit, B_fit, float(norm), dict(ref), fam.caveat())


def jn_recount(f, setting: str, lambdas, *, gamma=None, mode="exhaustive", max_m=None, max_k=None):
    """Reference tails by direct cell counting per configuration."""
    fam, lower, upper, later, _ = _jn_setup(f, setting, gamma, mode, max_m, max_k)
    v = np.asarray(f.values, dtype=np.float64)
    tails = [0.0] * len(lambdas)
    neg = [0.0] * len(lambdas)
    for cfg in fam:
        boxes = cfg.boxes if hasattr(cfg, "boxes") else cfg.blocks
        low = v[boxes[lower].slices()].ravel().tolist()
        thr = float(v[boxes[upper].slices()].min())
        late = v[boxes[later].slices()].ravel().tolist() if later else None
        for i, lam in enumerate(lambdas):
            tails[i] = max(tails[i], sum(1 for u in low if u - thr > lam) / len(low))
            if late is not None:
                neg[i] = max(neg[i], sum(1 for u in late if -(u - thr) > lam) / len(late))
    return np.array(tails), (np.array(neg) if later else None)


# -------------------------------------------------------- Coifman-Rochberg

def maximal_of(g, setting: str, gamma=None, max_k=None, family=None):
    """Maximal function for the setting and the cells where it is defined.

    Line: standard left maximal function on every cell.  Slab: parabolic
    maximal function on the fully covered time slices.
    """
    if setting == "1d":
        return standard_minus_fast(np.asarray(g.values).ravel()).values, slice(None)
    full = parabolic_max_full(g, gamma, "maximal", "fast", family=family, max_k=max_k)
    sl = defined_time_range(full)
    return full[..., sl], sl


def _crop(f, sl):
    if isinstance(f, SampledLine):
        return f
    return f.with_values(np.asarray(f.values)[..., sl], t_start=sl.start or 0)


@dataclass
class PowerCheck:
    delta: float
    constant: float
    witness: dict | None
    setting: str

    def to_json(self) -> dict:
        return {"delta": self.delta, "constant": self.constant, "witness": self.witness,
                "setting": self.setting}


def cr_power_check(g, delta: float, setting: str = "1d", gamma: float | None = None,
                   max_k: int | None = None) -> PowerCheck:
    """``q = 1`` constant of ``(maximal g)^delta``."""
    if not 0 < delta < 1:
        raise GridError(f"delta must lie in (0, 1), got {delta}")
    if np.any(np.asarray(g.values) < 0):
        raise GridError("g must be nonnegative")
    mx, sl = maximal_of(g, setting, gamma, max_k)
    w = mx ** delta
    if setting == "1d":
        rep = weight_constant(g.with_values(w), WeightConstantSpec(q=1))
    else:
        rep = weight_constant(_crop(g, sl).with_values(w),
                              WeightConstantSpec(q=1, setting="parabolic", gamma=gamma, max_k=max_k))
    return PowerCheck(delta, rep.constant, rep.witness, setting)


NORMALISATION_NOTE = ("b = w / (maximal of w^(1/delta))^delta; on a line the maximal function "
                      "dominates its argument cell-wise, so sup b = 1 under this convention")


@dataclass
class CRFactorization:
    delta: float
    g: np.ndarray
    b: np.ndarray
    residual: float
    cells: object
    note: str = NORMALISATION_NOTE

    @property
    def max_b(self) -> float:
        return float(self.b.max())

    @property
    def min_b(self) -> float:
        return float(self.b.min())

    def to_json(self) -> dict:
        return {"delta": self.delta, "residual": self.residual, "max_b": self.max_b,
                "min_b": self.min_b, "note": self.note}


def cr_factor(w, delta: float, setting: str = "1d", gamma: float | None = None,
              max_k: int | None = None) -> CRFactorization:
    """Split ``w = b (maximal g)^delta`` with ``g = w^(1/delta)``.

    On a slab ``b`` lives on the covered time slices only.
    """
    v = np.asarray(w.values, dtype=np.float64)
    if np.any(v <= 0):
        raise GridError("cr_factor needs a strictly positive weight")
    with np.errstate(over="ignore"):
        g = v ** (1.0 / delta)
    if not np.all(np.isfinite(g)) or np.any(g == 0):
        raise GridError("w^(1/delta) overflows or underflows; rescale w")
    mx, sl = maximal_of(w.with_values(g), setting, gamma, max_k)
    vv = v if setting == "1d" else v[..., sl]
    b = vv / mx ** delta
    recon = b * mx ** delta
    residual = float(np.max(np.abs(recon - vv) / vv))
    return CRFactorization(delta, g, b, residual, sl)


# --------------------------------------------------------- BLO decomposition

@dataclass
class BLODecomposition:
    alpha: float
    eps: float
    delta: float
    g: np.ndarray
    b: np.ndarray
    residual: float
    star_estimate: float
    weight_constant: float
    cells: object = None

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "eps": self.eps, "delta": self.delta,
                "residual": self.residual, "star_estimate": self.star_estimate,
                "max_abs_b": float(np.max(np.abs(self.b))),
                "weight_constant": self.weight_constant}


def _exp_weight_constant(f, eps, setting, gamma, max_k):
    v = np.asarray(f.values, dtype=np.float64)
    w = f.with_values(np.exp(eps * (v - v.max())))
    spec = (WeightConstantSpec(q=1) if setting == "1d" else
            WeightConstantSpec(q=1, setting="parabolic", gamma=gamma, max_k=max_k))
    return weight_constant(w, spec).constant


def decompose_at(f, eps: float, delta: float, setting: str = "1d", gamma=None, max_k=None):
    """``f = alpha ln(maximal g) + b`` from the factorisation of ``exp(eps f)``.

    ``f`` is shifted by its maximum before exponentiating; the shift is
    returned inside ``b``.  Returns ``None`` when ``g`` under- or overflows.
    """
    v = np.asarray(f.values, dtype=np.float64)
    top = float(v.max())
    with np.errstate(over="ignore", under="ignore"):
        g = np.exp(eps * (v - top) / delta)
    if not np.all(np.isfinite(g)) or np.any(g == 0):
        return None
    mx, sl = maximal_of(f.with_values(g), setting, gamma, max_k)
    if np.any(mx <= 0):
        return None
    vv = v if setting == "1d" else v[..., sl]
    w = np.exp(eps * (vv - top))
    b_cr = w / mx ** delta
    b = np.log(b_cr) / eps + top
    alpha = delta / eps
    residual = float(np.max(np.abs(alpha * np.log(mx) + b - vv)) / max(1.0, np.max(np.abs(vv))))
    return alpha, g, b, residual, sl


def blo_decompose(f, setting: str = "1d", *, gamma: float | None = None,
                  eps_grid=DEFAULT_EPS_GRID, delta_grid=DEFAULT_DELTA_GRID,
                  cap: float = 50.0, max_k: int | None = None) -> BLODecomposition:
    """Best ``alpha + max|b|`` over the scanned ``(eps, delta)`` grid.

    Only ``eps`` whose weight ``exp(eps f)`` has constant at most ``cap`` on
    the full window are used.
    """
    best = None
    usable = False
    for eps in eps_grid:
        const = _exp_weight_constant(f, eps, setting, gamma, max_k)
        if not const <= cap:
            continue
        usable = True
        for delta in delta_grid:
            res = decompose_at(f, eps, delta, setting, gamma, max_k)
            if res is None:
                continue
            alpha, g, b, residual, sl = res
            star = alpha + float(np.max(np.abs(b)))
            if best is None or star < best.star_estimate:
                best = BLODecomposition(alpha, eps, delta, g, b, residual, star, const, sl)
    if not usable:
        raise GridError("no eps on the grid keeps the weight constant below the cap; "
                        "f is likely outside the BLO class at this resolution")
    if best is None:
        raise GridError("every factorisation under- or overflowed")
    return best


# -------------------------------------------------------------- Bennett

@dataclass
class BennettDecomposition:
    F: np.ndarray
    natural: np.ndarray
    h: np.ndarray
    max_h: float
    allowance_excess: float
    neg_min_h: float
    blo_norm: float
    upper_pass: bool
    lower_pass: bool
    note: str

    def to_json(self) -> dict:
        return {"max_h": self.max_h, "allowance_excess": self.allowance_excess,
                "neg_min_h": self.neg_min_h, "blo_norm": self.blo_norm,
                "upper_pass": self.upper_pass, "lower_pass": self.lower_pass, "note": self.note}


BENNETT_NOTE = ("upper bound uses the adjacent-jump allowance in place of the Lebesgue-point "
                "step; lower bound -min h <= blo norm holds exactly on the shared family")


def _parabolic_allowance(f: SampledSlab, fam) -> np.ndarray:
    """Per cell, ``sum_axis J_axis D_axis`` for the cheapest covering scale.

    ``J_axis`` is the largest jump between neighbouring cells along an axis
    and ``D_axis`` the largest index distance between a ``minus`` cell and a
    ``plus`` cell of the rectangle (``2k - 1`` in space, ``2T - 1`` in time).
    """
    v = np.asarray(f.values)
    jumps = [float(np.max(np.abs(np.diff(v, axis=a)))) if v.shape[a] > 1 else 0.0
             for a in range(v.ndim)]
    allow = np.full(v.shape, np.inf)
    for sc in fam.scales:
        k, T = sc.params["k"], sc.params["T"]
        bound = sum(jumps[a] * (2 * k - 1) for a in range(v.ndim - 1)) + jumps[-1] * (2 * T - 1)
        ones = np.ones(tuple(d - sc.width + 1 for d in v.shape[:-1]) + (sc.n_anchors(),))
        cover = _blocks.scatter_max(ones, sc, "plus", v.shape)
        allow = np.where(cover > 0, np.minimum(allow, bound), allow)
    return allow


def bennett_decompose(f, setting: str = "1d", *, gamma: float | None = None,
                      mode: str = "exhaustive", max_m: int | None = None,
                      max_k: int | None = None, slack: float = 1e-9) -> BennettDecomposition:
    """``f = natural(F) + h`` with ``F = f``.

    Line: anatomies with ``I`` inside the window, shared with ``blo-plus``.
    Slab: rectangles with room for their ``plusplus`` block, shared with
    ``pblo-minus``.  The bound checks are ``h <= allowance`` cell-wise and
    ``-min h <= norm``.
    """
    v = np.asarray(f.values, dtype=np.float64)
    if setting == "1d":
        res = onesided_max_full(f, "natural-minus", "fast", mode, None if max_m is None else 2 * max_m)
        nat = res.values
        ok = np.isfinite(nat)
        h = np.where(ok, v - nat, np.nan)
        fam = anatomy_family(f.N, ("minus", "plus"), mode, max_m)
        norm = osc_norm(f, "blo-plus", family=fam).norm
        allowance = np.full(v.shape, float(np.max(np.abs(np.diff(v)))))
    elif setting == "parabolic":
        fam = prect_family(f, gamma, mode, ("minus", "plus", "plusplus"), max_k)
        nat = parabolic_max_full(f, gamma, "natural", "fast", family=fam)
        ok = np.isfinite(nat)
        h = np.where(ok, v - nat, np.nan)
        norm = osc_norm(f, "pblo-minus", gamma=gamma, family=fam).norm
        allowance = _parabolic_allowance(f, fam)
    else:
        raise GridError(f"unknown setting {setting!r}")
    hv = h[ok]
    excess = float(np.max(hv - allowance[ok]))
    neg_min = float(-hv.min())
    scale = max(1.0, float(np.max(np.abs(v))))
    return BennettDecomposition(v, nat, h, float(hv.max()), excess, neg_min, norm,
                                excess <= slack * scale, neg_min <= norm + slack * scale,
                                BENNETT_NOTE)


# ------------------------------------------------------- distance to L-inf

@dataclass
class DistanceReport:
    eps_route: float
    alpha_route: float
    alpha_best: float
    gap: float
    eps_scan: dict
    alpha_scan: dict
    note: str

    def to_json(self) -> dict:
        return {"eps_route": self.eps_route, "alpha_route": self.alpha_route,
                "alpha_best": self.alpha_best, "gap": self.gap, "eps_scan": self.eps_scan,
                "alpha_scan": self.alpha_scan, "note": self.note}


DISTANCE_NOTE = ("eps_route is the critical exponent of exp(eps f); alpha_route is 1/alpha* "
                 "where alpha* is the smallest multiple alpha for which f - alpha ln M(g) "
                 "stays bounded; both are in exponent units")


def alpha_scan(f, delta: float = 0.5, eps_grid=None, levels: int = 5,
               threshold: float = 0.25) -> dict:
    """Growth of ``max|b|`` of ``f = alpha ln M-(g) + b`` along the window ladder.

    For each ``alpha = delta / eps`` the rate is the change of ``max|b|``
    per unit of ``log(window size)`` between the two largest leading
    windows.  Decompositions whose rate exceeds ``threshold`` are unbounded;
    the rate falls linearly to zero at the critical ``alpha``, which is
    estimated by extrapolating the unbounded points nearest the crossing.
    """
    if eps_grid is None:
        eps_grid = tuple(2.0 ** (k / 4) for k in range(-24, 25))
    v = np.asarray(f.values, dtype=np.float64)
    sizes = [v.size >> j for j in range(levels) if (v.size >> j) >= 2]
    rows = []
    for eps in eps_grid:
        res = decompose_at(f, eps, delta, "1d")
        alpha = delta / eps
        if res is None:
            rows.append((alpha, math.inf))
            continue
        b = np.abs(res[2] - v.max())
        tops = [float(b[:s].max()) for s in sizes]
        rate = (tops[0] - tops[1]) / math.log(sizes[0] / sizes[1])
        rows.append((alpha, rate))
    rows.sort()
    unbounded = [(a, r) for a, r in rows if r > threshold]
    bounded = [(a, r) for a, r in rows if r <= threshold]
    if not unbounded:
        crit = 0.0
    else:
        edge = max(a for a, _ in unbounded)
        above = [a for a, _ in bounded if a > edge]
        crit = min(above) if above else math.inf
        pts = [(a, r) for a, r in unbounded if math.isfinite(r)][-3:]
        if len(pts) >= 2 and math.isfinite(crit):
            slope, icpt = np.polyfit([a for a, _ in pts], [r for _, r in pts], 1)
            if slope < 0:
                crit = min(max(-icpt / slope, edge), crit)
    return {"delta": delta, "alphas": [a for a, _ in rows], "rates": [r for _, r in rows],
            "threshold": threshold, "alpha_critical": crit}


def dist_to_linfty(f, setting: str = "1d", eps_grid=DEFAULT_EPS_GRID, levels: int = 5,
                   delta: float = 0.5) -> DistanceReport:
    """Two independent estimates of the critical exponent of ``f``."""
    if setting != "1d":
        raise GridError("distance estimation is implemented on lines")
    scan = eps_scan(f, "1d", eps_grid, levels)
    ascan = alpha_scan(f, delta, levels=levels)
    a = ascan["alpha_critical"]
    alpha_route = math.inf if a == 0 else 1.0 / a
    e = scan.critical_eps
    gap = 0.0 if (math.isinf(e) and math.isinf(alpha_route)) else abs(e - alpha_route)
    return DistanceReport(e, alpha_route, a, gap, scan.to_json(), ascan, DISTANCE_NOTE)


def verify_split(f, g, h, slack: float = 1e-9) -> dict:
    """Verify ``f = g + h`` and the subadditivity ``bmo(f) <= bmo(g) + bmo(h)``."""
    fv, gv, hv = (np.asarray(x.values, dtype=np.float64) for x in (f, g, h))
    recon = float(np.max(np.abs(gv + hv - fv)))
    nf = osc_norm(f, "bmo-plus").norm
    ng = osc_norm(g, "bmo-plus").norm
    nh = osc_norm(h, "bmo-plus").norm
    return {"reconstruction": recon, "bmo_f": nf, "bmo_g": ng, "bmo_h": nh,
            "blo_g": osc_norm(g, "blo-plus").norm, "blo_h": osc_norm(h, "blo-plus").norm,
            "pass": recon <= slack * max(1.0, float(np.max(np.abs(fv))))
            and nf <= (ng + nh) * (1 + slack) + slack}
