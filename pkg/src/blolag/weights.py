"""One-sided and parabolic Muckenhoupt constants and the log/exp bridges."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _blocks
from .geometry import Family, gap_pair_family, prect_family
from .grid import GridError, SampledLine, SampledSlab
from .maximal import standard_minus_fast
from .oscillation import config_to_json, osc_norm

BRIDGE_SLACK = 1e-9


@dataclass(frozen=True)
class WeightConstantSpec:
    """``q`` in ``[1, inf]``; ``gapped`` is the lag of the gapped 1D form
    (``None`` for adjacent).  ``setting`` is ``"1d"`` or ``"parabolic"``;
    parabolic specs use ``gamma`` and, with ``tau``, the translate ``S+`` as
    the right block."""

    q: float = 1.0
    gapped: float | None = None
    setting: str = "1d"
    gamma: float | None = None
    tau: float | None = None
    mode: str = "exhaustive"
    max_m: int | None = None
    max_k: int | None = None

    def __post_init__(self):
        if not self.q >= 1:
            raise GridError(f"q must be at least 1, got {self.q}")
        if self.setting not in ("1d", "parabolic"):
            raise GridError(f"unknown setting {self.setting!r}")
        if self.setting == "parabolic" and self.gamma is None:
            raise GridError("parabolic weight constants need gamma")


@dataclass
class WeightReport:
    q: float
    gapped: float | None
    constant: float
    witness: dict | None
    family_caps: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"q": self.q, "gapped": self.gapped, "constant": self.constant,
                "witness": self.witness, "family_caps": self.family_caps}


@dataclass
class BridgeReport:
    direction: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"direction": self.direction, "lhs": self.lhs, "rhs": self.rhs,
                "slack": self.slack, "pass": self.passed, **self.details}


def _check_weight(w) -> np.ndarray:
    v = np.asarray(w.values if hasattr(w, "values") else w, dtype=np.float64)
    if np.any(v < 0):
        raise GridError(f"weight is negative at cell {int(np.flatnonzero(v.ravel() < 0)[0])}")
    return v


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """``num / den`` with ``0/0 -> 0`` and ``x/0 -> inf``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / den
    r = np.where(num == 0, 0.0, r)
    return np.where((den == 0) & (num > 0), np.inf, r)


def _pair_functional(v: np.ndarray, sc, left: str, right: str, q: float) -> np.ndarray:
    num = _blocks.block_stat(v, sc, left, "mean")
    if q == 1:
        return _ratio(num, _blocks.block_stat(v, sc, right, "min"))
    with np.errstate(divide="ignore", over="ignore"):
        if math.isinf(q):
            logs = -np.log(v)
            rmean = _blocks.block_stat(np.where(np.isinf(logs), np.inf, logs), sc, right, "mean")
            factor = np.exp(rmean)
        else:
            dual = v ** (1.0 / (1.0 - q))
            factor = _blocks.block_stat(dual, sc, right, "mean") ** (q - 1.0)
    with np.errstate(invalid="ignore"):
        out = num * factor
    return np.where(num == 0, 0.0, np.where(np.isnan(out), np.inf, out))


def pair_family(w, spec: WeightConstantSpec) -> tuple[Family, str, str]:
    if spec.setting == "parabolic":
        if not isinstance(w, SampledSlab):
            raise GridError("parabolic constants need a slab")
        if spec.tau is not None:
            fam = prect_family(w, spec.gamma, spec.mode, ("minus",), spec.max_k, tau=spec.tau)
            return fam, "minus", "S+"
        return prect_family(w, spec.gamma, spec.mode, ("minus", "plus"), spec.max_k), "minus", "plus"
    n = w.N if isinstance(w, SampledLine) else np.asarray(w).size
    gamma = 0.5 if spec.gapped is None else spec.gapped
    return gap_pair_family(n, gamma, spec.mode, spec.max_m), "left", "right"


def weight_constant(w, spec: WeightConstantSpec | None = None, **kw) -> WeightReport:
    """Muckenhoupt-type constant of ``w`` with the witnessing configuration.

    The adjacent ``q = 1`` constant on a line is ``sup M-(w)/w`` with the
    standard left maximal function over all windows inside the data window;
    every other form is a supremum over a pair family.
    """
    spec = spec or WeightConstantSpec(**kw)
    v = _check_weight(w)
    if spec.setting == "1d" and spec.q == 1 and spec.gapped is None:
        mx = standard_minus_fast(v.ravel())
        ratio = _ratio(mx.values, v.ravel())
        i = int(np.argmax(ratio))
        witness = {"cell": i, "window": [int(mx.start[i]), int(mx.length[i])]}
        return WeightReport(1.0, None, float(ratio[i]), witness,
                            {"family": "suffix-windows", "max_len": int(v.size)})
    fam, left, right = pair_family(w, spec)
    best, arg = -np.inf, None
    for sc in fam.scales:
        vals = _pair_functional(v, sc, left, right, spec.q)
        i = int(np.argmax(vals))
        if vals.flat[i] > best:
            best = float(vals.flat[i])
            idx = np.unravel_index(i, vals.shape)
            arg = (sc, tuple(int(t) for t in idx[:-1]), sc.anchors[0] + int(idx[-1]))
    witness = config_to_json(fam.config(*arg))
    return WeightReport(spec.q, spec.gapped, best, witness, fam.caveat())


def sandwich_check(w, gamma: float, slack: float = BRIDGE_SLACK,
                   constants: dict | None = None) -> dict:
    """Compare the adjacent and gapped ``q = 1`` constants.

    Checks ``adjacent <= gapped`` and ``gapped <= adjacent / gamma_eff`` with
    the smallest ``gamma_eff`` of the gapped family.  ``constants`` may
    override the computed values (used to exercise the failure path).
    """
    adj = weight_constant(w, WeightConstantSpec(q=1)).constant
    rep = weight_constant(w, WeightConstantSpec(q=1, gapped=gamma))
    gap = rep.constant
    if constants:
        adj = constants.get("adjacent", adj)
        gap = constants.get("gapped", gap)
    geff = rep.family_caps["min_gamma_eff"]
    lower = adj <= gap * (1 + slack)
    upper = gap <= adj / geff * (1 + slack)
    violated = [name for name, ok in (("adjacent <= gapped", lower),
                                      ("gapped <= adjacent/gamma_eff", upper)) if not ok]
    return {"adjacent": adj, "gapped": gap, "gamma_eff": geff,
            "lower_pass": lower, "upper_pass": upper, "violated": violated}


# ------------------------------------------------------------------ bridges

def bridge_check(w, setting: str = "1d", gamma: float | None = None,
                 mode: str = "exhaustive", max_m: int | None = None,
                 max_k: int | None = None, slack: float = BRIDGE_SLACK) -> BridgeReport:
    """Logarithmic bridge between a weight and the BLO-type norm of its log.

    Line: ``blo-plus(ln w) <= ln(1 + 2 [w])`` with the adjacent ``q = 1``
    constant.  Slab: ``pblo-minus(ln w) <= 2 ln(1 + [w](gamma))`` where the
    constant runs over rectangles needing only their ``minus`` and ``plus``
    blocks; that family contains every shifted rectangle used by the
    right-hand side argument, for the same half-edges as the norm family.
    """
    v = _check_weight(w)
    if np.any(v <= 0):
        raise GridError("bridge check needs a strictly positive weight")
    logw = w.with_values(np.log(v)) if isinstance(w, SampledLine) else w.with_values(np.log(v))
    if setting == "1d":
        norm = osc_norm(logw, "blo-plus", mode=mode, max_m=max_m)
        const = weight_constant(w, WeightConstantSpec(q=1)).constant
        rhs = math.log1p(2 * const)
    elif setting == "parabolic":
        norm = osc_norm(logw, "pblo-minus", gamma=gamma, mode=mode, max_k=max_k)
        const = weight_constant(w, WeightConstantSpec(q=1, setting="parabolic", gamma=gamma,
                                                      mode=norm.family_caps["mode"],
                                                      max_k=norm.family_caps["max_k"])).constant
        rhs = 2 * math.log1p(const)
    else:
        raise GridError(f"unknown setting {setting!r}")
    lhs = norm.norm
    return BridgeReport("log", lhs, rhs, slack, bool(lhs <= rhs * (1 + slack)),
                        {"constant": const, "family_caps": norm.family_caps})


def exp_bridge(f, eps: float, setting: str = "1d", gamma: float | None = None,
               cap: float = 1e6, **kw) -> BridgeReport:
    """Membership of ``exp(eps f)`` at this resolution: its ``q = 1``
    constant against the configured cap."""
    spec = (WeightConstantSpec(q=1) if setting == "1d"
            else WeightConstantSpec(q=1, setting="parabolic", gamma=gamma, **kw))
    w = f.with_values(np.exp(eps * (f.values - np.max(f.values))))
    const = weight_constant(w, spec).constant
    return BridgeReport("exp", const, cap, 0.0, bool(const <= cap), {"eps": eps})


# ------------------------------------------------------------------ eps scan

DEFAULT_EPS_GRID = tuple(2.0 ** k for k in range(-6, 7))


@dataclass
class EpsScan:
    eps: list
    window_sizes: list
    constants: np.ndarray
    slopes: list
    threshold: float
    critical_eps_grid: float
    critical_eps: float
    label: str

    def to_json(self) -> dict:
        return {"eps": self.eps, "window_sizes": self.window_sizes,
                "constants": self.constants.tolist(), "slopes": self.slopes,
                "threshold": self.threshold, "critical_eps_grid": self.critical_eps_grid,
                "critical_eps": self.critical_eps, "label": self.label}

    def curve_rows(self):
        for i, e in enumerate(self.eps):
            for j, size in enumerate(self.window_sizes):
                yield e, size, float(self.constants[i, j])


def _window_ladder(n: int, levels: int) -> list[int]:
    sizes = []
    for j in range(levels):
        size = n >> j
        if size >= 2:
            sizes.append(size)
    return sizes


def _growth_slopes(sizes, consts) -> float:
    """Log-log slope of the constant between the two largest windows."""
    c0, c1 = consts[0], consts[1]
    if not (np.isfinite(c0) and np.isfinite(c1)) or c1 <= 0:
        return math.inf
    return math.log(c0 / c1) / math.log(sizes[0] / sizes[1])


def extrapolate_zero(xs, ys) -> float:
    """Root of the least-squares line through ``(xs, ys)``."""
    slope, intercept = np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)
    if slope <= 0:
        return math.nan
    return -intercept / slope


def eps_scan(f, setting: str = "1d", eps_grid=DEFAULT_EPS_GRID, levels: int = 5,
             threshold: float = 0.5, gamma: float | None = None,
             max_k: int | None = None) -> EpsScan:
    """``q = 1`` constants of ``exp(eps f)`` on a ladder of leading windows.

    The windows are the leading ``N / 2^j`` cells of the line (leading
    spatial and time halves of a slab).  A curve *diverges* when the log-log
    slope between the two largest windows exceeds ``threshold``.  The grid
    estimate is the smallest diverging ``eps``.  Since the growth exponent
    rises linearly past the critical value, the refined estimate extrapolates
    the slopes of the first diverging grid points to zero, clipped to the
    grid interval that brackets the crossing.
    """
    eps = [float(e) for e in eps_grid]
    if any(b <= a for a, b in zip(eps, eps[1:])):
        raise GridError("eps grid must be increasing")
    vals = np.asarray(f.values, dtype=np.float64)
    shifted = vals - vals.max()
    if setting == "1d":
        sizes = _window_ladder(vals.size, levels)
    else:
        sizes = _window_ladder(min(vals.shape[:-1]), levels)
    consts = np.full((len(eps), len(sizes)), np.nan)
    for i, e in enumerate(eps):
        w = np.exp(e * shifted)
        if setting == "1d":
            mx = standard_minus_fast(w)
            ratio = _ratio(mx.values, w)
            for j, size in enumerate(sizes):
                consts[i, j] = ratio[:size].max()
        else:
            for j, size in enumerate(sizes):
                tlen = max(2, vals.shape[-1] * size // min(vals.shape[:-1]))
                sub = w[(slice(0, size),) * (vals.ndim - 1) + (slice(0, tlen),)]
                try:
                    rep = weight_constant(f.with_values(sub), WeightConstantSpec(
                        q=1, setting="parabolic", gamma=gamma, max_k=max_k))
                    consts[i, j] = rep.constant
                except GridError:
                    consts[i, j] = np.nan
    slopes = []
    for i in range(len(eps)):
        row = consts[i]
        ok = np.isfinite(row)
        slopes.append(_growth_slopes(sizes, row) if ok[:2].all() and len(sizes) > 1 else math.inf)
    diverging = [i for i, s in enumerate(slopes) if s > threshold]
    if not diverging:
        return EpsScan(eps, sizes, consts, slopes, threshold, math.inf, math.inf,
                       "inf (constants plateau)")
    first = diverging[0]
    grid_est = eps[first]
    refined = grid_est
    pts = [i for i in diverging[:3] if math.isfinite(slopes[i])]
    if len(pts) >= 2:
        root = extrapolate_zero([eps[i] for i in pts], [slopes[i] for i in pts])
        lower = eps[first - 1] if first > 0 else 0.0
        if math.isfinite(root):
            refined = min(max(root, lower), grid_est)
    return EpsScan(eps, sizes, consts, slopes, threshold, grid_est, refined, "finite")


def onesided_q1_naive(w: np.ndarray) -> float:
    """``sup M-(w)/w`` by direct enumeration of all windows (reference)."""
    v = [float(t) for t in w]
    best = 0.0
    for x in range(len(v)):
        m = max(sum(v[s:x + 1]) / (x + 1 - s) for s in range(x + 1))
        if v[x] == 0:
            if m > 0:
                return math.inf
            continue
        best = max(best, m / v[x])
    return best
