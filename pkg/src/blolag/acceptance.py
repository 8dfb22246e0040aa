"""Acceptance checks shared by ``selftest`` and the test suite.

Each check returns one or more :class:`Outcome` rows; a row carries the
numbers behind its verdict so reports can be compared byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import corpus, decomp, porosity
from .geometry import IndexBox, check_dyadic, dyadic_decompose
from .grid import SampledLine, SampledSlab
from .maximal import (KINDS_1D, MaxVariant1D, onesided_max, onesided_max_full,
                      parabolic_max, parabolic_max_full, variant_family)
from .oscillation import osc_norm
from .weights import bridge_check, sandwich_check

SLACK = 1e-9
EXACT_REL = 1e-12
ENVELOPE = 100.0
CR_BOUND = 4.0 * 1.05
STABILITY = 0.10
GAMMAS_SANDWICH = (0.1, 0.25, 0.5)


@dataclass
class Outcome:
    criterion: int
    label: str
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.criterion:>2} {self.label}"

    def to_json(self) -> dict:
        return {"criterion": self.criterion, "label": self.label, "pass": self.passed,
                "details": self.details}


def _scale(v) -> float:
    return max(1.0, float(np.nanmax(np.abs(v))))


# ---------------------------------------------------------------- 1

def kinked_line() -> SampledLine:
    return SampledLine.from_function(corpus.kinked_profile, -10.0, 10.0, 2000)


def kinked_closed_form(x):
    x = np.asarray(x, dtype=np.float64)
    safe = np.where(x > 0, x, 1.0)
    return np.where(x <= 0, 1.0, np.where(x < math.sqrt(2), safe + 2 / safe, 2 * x))


def truncated_window_oracle(line: SampledLine) -> np.ndarray:
    """Largest mean of the profile's absolute value over ``(a, right edge]``
    for cell-aligned ``a`` inside the window, by exact antiderivatives."""
    edges = line.x0 + line.h * np.arange(line.N + 1)
    prim = corpus.kinked_profile_abs_antiderivative(edges)
    right = np.arange(1, line.N + 1)[:, None]
    left = np.arange(line.N)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        means = (prim[right] - prim[left]) / (edges[right] - edges[left])
    means = np.where(left < right, means, -np.inf)
    return means.max(axis=1)


def check_closed_form() -> list[Outcome]:
    f = kinked_line()
    mx = onesided_max_full(f, "standard-minus").values
    x = f.centers()
    target = kinked_closed_form(x)
    rel = np.abs(mx - target) / np.abs(target)
    worst = int(np.argmax(rel))
    oracle = truncated_window_oracle(f)
    orel = float(np.max(np.abs(mx - oracle) / oracle))
    blo = osc_norm(f, "blo-plus").norm
    bmo = osc_norm(f, "bmo-plus").norm
    bmo_max = osc_norm(f.with_values(mx), "bmo-plus").norm
    return [
        Outcome(1, "standard-minus matches the closed form within 2%", bool(rel.max() <= 0.02),
                {"max_rel_err": float(rel.max()), "at_x": float(x[worst]),
                 "computed": float(mx[worst]), "closed_form": float(target[worst])}),
        Outcome(1, "standard-minus matches the truncated-window quadrature within 2%",
                bool(orel <= 0.02), {"max_rel_err": orel}),
        Outcome(1, "norms of the increasing profile vanish and bmo-plus of its maximal "
                   "function exceeds 0.01", bool(blo == 0.0 and bmo == 0.0 and bmo_max > 0.01),
                {"blo_plus": blo, "bmo_plus": bmo, "bmo_plus_of_maximal": bmo_max}),
    ]


# ---------------------------------------------------------------- 2

def check_sandwich() -> list[Outcome]:
    fs = corpus.line_functions()
    ws = corpus.line_weights()
    up_ok = lo_ok = w_up = w_lo = True
    worst_up, worst_lo = 0.0, 0.0
    lo_fail = []
    for gamma in GAMMAS_SANDWICH:
        v = MaxVariant1D("gapped-minus", gamma)
        geff = variant_family(corpus.LINE_CELLS, v)[0].caps["min_gamma_eff"]
        for name, f in fs.items():
            std = onesided_max_full(f, "standard-minus").values
            gap = onesided_max_full(f, v).values
            ok = np.isfinite(gap)
            sc = _scale(f.values)
            up = float(np.max(gap[ok] - std[ok] / geff))
            lo = float(np.max(std[ok] - gap[ok]))
            worst_up, worst_lo = max(worst_up, up / sc), max(worst_lo, lo / sc)
            up_ok &= up <= SLACK * sc
            if lo > SLACK * sc:
                lo_ok = False
                lo_fail.append(f"{name}@{gamma}")
        for name, w in ws.items():
            s = sandwich_check(w, gamma, SLACK)
            w_up &= s["upper_pass"]
            w_lo &= s["lower_pass"]
    return [
        Outcome(2, "gapped maximal <= standard / gamma_eff and gapped constant <= adjacent / gamma_eff",
                bool(up_ok and w_up), {"max_excess": worst_up, "weights_pass": bool(w_up)}),
        Outcome(2, "standard maximal <= gapped maximal and adjacent constant <= gapped constant",
                bool(lo_ok and w_lo), {"max_excess": worst_lo, "weights_pass": bool(w_lo),
                                       "maximal_failures": len(lo_fail)}),
    ]


# ---------------------------------------------------------------- 3

def check_log_bridges() -> list[Outcome]:
    worst = -math.inf
    ok = True
    for w in corpus.line_weights().values():
        r = bridge_check(w, "1d", slack=SLACK)
        ok &= r.passed
        worst = max(worst, r.lhs - r.rhs)
    pworst = -math.inf
    pok = True
    for name, w in corpus.slab_weights().items():
        r = bridge_check(w, "parabolic", 0.25, slack=SLACK)
        pok &= r.passed
        pworst = max(pworst, r.lhs - r.rhs)
    u = SampledSlab.from_function(lambda x, t: np.exp(x + t), 2.0, (0.0, 1.0), (0.0, 1.0), (16, 256))
    r = bridge_check(u, "parabolic", 0.25, slack=SLACK)
    return [
        Outcome(3, "line log bridge on the weight corpus", bool(ok), {"max_lhs_minus_rhs": worst}),
        Outcome(3, "slab log bridge on the weight corpus and exp(x+t)", bool(pok and r.passed),
                {"max_lhs_minus_rhs": pworst, "exp_lhs": r.lhs, "exp_rhs": r.rhs}),
    ]


# ---------------------------------------------------------------- 4

def check_bennett() -> list[Outcome]:
    ok, worst_lo, worst_up = True, -math.inf, -math.inf
    for f in corpus.line_functions().values():
        b = decomp.bennett_decompose(f, slack=SLACK)
        ok &= b.upper_pass and b.lower_pass
        worst_lo = max(worst_lo, b.neg_min_h - b.blo_norm)
        worst_up = max(worst_up, b.allowance_excess)
    pok, pworst_lo, pworst_up = True, -math.inf, -math.inf
    for f in corpus.slab_functions().values():
        b = decomp.bennett_decompose(f, "parabolic", gamma=0.25, slack=SLACK)
        pok &= b.upper_pass and b.lower_pass
        pworst_lo = max(pworst_lo, b.neg_min_h - b.blo_norm)
        pworst_up = max(pworst_up, b.allowance_excess)
    return [
        Outcome(4, "line Bennett bounds", bool(ok),
                {"max_lower_excess": worst_lo, "max_upper_excess": worst_up}),
        Outcome(4, "slab Bennett bounds", bool(pok),
                {"max_lower_excess": pworst_lo, "max_upper_excess": pworst_up}),
    ]


# ---------------------------------------------------------------- 5

def check_natural_envelope() -> list[Outcome]:
    ok, worst = True, 0.0
    for f in corpus.line_functions().values():
        nat = onesided_max(f, "natural-minus")
        lhs = osc_norm(nat, "blo-plus").norm
        rhs = osc_norm(f, "bmo-plus").norm
        ok &= lhs <= ENVELOPE * rhs + SLACK * _scale(f.values)
        if rhs > 0:
            worst = max(worst, lhs / rhs)
    pok, pworst = True, 0.0
    for f in corpus.slab_functions().values():
        nat = parabolic_max(f, 0.25, "natural")
        lhs = osc_norm(nat, "pblo-minus", gamma=0.25).norm
        rhs = osc_norm(f, "pbmo-minus", gamma=0.25).norm
        pok &= lhs <= ENVELOPE * rhs + SLACK * _scale(f.values)
        if rhs > 0:
            pworst = max(pworst, lhs / rhs)
    return [Outcome(5, "natural maximal functions stay inside the factor-100 envelope",
                    bool(ok and pok), {"line_max_ratio": worst, "slab_max_ratio": pworst})]


# ---------------------------------------------------------------- 6

def _coarse(f: SampledLine, cells: int = 64) -> SampledLine:
    return SampledLine.from_function(lambda x: np.interp(x, f.centers(), f.values),
                                     f.x0, f.x0 + f.N * f.h, cells)


NULL_LINE = ("increasing", "step-up", "sqrt")


def check_jn() -> list[Outcome]:
    fs = corpus.line_functions()
    equal = True
    for f in fs.values():
        g = _coarse(f)
        for setting in ("1d-lagged", "1d-adjacent"):
            prof = decomp.jn_profile(g, setting, fit=False)
            lam = prof.lambdas[::8]
            fast = decomp.jn_profile(g, setting, lam, fit=False).tails
            slow, _ = decomp.jn_recount(g, setting, lam)
            equal &= bool(np.array_equal(fast, slow))
    small = SampledSlab.from_function(lambda x, t: np.sin(5 * x) - t * x + np.cos(9 * t), 2.0,
                                      (0.0, 1.0), (0.0, 1.0), (8, 128))
    prof = decomp.jn_profile(small, "parabolic", gamma=0.25, fit=False)
    lam = prof.lambdas[::8]
    fast = decomp.jn_profile(small, "parabolic", lam, gamma=0.25, fit=False)
    slow, slow_neg = decomp.jn_recount(small, "parabolic", lam, gamma=0.25)
    equal &= bool(np.array_equal(fast.tails, slow) and np.array_equal(fast.tails_negative, slow_neg))
    fits_ok, bad = True, []
    for name, f in fs.items():
        for setting in ("1d-lagged", "1d-adjacent"):
            prof = decomp.jn_profile(f, setting, fit=False)
            if prof.norm_used > 0:
                prof = decomp.jn_profile(f, setting)
                if not (prof.B_fit is not None and prof.B_fit > 0):
                    fits_ok = False
                    bad.append(f"{name}/{setting}")
    for name, f in corpus.slab_functions().items():
        prof = decomp.jn_profile(f, "parabolic", gamma=0.25, fit=False)
        if prof.norm_used > 0:
            prof = decomp.jn_profile(f, "parabolic", gamma=0.25)
            if not (prof.B_fit is not None and prof.B_fit > 0):
                fits_ok = False
                bad.append(f"{name}/parabolic")
    null_ok = True
    for name in NULL_LINE:
        for setting in ("1d-lagged", "1d-adjacent"):
            null_ok &= not np.any(decomp.jn_profile(fs[name], setting, fit=False).tails)
    inc = corpus.slab_functions()["quadratic-heat"].with_values(
        np.broadcast_to(np.linspace(0, 1, corpus.SLAB_DIMS[1]), corpus.SLAB_DIMS))
    p = decomp.jn_profile(inc, "parabolic", gamma=0.25, fit=False)
    null_ok &= not np.any(p.tails) and not np.any(p.tails_negative)
    return [
        Outcome(6, "level-set tails equal the direct recount", equal, {}),
        Outcome(6, "exponential fits have positive decay rate", fits_ok, {"failures": bad}),
        Outcome(6, "null-space inputs have vanishing tails", bool(null_ok), {}),
    ]


# ---------------------------------------------------------------- 7

def _indicator_slab(dims) -> SampledSlab:
    # the floor keeps the maximal function positive where capped rectangles
    # cannot reach the box
    return SampledSlab.from_function(
        lambda x, t: 0.25 + ((np.abs(x - 0.5) < 0.25) & (t < 0.25)),
        2.0, (0.0, 1.0), (0.0, 1.0), dims)


def check_coifman_rochberg() -> list[Outcome]:
    res_ok, b_ok, worst_res, worst_b = True, True, 0.0, 0.0
    for w in corpus.line_weights().values():
        for delta in (0.25, 0.5, 0.75):
            c = decomp.cr_factor(w, delta)
            res_ok &= c.residual <= 1e-12
            b_ok &= c.min_b > 0 and c.max_b <= 1 + 1e-12
            worst_res = max(worst_res, c.residual)
            worst_b = max(worst_b, c.max_b)
    best = {}
    for name, g in corpus.indicators().items():
        best[name] = min(decomp.cr_power_check(g, d).constant for d in decomp.DEFAULT_DELTA_GRID)
    scan_ok = all(v <= CR_BOUND for v in best.values())
    coarse = decomp.cr_power_check(_indicator_slab((8, 64)), 0.5, "parabolic", 0.25).constant
    fine = decomp.cr_power_check(_indicator_slab((16, 256)), 0.5, "parabolic", 0.25).constant
    drift = abs(fine - coarse) / coarse
    return [
        Outcome(7, "factorisation residual below 1e-12 with b in (0, 1]", bool(res_ok and b_ok),
                {"max_residual": worst_res, "max_b": worst_b}),
        Outcome(7, "some delta gives a power constant within 4 * 1.05 on every indicator",
                bool(scan_ok), {"best_constant": best}),
        Outcome(7, "slab power constant stable within 10% under refinement", bool(drift <= STABILITY),
                {"coarse": coarse, "fine": fine, "drift": drift}),
    ]


# ---------------------------------------------------------------- 8

def dyadic_block(n: int, p: float, gamma: float, depth: int) -> tuple[IndexBox, float, float]:
    """Future block of a rectangle with half-edge ``2^(depth-1)`` and enough
    cells for every node down to ``depth``."""
    parts = math.ceil(2 ** p)
    L = 2.0 ** (depth - 1)
    tcells = 2 * parts ** depth
    ht = (1 - gamma) * L ** p / tcells
    return IndexBox((0,) * (n + 1), (2 ** depth,) * n + (tcells,)), 1.0, ht


def check_dyadic_trees() -> list[Outcome]:
    ok, counts_ok, rows = True, True, {}
    for n in (1, 2):
        for p in (1.5, 2.0, 3.0):
            depth = 3 if (n == 2 and p == 3.0) else 4
            for gamma in (0.0, 0.25, 0.5):
                block, hx, ht = dyadic_block(n, p, gamma, depth)
                root = dyadic_decompose(block, p, gamma, depth, hx=hx, ht=ht)
                res = check_dyadic(root, p, n)
                ok &= all(res.values())
                if p == 2.0:
                    counts_ok &= all(len(nd.children) == 2 ** n * 4
                                     for nd in root.walk() if nd.children)
                rows[f"n={n},p={p},gamma={gamma},depth={depth}"] = all(res.values())
    return [Outcome(8, "dyadic trees satisfy D0-D4 and p=2 nodes have 2^n*4 children",
                    bool(ok and counts_ok), {"cases": rows})]


# ---------------------------------------------------------------- 9

def slab_times_window() -> SampledSlab:
    return porosity.window(2.0, (0.0, 2.0), (-6.0, 6.0), (16, 768))


def check_porosity() -> list[Outcome]:
    E = porosity.SetModel.slabs(1, porosity.binary_slab_times(-7.0, 7.0))
    cert = porosity.fit_porosity_check(E, 0.25, slab_times_window())
    v1 = porosity.validate_certificate(cert, E)
    found = any(c >= 0.25 and d >= 0.125 for c, d in cert.valid_pairs())
    g = porosity.window(2.0, (0.0, 2.0), (-1.0, 1.0), (16, 128))
    box = porosity.SetModel.box([0.5], [1.5], -0.5, 0.5)
    cb = porosity.fit_porosity_check(box, 0.25, g)
    v2 = porosity.validate_certificate(cb, box)
    pt = porosity.SetModel.points([[1.0, 0.0]])
    cp = porosity.fit_porosity_check(pt, 0.25, g)
    v3 = porosity.validate_certificate(cp, pt)
    return [
        Outcome(9, "slab family certifies porous with c >= 1/4 and delta >= 1/8",
                bool(cert.porous and found), {"c": cert.c, "delta": cert.delta,
                                              "table": [list(r) for r in cert.table]}),
        Outcome(9, "positive-measure box fails certification", not cb.porous, {"failure": cb.failure}),
        Outcome(9, "single point certifies porous", bool(cp.porous), {"c": cp.c, "delta": cp.delta}),
        Outcome(9, "every certificate passes the independent validator",
                bool(v1["ok"] and v2["ok"] and v3["ok"]), {}),
    ]


# ---------------------------------------------------------------- 10

def check_distance_weight() -> list[Outcome]:
    E = porosity.SetModel.points([[0.0, 0.0]])
    g = porosity.window(2.0, (-1.0, 1.0), (-1.0, 1.0), (32, 512))
    rep = porosity.distance_weight_pipeline(E, 0.3, 0.25, g)
    ok = (math.isfinite(rep["constant"]) and rep["drift"] <= STABILITY
          and rep["certificate"].porous and rep["implication"] == "holds")
    return [Outcome(10, "distance weight has a stable finite constant and the set is porous",
                    bool(ok), {"constant": rep["constant"], "refined": rep["constant_refined"],
                               "drift": rep["drift"], "c": rep["porosity"]["c"],
                               "delta": rep["porosity"]["delta"]})]


# ---------------------------------------------------------------- 11

def check_parabolic_counterexample() -> list[Outcome]:
    F = SampledSlab.from_function(lambda x, t: corpus.kinked_profile(t), 2.0, (0.0, 1.0),
                                  (-4.0, 12.0), (8, 1024))
    full = parabolic_max_full(F, 0.5, "maximal")
    t = F.time_centers()
    ok = np.all(np.isfinite(full), axis=0)
    past = ok & (t <= 0)
    at10 = int(np.argmin(np.abs(t - 10.0)))
    lo = float(np.max(full[:, past]))
    hi = float(np.min(full[:, at10]))
    return [Outcome(11, "slab maximal function of the time profile is <= 1 before 0 and "
                        ">= 16 * 0.95 at t = 10", bool(lo <= 1 + SLACK and hi >= 16 * 0.95),
                    {"max_before_zero": lo, "min_at_ten": hi})]


# ---------------------------------------------------------------- 12

def check_heat() -> list[Outcome]:
    quad = SampledSlab.from_function(lambda x, t: x ** 2 + 2 * t, 2.0, (0.0, 1.0), (0.0, 1.0), (32, 1024))
    expo = SampledSlab.from_function(lambda x, t: np.exp(x + t), 2.0, (0.0, 1.0), (0.0, 1.0), (32, 1024))
    gauss = SampledSlab.from_function(lambda x, t: t ** -0.5 * np.exp(-x ** 2 / (4 * t)), 2.0,
                                      (-2.0, 2.0), (1.0, 2.0), (64, 256))
    r = [porosity.heat_residual(u) for u in (quad, expo, gauss)]
    h = porosity.harnack_check(
        SampledSlab.from_function(lambda x, t: np.exp(x + t), 2.0, (0.0, 1.0), (0.0, 1.0), (16, 256)), 0.25)
    return [
        Outcome(12, "quadratic solution has residual <= 1e-12", r[0] <= 1e-12, {"residual": r[0]}),
        Outcome(12, "exponential and Gaussian solutions have residual <= 1e-3",
                r[1] <= 1e-3 and r[2] <= 1e-3, {"exp": r[1], "gauss": r[2]}),
        Outcome(12, "Harnack report on exp(x+t) passes the log bridge", bool(h["bridge_pass"]),
                {k: h[k] for k in ("harnack_constant", "weight_constant", "log_norm", "bridge_rhs")}),
    ]


# ---------------------------------------------------------------- 13

def _same(a, b, scale) -> bool:
    na, nb = np.isnan(a), np.isnan(b)
    return bool(np.array_equal(na, nb) and np.all(np.abs(a[~na] - b[~nb]) <= EXACT_REL * scale))


def check_engines(count: int = 50) -> list[Outcome]:
    rng = np.random.default_rng(corpus.SEED + 13)
    variants = [MaxVariant1D(k, 0.25 if k == "gapped-minus" else None) for k in KINDS_1D]
    fails = {}
    for v in variants:
        bad = 0
        for _ in range(count):
            n = int(rng.integers(8, 65))
            a = rng.normal(size=n) * rng.choice([1.0, 10.0])
            f = SampledLine(0.0, 1.0, a)
            fast = onesided_max_full(f, v, "fast").values
            slow = onesided_max_full(f, v, "naive").values
            bad += not _same(fast, slow, _scale(a))
        fails[f"{v.kind}"] = bad
    for kind in ("maximal", "natural"):
        bad = 0
        for _ in range(count):
            nx, nt = int(rng.integers(4, 13)), int(rng.integers(16, 49))
            f = SampledSlab(1, 2.0, (0.0,), 1 / nx, 0.0, 1 / (4 * nx ** 2), rng.normal(size=(nx, nt)))
            fast = parabolic_max_full(f, 0.25, kind, "fast")
            slow = parabolic_max_full(f, 0.25, kind, "naive")
            bad += not _same(fast, slow, _scale(f.values))
        fails[f"parabolic-{kind}"] = bad
    return [Outcome(13, "fast maximal engines equal the naive engines on seeded inputs",
                    not any(fails.values()), {"mismatches": fails, "inputs_per_variant": count})]


CHECKS = (check_closed_form, check_sandwich, check_log_bridges, check_bennett,
          check_natural_envelope, check_jn, check_coifman_rochberg, check_dyadic_trees,
          check_porosity, check_distance_weight, check_parabolic_counterexample, check_heat,
          check_engines)


def run_all() -> list[Outcome]:
    out = []
    for chk in CHECKS:
        out.extend(chk())
    return out
