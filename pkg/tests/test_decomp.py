import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from blolag import decomp
from blolag.corpus import indicators, line_functions
from blolag.grid import GridError, SampledLine, SampledSlab
from blolag.maximal import standard_minus_fast
from blolag.oscillation import osc_norm

values = st.lists(st.floats(-20, 20, allow_nan=False), min_size=8, max_size=32)


def _line(v):
    return SampledLine(0.0, 0.5, v)


@pytest.mark.parametrize("setting", ["1d-lagged", "1d-adjacent"])
@given(v=values)
def test_tails_equal_direct_recount(setting, v):
    f = _line(v)
    lam = np.linspace(0, 40, 9)
    prof = decomp.jn_profile(f, setting, lam, fit=False)
    tails, neg = decomp.jn_recount(f, setting, lam)
    assert np.array_equal(prof.tails, tails)
    assert neg is None and prof.tails_negative is None


@given(v=values)
def test_tails_are_non_increasing_in_lambda(v):
    prof = decomp.jn_profile(_line(v), fit=False)
    assert np.all(np.diff(prof.tails) <= 0)
    assert np.all((prof.tails >= 0) & (prof.tails <= 1))


def test_parabolic_tails_equal_recount():
    rng = np.random.default_rng(7)
    slab = SampledSlab(1, 2.0, (0.0,), 1 / 8, 0.0, 1 / 256, rng.normal(size=(8, 128)))
    lam = np.linspace(0, 3, 7)
    prof = decomp.jn_profile(slab, "parabolic", lam, gamma=0.5, max_k=2, fit=False)
    tails, neg = decomp.jn_recount(slab, "parabolic", lam, gamma=0.5, max_k=2)
    assert np.array_equal(prof.tails, tails)
    assert np.array_equal(prof.tails_negative, neg)


def test_fit_decays_and_null_space_vanishes():
    prof = decomp.jn_profile(line_functions()["neg-log-singular"])
    assert prof.B_fit > 0 and prof.reference
    inc = decomp.jn_profile(line_functions()["increasing"], fit=False)
    assert np.all(inc.tails == 0)
    with pytest.raises(GridError):
        decomp.jn_profile(line_functions()["increasing"], fit=True)


@pytest.mark.parametrize("delta", [0.25, 0.5, 0.75])
@given(v=st.lists(st.floats(0.05, 20), min_size=8, max_size=40))
def test_cr_factor_reconstructs_with_b_in_unit_interval(delta, v):
    w = _line(v)
    fac = decomp.cr_factor(w, delta)
    recon = fac.b * standard_minus_fast(fac.g).values[fac.cells] ** delta
    assert np.max(np.abs(recon - np.asarray(v)[fac.cells])) <= 1e-12 * max(v)
    assert fac.residual <= 1e-12
    assert 0 < fac.min_b and fac.max_b <= 1 + 1e-12


def test_cr_factor_rejects_non_positive():
    with pytest.raises(GridError):
        decomp.cr_factor(_line([1.0, 0.0, 2.0]), 0.5)


def test_power_check_on_indicator_is_bounded():
    best = min(decomp.cr_power_check(indicators()["unit-interval"], d).constant
               for d in (0.1, 0.3, 0.5))
    assert 1 <= best <= 4.2


def test_blo_decomposition_reconstructs():
    f = line_functions()["log-max-indicator"]
    dec = decomp.blo_decompose(f)
    assert dec.residual <= 1e-9 * max(1.0, float(np.max(np.abs(f.values))))
    assert math.isfinite(dec.star_estimate) and dec.alpha > 0


@given(v=values)
def test_bennett_bounds(v):
    f = _line(v)
    b = decomp.bennett_decompose(f)
    assert b.upper_pass and b.lower_pass
    assert b.neg_min_h <= b.blo_norm * (1 + 1e-9) + 1e-9


def test_bennett_slab():
    slab = SampledSlab.from_function(lambda x, t: np.sin(6 * x) + t, 2.0, (0, 1), (0, 1), (8, 128))
    b = decomp.bennett_decompose(slab, "parabolic", gamma=0.5)
    assert b.upper_pass and b.lower_pass


def test_distance_routes_agree_on_log_of_maximal_indicator():
    f = SampledLine.from_function(lambda x: (x < 1).astype(float), 0, 40, 4096)
    f = f.with_values(np.log(standard_minus_fast(f.values).values))
    rep = decomp.dist_to_linfty(f)
    assert rep.eps_route == pytest.approx(1.0, rel=0.15)
    assert rep.alpha_route == pytest.approx(1.0, rel=0.15)


def test_distance_is_infinite_for_bounded_input():
    rep = decomp.dist_to_linfty(SampledLine.from_function(np.sin, 0, 400, 4096))
    assert rep.eps_route == math.inf and rep.alpha_route == math.inf
    with pytest.raises(GridError):
        decomp.dist_to_linfty(rep and SampledLine(0, 1, [1, 2]), "parabolic")


@given(v=values, u=values)
def test_verify_split_subadditivity(v, u):
    n = min(len(v), len(u))
    g, h = _line(v[:n]), _line(u[:n])
    f = _line(np.asarray(v[:n]) + np.asarray(u[:n]))
    assert decomp.verify_split(f, g, h)["pass"]
