import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from blolag.corpus import line_functions, line_weights
from blolag.grid import GridError, SampledLine, SampledSlab
from blolag.weights import (WeightConstantSpec, bridge_check, eps_scan, onesided_q1_naive,
                            sandwich_check, weight_constant)

weights = st.lists(st.floats(0.01, 100), min_size=8, max_size=40)


def _line(v):
    return SampledLine(0.0, 0.5, v)


@given(weights)
def test_q1_constant_matches_direct_enumeration(v):
    w = _line(v)
    assert weight_constant(w, WeightConstantSpec(q=1)).constant == pytest.approx(
        onesided_q1_naive(np.asarray(v)), rel=1e-12)


@given(weights, st.floats(0.01, 100))
def test_constants_are_scale_invariant_and_at_least_one(v, c):
    w = _line(v)
    for spec in (WeightConstantSpec(q=1), WeightConstantSpec(q=2), WeightConstantSpec(q=1, gapped=0.25)):
        a = weight_constant(w, spec).constant
        assert a >= 1 - 1e-12
        assert weight_constant(_line(c * np.asarray(v)), spec).constant == pytest.approx(a, rel=1e-9)


@given(weights)
def test_log_bridge_and_sandwich_upper_bound(v):
    w = _line(v)
    assert bridge_check(w).passed
    assert sandwich_check(w, 0.25)["upper_pass"]


def test_sandwich_override_reports_failure():
    w = line_weights()["sine"]
    res = sandwich_check(w, 0.5, constants={"gapped": 1e6})
    assert res["violated"] == ["gapped <= adjacent/gamma_eff"]
    res = sandwich_check(w, 0.5, constants={"adjacent": 1e6})
    assert "adjacent <= gapped" in res["violated"]


def test_constant_weight_has_constant_one():
    assert weight_constant(_line(np.full(16, 3.0))).constant == pytest.approx(1.0)


def test_parabolic_weight_requires_gamma():
    slab = SampledSlab.from_function(lambda x, t: np.exp(x + t), 2.0, (0, 1), (0, 1), (8, 128))
    with pytest.raises(GridError):
        weight_constant(slab, WeightConstantSpec(setting="parabolic"))
    rep = weight_constant(slab, WeightConstantSpec(setting="parabolic", gamma=0.25))
    assert math.isfinite(rep.constant) and rep.constant >= 1
    assert bridge_check(slab, "parabolic", 0.25).passed


def test_non_positive_weights_are_rejected():
    with pytest.raises(GridError):
        weight_constant(_line([1.0, -0.5, 2.0]))


@given(st.sampled_from(sorted(line_functions())))
def test_eps_scan_constants_grow_with_window(name):
    scan = eps_scan(line_functions()[name], eps_grid=(0.25, 1.0, 4.0))
    c = scan.constants
    assert np.all(c[:, :-1] >= c[:, 1:] - 1e-12)
    assert scan.critical_eps <= scan.critical_eps_grid


def test_eps_scan_bounded_function_never_diverges():
    scan = eps_scan(SampledLine.from_function(np.sin, 0, 400, 4096))
    assert scan.critical_eps == math.inf


def test_eps_scan_log_singularity_is_finite():
    line = SampledLine.from_function(lambda x: -np.log(np.abs(x - 1e-3)), 0, 40, 4096)
    assert math.isfinite(eps_scan(line).critical_eps)


def test_eps_grid_must_increase():
    with pytest.raises(GridError):
        eps_scan(line_functions()["sine"], eps_grid=(1.0, 0.5))
