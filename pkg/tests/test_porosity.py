import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from blolag import porosity
from blolag.grid import GridError, SampledLine
from blolag.porosity import SetModel

coord = st.floats(-2, 2, allow_nan=False)


def test_open_box_semantics_and_closure():
    E = SetModel.box([0.0], [1.0], 0.0, 1.0)
    lo, hi = np.array([[1.0, 0.0], [0.5, 0.5], [-1.0, 1.0]]), np.array([[2.0, 1.0], [0.6, 0.6], [0.0, 2.0]])
    assert list(E.hits(lo, hi)) == [False, True, False]
    pts = SetModel.points([[0.55, 0.55]])
    assert list(pts.hits(lo, hi)) == [False, True, False]
    slab = SetModel.slabs(1, [1.0])
    assert list(slab.hits(lo, hi)) == [False, False, False]


def test_json_round_trip_and_errors():
    E = SetModel.box([0.0], [1.0], 0.0, 1.0).union(SetModel.points([[0, 2]])).union(SetModel.slabs(1, [3]))
    assert SetModel.from_json(E.to_json()).to_json() == E.to_json()
    line = SetModel.from_json({"n": 0, "primitives": [{"box": {"tmin": 0, "tmax": 1}}]})
    assert line.n == 0
    with pytest.raises(GridError):
        SetModel(1, ())
    with pytest.raises(GridError):
        SetModel.box([1.0], [0.0], 0, 1)
    with pytest.raises(GridError):
        SetModel.from_json({"n": 1, "primitives": [{"blob": 1}]})


@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=4),
       st.tuples(coord, coord), st.tuples(coord, coord), st.sampled_from([1.5, 2.0, 3.0]))
def test_distance_is_one_lipschitz_in_parabolic_metric(pts, a, b, p):
    E = SetModel.points(pts)
    da, db = porosity.parabolic_distance(a, E, p), porosity.parabolic_distance(b, E, p)
    dab = max(abs(a[0] - b[0]), abs(a[1] - b[1]) ** (1 / p))
    assert abs(float(da) - float(db)) <= dab + 1e-12


def test_distance_vanishes_on_the_set():
    E = SetModel.box([0.0], [1.0], 0.0, 1.0)
    assert porosity.parabolic_distance([0.5, 0.5], E, 2.0) == 0
    assert porosity.parabolic_distance([0.5, 5.0], E, 2.0) == pytest.approx(2.0)


def test_binary_slab_times():
    assert porosity.binary_slab_times(-5, 2) == [-4.0, -2.0, 0.0, 1.0, 2.0]


WINDOW = porosity.window(2.0, (-1, 1), (-1, 1), (16, 128))


@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=3))
def test_point_sets_certify_and_validate(pts):
    E = SetModel.points(pts)
    cert = porosity.fit_porosity_check(E, 0.25, WINDOW)
    assert cert.porous
    assert porosity.validate_certificate(cert, E)["ok"]
    for c, d in cert.valid_pairs():
        assert c * d <= cert.c * cert.delta + 1e-15


def test_positive_measure_box_fails_with_witness():
    E = SetModel.box([-1.0], [1.0], -1.0, 1.0)
    cert = porosity.fit_porosity_check(E, 0.25, WINDOW)
    assert not cert.porous and cert.failure
    assert porosity.validate_certificate(cert, E)["ok"]


def test_validator_catches_tampering():
    E = SetModel.points([[0.0, 0.0]])
    cert = porosity.fit_porosity_check(E, 0.25, WINDOW)
    cert.c = 1.0
    assert not porosity.validate_certificate(cert, E)["ok"]


def test_line_porosity():
    grid = SampledLine(0.0, 1 / 16, np.zeros(256))
    pts = SetModel.points([[3.0]])
    cert = porosity.right_sided_porosity_1d(pts, grid)
    assert cert.porous and porosity.validate_certificate(cert, pts)["ok"]
    interval = SetModel.box([], [], 0.0, 1.0)
    assert not porosity.right_sided_porosity_1d(interval, grid).porous


def test_largest_free_node_avoids_the_set():
    from blolag.acceptance import dyadic_block
    block, hx, ht = dyadic_block(1, 2.0, 0.0, 3)
    grid = porosity.window(2.0, (0, 8 * hx), (0, block.size[-1] * ht), block.size)
    E = SetModel.points([[0.3, 0.1]])
    node = porosity.largest_free_dyadic(block, E, 2.0, grid)
    assert node is not None


def test_distance_weight_pipeline_on_point():
    E = SetModel.points([[0.0, 0.0]])
    grid = porosity.window(2.0, (-1, 1), (-1, 1), (16, 128))
    rep = porosity.distance_weight_pipeline(E, 0.3, 0.25, grid)
    assert rep["implication"] == "holds"
    assert math.isfinite(rep["constant"])


def test_heat_residual_of_exact_polynomial():
    from blolag.grid import SampledSlab
    u = SampledSlab.from_function(lambda x, t: x ** 2 + 2 * t, 2.0, (0, 1), (0, 1), (16, 256))
    assert porosity.heat_residual(u) <= 1e-12
    rep = porosity.harnack_check(u.with_values(u.values + 1), 0.5)
    assert rep["bridge_pass"]
