import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from blolag.grid import (GridError, IndexBox, SampledLine, SampledSlab, block_mean_min,
                         load_function, save_function)

finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(st.lists(finite, min_size=2, max_size=40), st.floats(-5, 5), st.floats(1e-3, 10))
def test_csv_round_trip_is_bit_exact(tmp_path_factory, vals, x0, h):
    path = tmp_path_factory.mktemp("csv") / "f.csv"
    line = SampledLine(x0, h, vals)
    save_function(line, path)
    back = load_function(path)
    assert np.array_equal(back.values, line.values)
    assert back.x0 == line.x0


def test_slab_round_trip_inline_and_raw(tmp_path):
    slab = SampledSlab.from_function(lambda x, t: np.sin(x) * t, 2.0, (0, 1), (0, 0.5), (4, 6))
    for fmt in ("json-slab", "json+raw-slab"):
        path = tmp_path / f"{fmt}.json"
        save_function(slab, path, fmt)
        back = load_function(path, fmt)
        assert np.array_equal(back.values, slab.values)
        assert (back.hx, back.ht, back.t0, back.dims) == (slab.hx, slab.ht, slab.t0, slab.dims)


@pytest.mark.parametrize("text, message", [
    ("a,b\n0,1\n1,2\n", "header"),
    ("x,value\n0,1\n1,2\n3,4\n", "non-uniform spacing at row 3"),
    ("x,value\n0,1\n1,nan\n", "row 2"),
    ("x,value\n0,1\n", "at least 2 rows"),
])
def test_csv_errors_name_the_problem(tmp_path, text, message):
    path = tmp_path / "f.csv"
    path.write_text(text)
    with pytest.raises(GridError, match=message):
        load_function(path)


def test_slab_errors(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"n": 1, "p": 2, "x0": [0], "hx": 1, "t0": 0, "ht": 1,
                                "dims": [2, 2], "values": [1, 2, 3]}))
    with pytest.raises(GridError, match="need 4 values"):
        load_function(path)
    path.write_text("{broken")
    with pytest.raises(GridError, match="invalid JSON"):
        load_function(path)
    with pytest.raises(GridError, match="exceed 1"):
        SampledSlab(1, 1.0, (0,), 1, 0, 1, np.zeros((2, 2)))


def test_line_validation():
    with pytest.raises(GridError):
        SampledLine(0, 1, [1.0])
    with pytest.raises(GridError, match="non-finite"):
        SampledLine(0, 1, [1.0, np.inf])
    line = SampledLine(0, 0.5, [1, 2, 3])
    assert line.with_values([4, 5], start=1).x0 == 0.5
    assert not line.values.flags.writeable


def test_index_box_relations():
    a, b = IndexBox((0, 0), (4, 4)), IndexBox((1, 1), (2, 2))
    assert a.contains(b) and not b.contains(a)
    assert IndexBox((4, 0), (1, 1)).disjoint(a)
    assert a.fits((4, 4)) and not a.fits((3, 4))
    with pytest.raises(GridError):
        IndexBox((0,), (0,))


def test_block_mean_min():
    line = SampledLine(0, 1, [3.0, 1.0, 2.0, 5.0])
    assert block_mean_min(line, IndexBox((1,), (3,))) == (pytest.approx(8 / 3), 1.0)
