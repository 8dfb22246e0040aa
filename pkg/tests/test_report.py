import json
import math

import numpy as np
from hypothesis import given, strategies as st

from blolag import report

json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-10**6, 10**6) | st.floats(allow_nan=True)
    | st.text(max_size=5),
    lambda inner: st.lists(inner, max_size=4) | st.dictionaries(st.text(max_size=4), inner, max_size=4),
    max_leaves=12)


@given(json_values)
def test_dumps_is_deterministic_and_parseable(obj):
    text = report.dumps(obj)
    assert text == report.dumps(obj)
    assert text.endswith("\n")
    json.loads(text)


def test_float_format_and_non_finite():
    text = report.dumps({"b": 0.1, "a": [math.inf, -math.inf, math.nan], "c": np.float64(1 / 3)})
    assert text == '{"a": ["inf", "-inf", "nan"], "b": 0.10000000000000001, "c": 0.33333333333333331}\n'


def test_numpy_and_slices_are_plain():
    out = json.loads(report.dumps({"arr": np.arange(3), "flag": np.bool_(True), "sl": slice(1, 4)}))
    assert out == {"arr": [0, 1, 2], "flag": True, "sl": [1, 4]}


def test_build_embeds_version_config_caps_and_caveat():
    rep = report.build("norm", {"kind": "blo-plus"}, {"norm": 0.0}, {"family": "anatomy"})
    assert set(rep) == {"tool", "version", "command", "config", "family_caps", "caveat", "result"}
    assert "lower bounds" in rep["caveat"]
