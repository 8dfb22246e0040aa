import numpy as np
import pytest
from hypothesis import given, strategies as st

from blolag.geometry import anatomy_family, gap_pair_family, prect_family
from blolag.grid import GridError, SampledLine, SampledSlab
from blolag.oscillation import OscKind, null_space_check, osc_norm, osc_norm_naive

values = st.lists(st.floats(-50, 50, allow_nan=False), min_size=8, max_size=32)


def _line(v):
    return SampledLine(0.0, 0.25, v)


@pytest.mark.parametrize("kind, params, fam", [
    ("blo-plus", {}, lambda n: anatomy_family(n)),
    ("bmo-plus", {}, lambda n: anatomy_family(n)),
    ("blo-plus-q", {"q": 2.0}, lambda n: anatomy_family(n)),
    ("blo-plus-gapped", {"gamma": 0.25}, lambda n: gap_pair_family(n, 0.25)),
    ("bmo-plus-gapped", {"gamma": 0.25}, lambda n: gap_pair_family(n, 0.25)),
    ("bmo-plus-gapped-mean", {"gamma": 0.25}, lambda n: gap_pair_family(n, 0.25)),
])
@given(v=values)
def test_vectorised_norm_equals_direct_loop(kind, params, fam, v):
    f = _line(v)
    family = fam(f.N)
    fast = osc_norm(f, kind, family=family, **params).norm
    slow = osc_norm_naive(f, kind, family, **params)
    assert fast == pytest.approx(slow, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("kind", ["blo-plus", "bmo-plus"])
@given(v=values, c=st.floats(-100, 100), s=st.floats(0.01, 10))
def test_shift_invariance_and_homogeneity(kind, v, c, s):
    f = _line(v)
    base = osc_norm(f, kind).norm
    assert osc_norm(_line(np.asarray(v) + c), kind).norm == pytest.approx(base, rel=1e-9, abs=1e-7)
    assert osc_norm(_line(s * np.asarray(v)), kind).norm == pytest.approx(s * base, rel=1e-9, abs=1e-9)


@given(v=values)
def test_blo_dominates_bmo(v):
    f = _line(v)
    assert osc_norm(f, "bmo-plus").norm <= osc_norm(f, "blo-plus").norm + 1e-9


@given(v=values)
def test_null_space_flag_matches_vanishing_norm(v):
    f = _line(v)
    flag, _ = null_space_check(f)
    assert flag == (osc_norm(f, "blo-plus").norm == 0)


def test_increasing_has_zero_norms():
    f = SampledLine.from_function(lambda x: x ** 3, 0, 4, 64)
    for kind in ("blo-plus", "bmo-plus"):
        assert osc_norm(f, kind).norm == 0
    assert osc_norm(f, "blo-plus-gapped", gamma=0.25).norm == 0


def test_parabolic_norms_vanish_on_time_increasing_and_match_loop():
    slab = SampledSlab.from_function(lambda x, t: 3 * t + 0 * x, 2.0, (0, 1), (0, 1), (6, 96))
    assert null_space_check(slab, "parabolic")[0]
    for kind in ("pblo-minus", "pbmo-minus"):
        assert osc_norm(slab, kind, gamma=0.5).norm == pytest.approx(0, abs=1e-12)
    rng = np.random.default_rng(3)
    noisy = slab.with_values(rng.normal(size=slab.dims))
    fam = prect_family(noisy, 0.5, require=("minus", "plus", "plusplus"), max_k=2)
    for kind in ("pblo-minus", "pbmo-minus"):
        fast = osc_norm(noisy, kind, gamma=0.5, family=fam).norm
        assert fast == pytest.approx(osc_norm_naive(noisy, kind, fam, gamma=0.5), rel=1e-9)


def test_kind_parsing_and_validation():
    assert OscKind.parse("blo-plus-q(2)").q == 2
    assert OscKind.parse("pblo-minus(0.25)").gamma == 0.25
    for bad in ("nope", "blo-plus-gapped(0.9)", "pblo-minus-gapped(0.25,0.5,0.1)"):
        with pytest.raises(GridError):
            OscKind.parse(bad)
