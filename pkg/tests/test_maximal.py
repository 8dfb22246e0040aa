import numpy as np
import pytest
from hypothesis import given, strategies as st

from blolag.grid import GridError, SampledLine, SampledSlab
from blolag.maximal import (KINDS_1D, MaxVariant1D, onesided_max, onesided_max_full,
                            parabolic_max, parabolic_max_full, standard_minus_fast,
                            standard_minus_naive)

arrays = st.lists(st.floats(-100, 100, allow_nan=False), min_size=8, max_size=48).map(np.array)
VARIANTS = ["standard-minus", "standard-plus", "gapped-minus(0.25)", "natural-minus",
            "hardy-littlewood"]


@pytest.mark.parametrize("variant", VARIANTS)
@given(a=arrays)
def test_fast_engine_equals_naive(variant, a):
    fast = onesided_max_full(a, variant, "fast")
    naive = onesided_max_full(a, variant, "naive")
    assert np.allclose(fast.values, naive.values, rtol=1e-12, atol=1e-12 * max(1, np.abs(a).max()),
                       equal_nan=True)


@given(a=arrays, c=st.floats(0.01, 100))
def test_positive_homogeneity(a, c):
    base = standard_minus_fast(np.abs(a)).values
    scaled = standard_minus_fast(c * np.abs(a)).values
    assert np.allclose(scaled, c * base, rtol=1e-12, equal_nan=True)


@given(a=arrays, b=arrays)
def test_monotone_in_the_input(a, b):
    n = min(a.size, b.size)
    lo, hi = np.abs(a[:n]), np.abs(a[:n]) + np.abs(b[:n])
    m_lo, m_hi = standard_minus_fast(lo).values, standard_minus_fast(hi).values
    ok = np.isfinite(m_lo)
    assert np.all(m_lo[ok] <= m_hi[ok] * (1 + 1e-12) + 1e-12)


def test_standard_minus_small_example():
    a = np.array([1.0, 3.0, 2.0, 0.0])
    out = standard_minus_naive(a)
    assert np.allclose(out.values, [1.0, 3.0, 2.5, 5 / 3], rtol=1e-15)
    assert list(out.start) == [0, 1, 1, 1]
    assert np.array_equal(standard_minus_fast(a).values, out.values)


def test_constant_input_gives_constant_output():
    line = SampledLine(0, 1, np.full(20, 2.5))
    for variant in ("standard-minus", "natural-minus", "hardy-littlewood"):
        assert np.allclose(onesided_max(line, variant).values, 2.5)


def test_variant_parsing_and_errors():
    assert MaxVariant1D.parse("gapped-minus(0.5)").gamma == 0.5
    assert set(KINDS_1D) >= {"standard-minus", "natural-minus"}
    with pytest.raises(GridError):
        MaxVariant1D.parse("gapped-minus")
    with pytest.raises(GridError):
        onesided_max_full(np.ones(5), "standard-minus", engine="magic")


def test_max_len_caps_window():
    a = np.array([10.0] + [0.0] * 9)
    capped = onesided_max_full(a, "standard-minus", max_len=2).values
    assert capped[0] == 10.0 and capped[1] == 5.0 and np.all(capped[2:] == 0.0)


@given(st.integers(0, 2**31 - 1))
def test_parabolic_engines_agree(seed):
    rng = np.random.default_rng(seed)
    slab = SampledSlab(1, 2.0, (0.0,), 1 / 6, 0.0, 1 / 144, rng.normal(size=(6, 24)))
    for kind in ("maximal", "natural"):
        fast = parabolic_max_full(slab, 0.5, kind, "fast")
        naive = parabolic_max_full(slab, 0.5, kind, "naive")
        assert np.allclose(fast, naive, rtol=1e-12, atol=1e-12, equal_nan=True)


def test_parabolic_max_crops_to_covered_slices():
    slab = SampledSlab.from_function(lambda x, t: 1 + 0 * x, 2.0, (0, 1), (0, 1), (8, 128))
    out = parabolic_max(slab, 0.5)
    assert np.all(np.isfinite(out.values))
    assert np.allclose(out.values, 1.0)
    assert out.t0 > slab.t0
