import math

import pytest
from hypothesis import given, strategies as st

from blolag.geometry import (anatomy_family, check_dyadic, dyadic_decompose, gap_cells,
                             gap_pair_family, prect_family, round_half_up, time_parts)
from blolag.grid import GridError, IndexBox, SampledLine, SampledSlab
from blolag.acceptance import dyadic_block


def test_round_half_up():
    assert [round_half_up(v) for v in (0.5, 1.5, 2.5, 2.4999)] == [1, 2, 3, 2]


@given(st.integers(4, 40))
def test_anatomy_family_configs_fit_and_match_count(n):
    fam = anatomy_family(n, ("minus", "plus"))
    seen = 0
    for cfg in fam:
        seen += 1
        for box in cfg.boxes.values():
            assert box.fits((n,))
        assert cfg.minus.stop[0] == cfg.plus.start[0]
        assert cfg.minus.size == cfg.plus.size
    assert seen == len(fam)


def test_anatomy_ladder_uses_powers_of_two():
    fam = anatomy_family(64, mode="ladder")
    assert [sc.params["m"] for sc in fam.scales] == [1, 2, 4, 8, 16, 32]
    with pytest.raises(GridError):
        anatomy_family(64, mode="spiral")


@given(st.integers(1, 50), st.sampled_from([0.1, 0.25, 0.5]))
def test_gap_pairs_have_lag_close_to_gamma(m, gamma):
    span = 2 * m + gap_cells(m, gamma)
    assert m / span >= gamma - 1e-12 or gap_cells(m, gamma) == 0 or abs(m / span - gamma) <= m / span ** 2


def test_gap_pair_family_caps():
    fam = gap_pair_family(100, 0.25)
    assert 0 < fam.caps["min_gamma_eff"] <= 1
    for cfg in list(fam)[:50]:
        assert cfg.left.stop[0] <= cfg.right.start[0]
    with pytest.raises(GridError):
        gap_pair_family(3, 0.25)


def test_prect_family_blocks_are_ordered_in_time():
    slab = SampledSlab.from_function(lambda x, t: x + t, 2.0, (0, 1), (0, 1), (8, 128))
    fam = prect_family(slab, 0.25, require=("minus", "plus", "plusplus"))
    assert fam.caps["min_T"] == math.ceil(1 / 0.25)
    for rect in list(fam)[:200]:
        assert rect.minus.stop[-1] <= rect.plus.start[-1]
        assert rect.plus.stop[-1] <= rect.plusplus.start[-1]
        assert rect.minus.size == rect.plus.size
        for box in (rect.minus, rect.plus, rect.plusplus):
            assert box.fits(slab.dims)


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("gamma", [0.0, 0.25, 0.5])
def test_dyadic_properties(n, p, gamma):
    depth = 3
    block, hx, ht = dyadic_block(n, p, gamma, depth)
    root = dyadic_decompose(block, p, gamma, depth, hx=hx, ht=ht)
    assert all(check_dyadic(root, p, n).values())
    counts = {len(nd.children) for nd in root.walk() if nd.children}
    assert counts <= {2 ** n * math.floor(2 ** p), 2 ** n * math.ceil(2 ** p)}


def test_dyadic_p2_child_count():
    block, hx, ht = dyadic_block(1, 2.0, 0.0, 2)
    root = dyadic_decompose(block, 2.0, 0.0, 2, hx=hx, ht=ht)
    assert {len(nd.children) for nd in root.walk() if nd.children} == {8}


def test_dyadic_strict_resolution_error():
    with pytest.raises(GridError, match="resolution"):
        dyadic_decompose(IndexBox((0, 0), (2, 4)), 2.0, 0.0, 3)


def test_time_parts_picks_floor_or_ceil():
    assert time_parts(1.0, 1.5, 1.0, 1) in (2, 3)
    assert time_parts(1.0, 2.0, 1.0, 1) == 4
