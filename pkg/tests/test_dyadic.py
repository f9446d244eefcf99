import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varjump import (Cube, CZResult, DyadicLattice, GridFunction,
                     ParameterError, conditional_expectation, cz_decompose,
                     lattice_of, martingale_difference)
from varjump.dyadic import block_means


def grid1(values, half_width=4.0):
    values = np.asarray(values, dtype=float)
    return GridFunction(1, values.size, half_width, values)


STAIR = grid1([1, 3, 5, 7, 9, 11, 13, 15])


# ---------------------------------------------------------------------------
# lattice and block means


def test_lattice_validation():
    lat = DyadicLattice(1, 8)
    assert lat.top_level == 3
    assert lat.cubes_at(1) == 4
    with pytest.raises(ParameterError):
        DyadicLattice(1, 12)
    with pytest.raises(ParameterError):
        DyadicLattice(3, 8)
    with pytest.raises(ParameterError):
        lat.check_level(4)


def test_cube_slices():
    q = Cube(1, (2,))
    assert q.slices() == (slice(4, 6),)
    assert q.cell_count(1) == 2
    q2 = Cube(2, (1, 0))
    assert q2.slices() == (slice(4, 8), slice(0, 4))
    assert q2.cell_count(2) == 16


def test_block_means_2d():
    vals = np.arange(64, dtype=float).reshape(8, 8)
    got = block_means(vals, 1)
    assert got.shape == (4, 4)
    assert got[0, 0] == pytest.approx(np.mean(vals[:2, :2]))
    assert got[3, 2] == pytest.approx(np.mean(vals[6:8, 4:6]))


# ---------------------------------------------------------------------------
# conditional expectations and differences


def test_expectation_hand_case():
    np.testing.assert_array_equal(
        conditional_expectation(STAIR, 1).values, [2, 2, 6, 6, 10, 10, 14, 14])
    np.testing.assert_array_equal(
        conditional_expectation(STAIR, 2).values, [4, 4, 4, 4, 12, 12, 12, 12])
    np.testing.assert_array_equal(
        conditional_expectation(STAIR, 3).values, np.full(8, 8.0))
    np.testing.assert_array_equal(
        conditional_expectation(STAIR, 0).values, STAIR.values)


def test_expectation_tower_property():
    rng = np.random.default_rng(4)
    f = grid1(rng.standard_normal(16))
    twice = conditional_expectation(conditional_expectation(f, 1), 3)
    np.testing.assert_allclose(twice.values,
                               conditional_expectation(f, 3).values,
                               atol=1e-14)


def test_difference_hand_case():
    d1 = martingale_difference(STAIR, 1)
    np.testing.assert_array_equal(d1.values, [1, -1, 1, -1, 1, -1, 1, -1])
    # each level-1 cube mean of the difference is zero
    assert np.all(block_means(d1.values, 1) == 0.0)


def test_differences_telescope():
    rng = np.random.default_rng(5)
    f = grid1(rng.standard_normal(32))
    top = lattice_of(f).top_level
    total = sum(martingale_difference(f, lv).values
                for lv in range(1, top + 1))
    recon = conditional_expectation(f, top).values - total
    np.testing.assert_allclose(recon, f.values, atol=1e-12)


def test_level_bounds_checked():
    with pytest.raises(ParameterError):
        conditional_expectation(STAIR, 4)
    with pytest.raises(ParameterError):
        martingale_difference(STAIR, 0)


def test_expectation_2d():
    vals = np.zeros((8, 8))
    vals[0, 0] = 16.0
    f = GridFunction(2, 8, 4.0, vals)
    e1 = conditional_expectation(f, 1)
    assert e1.values[0, 0] == pytest.approx(4.0)
    assert e1.values[1, 1] == pytest.approx(4.0)
    assert np.all(e1.values[2:, :] == 0.0)
    assert np.sum(e1.values) == pytest.approx(16.0)


# ---------------------------------------------------------------------------
# Calderon-Zygmund selection


def test_cz_hand_case():
    f = grid1([4, 0, 0, 0, 0, 0, 0, 0])
    res = cz_decompose(f, 1.0)
    assert res.cubes == (Cube(1, (0,)),)
    assert not res.root_selected
    np.testing.assert_array_equal(res.good.values, [2, 2, 0, 0, 0, 0, 0, 0])
    np.testing.assert_array_equal(res.bad.values, [2, -2, 0, 0, 0, 0, 0, 0])
    assert res.union_measure() == pytest.approx(2.0)
    np.testing.assert_array_equal(res.part(0).values, res.bad.values)


def test_cz_selection_is_strict():
    # the level-2 cube average hits alpha exactly and must not be taken
    f = grid1([4, 0, 0, 0, 0, 0, 0, 0])
    res = cz_decompose(f, 1.0)
    assert all(q.level < 2 for q in res.cubes)


def test_cz_nothing_selected_above_peak():
    f = grid1([4, 0, 0, 0, 0, 0, 0, 0])
    res = cz_decompose(f, 5.0)
    assert res.cubes == ()
    np.testing.assert_array_equal(res.good.values, f.values)
    assert np.all(res.bad.values == 0.0)
    assert res.union_measure() == 0.0


def test_cz_root_selection_warns(caplog):
    f = grid1(np.full(8, 10.0))
    with caplog.at_level(logging.WARNING, logger="varjump.dyadic"):
        res = cz_decompose(f, 1.0)
    assert res.root_selected
    assert "root cube is selected" in caplog.text
    assert res.cubes == (Cube(3, (0,)),)
    np.testing.assert_array_equal(res.good.values, f.values)


def test_cz_input_validation():
    f = grid1(np.ones(8))
    with pytest.raises(ParameterError):
        cz_decompose(f, 0.0)
    with pytest.raises(ParameterError):
        cz_decompose(f.with_values(np.ones(8) + 0j), 1.0)
    with pytest.raises(ParameterError):
        cz_decompose(f, 1.0, lattice=DyadicLattice(1, 16))
    res = cz_decompose(f, 2.0, lattice=DyadicLattice(1, 8))
    assert isinstance(res, CZResult)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(min_value=-8.0, max_value=8.0), min_size=16,
                max_size=16),
       st.floats(min_value=0.25, max_value=4.0))
def test_cz_invariants(vals, alpha):
    f = grid1(np.asarray(vals))
    scale = float(np.mean(np.abs(f.values)))
    if scale == 0.0 or alpha <= scale:  # keep the root out of play
        alpha = 2.0 * scale + alpha
    res = cz_decompose(f, alpha)
    np.testing.assert_allclose(res.good.values + res.bad.values, f.values,
                               atol=1e-12)
    l1 = float(np.sum(np.abs(f.values))) * f.h
    assert res.union_measure() <= l1 / alpha + 1e-12
    seen = np.zeros(16, dtype=bool)
    for q in res.cubes:
        sl = q.slices()[0]
        assert not seen[sl].any()  # selected cubes are disjoint
        seen[sl] = True
        avg = float(np.mean(np.abs(f.values[sl])))
        assert alpha < avg <= 2.0 * alpha + 1e-12
        assert abs(float(np.mean(res.bad.values[sl]))) < 1e-12
    assert np.all(res.bad.values[~seen] == 0.0)
    assert np.all(np.abs(res.good.values[seen]) <= 2.0 * alpha + 1e-12)
