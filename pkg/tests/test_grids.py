import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varjump import (FamilySamples, GridFunction, GridMismatchError,
                     ParameterError, Weight, build_function, build_weight,
                     frequencies, inverse_spectral_transform, lp_norm,
                     read_family, read_grid_function, sample_at,
                     spectral_energy, spectral_transform, weighted_lp_norm,
                     write_family, write_grid_function)
from varjump.grids import ensure_same_grid


def test_grid_geometry():
    f = build_function("gauss:s=1", 1, 64, 8.0)
    assert f.h == pytest.approx(0.25)
    assert f.reach == pytest.approx(16.0)
    ax = f.axis()
    assert ax[0] == pytest.approx(-8.0 + 0.125)
    assert ax[-1] == pytest.approx(8.0 - 0.125)
    g = build_function("gauss:s=1", 2, 16, 4.0)
    assert g.reach == pytest.approx(8.0 * math.sqrt(2.0))


@pytest.mark.parametrize("size", [0, 3, 6, 12])
def test_size_must_be_power_of_two(size):
    with pytest.raises(ParameterError):
        GridFunction(1, size, 8.0, np.zeros(max(size, 1)))


def test_dimension_range():
    with pytest.raises(ParameterError):
        GridFunction(3, 16, 4.0, np.zeros((16, 16, 16)))


def test_box_norms_exact():
    # box edges at +-1 sit on cell boundaries, so the midpoint rule is exact
    f = build_function("box:a=1", 1, 256, 8.0)
    assert lp_norm(f, 1.0) == pytest.approx(2.0, rel=1e-14)
    assert lp_norm(f, 2.0) == pytest.approx(math.sqrt(2.0), rel=1e-14)


def test_weighted_norm_matches_direct_sum():
    rng = np.random.default_rng(7)
    f = GridFunction(1, 128, 8.0, rng.standard_normal(128))
    w = build_weight("power:alpha=0.5", 1, 128, 8.0)
    direct = (np.sum(np.abs(f.values) ** 3 * w.values) * f.h) ** (1 / 3)
    assert weighted_lp_norm(f, w, 3.0) == pytest.approx(direct, rel=1e-14)


def test_weight_must_be_positive():
    with pytest.raises(ParameterError):
        Weight(1, 16, 4.0, np.zeros(16))


def test_frequencies_layout():
    f = build_function("gauss:s=1", 1, 16, 4.0)
    xi = frequencies(f)
    assert xi[0] == pytest.approx(-8 * math.pi / 4.0)
    assert xi[8] == 0.0
    assert np.all(np.diff(xi) == pytest.approx(math.pi / 4.0))


def test_cosine_wave_lands_on_one_coefficient_pair():
    m, hw, k0 = 256, 8.0, 12
    x = (np.arange(m) + 0.5) * (2 * hw / m) - hw
    f = GridFunction(1, m, hw, np.cos(math.pi * k0 * x / hw))
    c = spectral_transform(f)
    nz = np.nonzero(np.abs(c.values) > 1e-10)[0]
    np.testing.assert_allclose(frequencies(f)[nz] * hw / math.pi,
                               [-k0, k0], atol=1e-12)
    np.testing.assert_allclose(c.values[nz], [0.5, 0.5], atol=1e-12)


@pytest.mark.parametrize("dim,size,hw", [(1, 512, 8.0), (2, 32, 4.0)])
def test_parseval_and_roundtrip(dim, size, hw):
    rng = np.random.default_rng(11)
    f = GridFunction(dim, size, hw, rng.standard_normal((size,) * dim))
    c = spectral_transform(f)
    assert spectral_energy(c) == pytest.approx(lp_norm(f, 2.0) ** 2,
                                               rel=1e-12)
    back = inverse_spectral_transform(c)
    np.testing.assert_allclose(back.values.real, f.values, atol=1e-12)


def test_sample_at_linear_exact_inside():
    f = build_function("gauss:s=1", 1, 64, 8.0)
    lin = f.with_values(3.0 * f.axis() - 1.0)
    pts = np.array([-5.1, 0.0, 2.345, 7.8])
    np.testing.assert_allclose(sample_at(lin, pts), 3.0 * pts - 1.0,
                               atol=1e-12)
    assert sample_at(lin, 1000.0) == 0.0


def test_sample_at_bilinear():
    g = build_function("gauss:s=1", 2, 32, 4.0)
    ax = g.axis()
    plane = g.with_values(np.add.outer(2.0 * ax, -0.5 * ax) + 1.0)
    pts = np.array([[0.3, -1.2], [-2.0, 2.0]])
    want = 2.0 * pts[:, 0] - 0.5 * pts[:, 1] + 1.0
    np.testing.assert_allclose(sample_at(plane, pts), want, atol=1e-12)


def test_build_function_presets():
    f = build_function("gauss:s=0.5,x0=2", 1, 256, 8.0)
    peak = f.axis()[np.argmax(f.values)]
    assert abs(peak - 2.0) <= f.h
    box = build_function("box:a=0.5", 1, 256, 8.0)
    assert set(np.unique(box.values)) == {0.0, 1.0}
    tent = build_function("tent:a=2", 1, 256, 8.0)
    assert tent.values.max() == pytest.approx(1.0, abs=2e-2)
    bump = build_function("bump:a=1", 2, 32, 4.0)
    assert bump.values.max() <= 1.0
    assert np.all(bump.values[np.hypot(*np.meshgrid(
        bump.axis(), bump.axis(), indexing="ij")) >= 1.0] == 0.0)
    with pytest.raises(ParameterError):
        build_function("mystery:z=1", 1, 64, 8.0)


def test_grid_io_roundtrip(tmp_path):
    f = build_function("tent:a=1", 1, 64, 8.0)
    path = tmp_path / "f.grid"
    write_grid_function(f, path)
    back = read_grid_function(path)
    assert back.geometry() == f.geometry()
    np.testing.assert_array_equal(back.values, f.values)


def test_build_function_from_file_checks_geometry(tmp_path):
    f = build_function("gauss:s=1", 1, 64, 8.0)
    path = tmp_path / "f.grid"
    write_grid_function(f, path)
    again = build_function(f"file:{path}", 1, 64, 8.0)
    np.testing.assert_array_equal(again.values, f.values)
    with pytest.raises(GridMismatchError):
        build_function(f"file:{path}", 1, 128, 8.0)


def test_power_weight_clamped_positive():
    w = build_weight("power:alpha=-0.5", 1, 256, 8.0)
    assert np.all(w.values > 0.0)
    assert np.all(np.isfinite(w.values))


def test_ensure_same_grid():
    a = build_function("gauss:s=1", 1, 64, 8.0)
    b = build_function("gauss:s=1", 1, 64, 4.0)
    with pytest.raises(GridMismatchError):
        ensure_same_grid(a, b)


# ---------------------------------------------------------------------------
# family container


def _toy_family():
    params = np.array([0.5, 0.9, 1.0, 2.0, 4.1])
    values = np.arange(8 * 5, dtype=float).reshape(8, 5)
    return FamilySamples(1, 8, 4.0, "toy", params, values)


def test_family_validation():
    with pytest.raises(ParameterError):
        FamilySamples(1, 8, 4.0, "bad", np.array([1.0, 1.0]),
                      np.zeros((8, 2)))
    with pytest.raises(ParameterError):
        FamilySamples(1, 8, 4.0, "bad", np.array([-1.0, 1.0]),
                      np.zeros((8, 2)))
    with pytest.raises(ParameterError):
        FamilySamples(1, 8, 4.0, "bad", np.array([1.0, 2.0]),
                      np.zeros((8, 3)))


def test_family_member_and_dyadic_indices():
    fam = _toy_family()
    m = fam.member(2)
    np.testing.assert_array_equal(m.values, fam.values[:, 2])
    # powers of two in [0.5, 4.1] are 0.5, 1, 2, 4; nearest members
    np.testing.assert_array_equal(fam.dyadic_param_indices(), [0, 2, 3, 4])


def test_family_io_roundtrip(tmp_path):
    fam = _toy_family()
    path = tmp_path / "fam.bin"
    write_family(fam, path)
    back = read_family(path)
    assert back.family == fam.family
    np.testing.assert_array_equal(back.params, fam.params)
    np.testing.assert_array_equal(back.values, fam.values)
    assert (back.dimension, back.size, back.half_width) == (1, 8, 4.0)


def test_family_file_magic(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"not a family")
    with pytest.raises(ParameterError):
        read_family(path)


@settings(max_examples=25)
@given(st.integers(min_value=0, max_value=63),
       st.floats(min_value=-7.9, max_value=7.9))
def test_sample_at_agrees_at_cell_centers(idx, shift):
    f = build_function("gauss:s=1", 1, 64, 8.0)
    x = f.axis()[idx]
    assert sample_at(f, x) == pytest.approx(f.values[idx], rel=1e-12)
    # interpolation stays within the hull of neighbouring samples
    v = float(sample_at(f, shift))
    assert f.values.min() - 1e-12 <= v <= f.values.max() + 1e-12
