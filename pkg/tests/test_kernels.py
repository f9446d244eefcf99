import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from varjump import (KernelError, ParameterError, circle_kernel,
                     constant_kernel, cosine_kernel, hilbert_kernel, lq_norm,
                     mean, parse_kernel, read_kernel, sector_kernel,
                     split_mean_zero, two_point_kernel, write_kernel)
from varjump.kernels import SURFACE_MEASURE, DirectionalKernel


def test_hilbert_kernel_structure():
    k = hilbert_kernel()
    assert k.dimension == 1
    np.testing.assert_array_equal(np.sort(k.nodes.ravel()), [-1.0, 1.0])
    assert k.weights.sum() == pytest.approx(2.0, abs=1e-15)
    # odd sign pattern 1/pi on the right, -1/pi on the left
    for node, value in zip(k.nodes.ravel(), k.values):
        assert value == pytest.approx(node / math.pi)
    assert mean(k) == pytest.approx(0.0, abs=1e-15)


def test_circle_kernel_midpoint_angles():
    k = circle_kernel(lambda th: np.ones_like(th), node_count=8)
    assert k.weights.sum() == pytest.approx(2.0 * math.pi)
    want = (np.arange(8) + 0.5) * 2.0 * math.pi / 8.0
    np.testing.assert_allclose(np.sort(k.angles()), want, atol=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3, 5])
def test_cosine_kernel_mean_zero(m):
    assert abs(mean(cosine_kernel(m))) < 1e-12


@pytest.mark.parametrize("sectors", [1, 2, 4])
def test_sector_kernel_mean_zero(sectors):
    k = sector_kernel(sectors)
    assert set(np.unique(k.values)) == {-1.0, 1.0}
    assert abs(mean(k)) < 1e-12


def test_lq_norm_closed_forms():
    # (sum w |Omega|^q)^(1/q) against hand integrals on the sphere
    assert lq_norm(hilbert_kernel(), 2.0) == pytest.approx(
        math.sqrt(2.0 / math.pi ** 2), rel=1e-12)
    assert lq_norm(constant_kernel(2), 3.0) == pytest.approx(
        (2.0 * math.pi) ** (1.0 / 3.0), rel=1e-10)
    assert lq_norm(cosine_kernel(1), 2.0) == pytest.approx(
        math.sqrt(math.pi), rel=1e-10)


@pytest.mark.parametrize("q", [0.5, 1.0, math.inf])
def test_lq_norm_rejects_bad_exponent(q):
    with pytest.raises(ParameterError):
        lq_norm(hilbert_kernel(), q)


def test_split_mean_zero_reconstructs():
    k = constant_kernel(2, value=0.7)
    k0, c = split_mean_zero(k)
    assert abs(mean(k0)) < 1e-12
    np.testing.assert_allclose(k0.values + c, k.values, atol=1e-14)
    assert c == pytest.approx(mean(k) / k.weights.sum())


def test_split_mean_zero_of_balanced_kernel_is_identity():
    k = hilbert_kernel()
    k0, c = split_mean_zero(k)
    assert c == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_array_equal(k0.values, k.values)


def test_kernel_validation():
    with pytest.raises(KernelError):
        DirectionalKernel(1, np.array([[0.5]]), np.array([2.0]),
                          np.array([1.0]))  # node off the sphere
    with pytest.raises(KernelError):
        DirectionalKernel(1, np.array([[1.0], [-1.0]]),
                          np.array([1.0, -1.0]), np.array([1.0, 1.0]))
    with pytest.raises(KernelError):
        # weights must fill the surface measure
        DirectionalKernel(1, np.array([[1.0], [-1.0]]),
                          np.array([0.5, 0.5]), np.array([1.0, -1.0]))


def test_two_point_kernel_weights():
    k = two_point_kernel(0.25, -0.25)
    assert k.weights.sum() == pytest.approx(SURFACE_MEASURE[1])
    assert mean(k) == pytest.approx(0.0, abs=1e-15)


def test_io_roundtrip(tmp_path):
    k = cosine_kernel(2, node_count=32)
    path = tmp_path / "k.txt"
    write_kernel(k, path)
    back = read_kernel(path)
    assert back.dimension == k.dimension
    # nodes pass through the angle representation, costing a few ulps
    np.testing.assert_allclose(back.nodes, k.nodes, atol=1e-14)
    np.testing.assert_array_equal(back.weights, k.weights)
    np.testing.assert_array_equal(back.values, k.values)


def test_parse_kernel_presets(tmp_path):
    assert parse_kernel("hilbert").node_count == 2
    assert parse_kernel("cos:m=3").dimension == 2
    assert parse_kernel("sector:k=2").dimension == 2
    path = tmp_path / "k.txt"
    write_kernel(hilbert_kernel(), path)
    assert parse_kernel(f"file:{path}").node_count == 2
    with pytest.raises(ParameterError):
        parse_kernel("spiral:q=1")


@given(st.integers(min_value=1, max_value=8),
       st.integers(min_value=16, max_value=256))
def test_cosine_kernel_norm_matches_quadrature(m, nodes):
    # the discrete lq norm is just the kernel's own quadrature; compare
    # against an independent trapezoid-free Riemann sum on the circle
    k = cosine_kernel(m, node_count=nodes)
    theta = k.angles()
    direct = (np.sum(k.weights * np.abs(np.cos(m * theta)) ** 2)) ** 0.5
    assert lq_norm(k, 2.0) == pytest.approx(direct, rel=1e-12)
