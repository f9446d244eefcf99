import math

import numpy as np
import pytest

from varjump import (FamilySamples, KernelError, ParameterError,
                     ResolutionError, averaging, averaging_family,
                     build_function, constant_kernel, cutoff_profile,
                     dyadic_shell, frequencies, geometric_grid, hl_maximal,
                     inverse_spectral_transform, log_breakpoints,
                     lp_norm, lp_projection, maximal_truncated, parse_kernel,
                     projection_levels, projection_profile, rough_maximal,
                     sample_at, sample_shifted, shell_derivative,
                     shell_family, smooth_cutoff, spectral_transform,
                     truncated_family, truncated_singular)

HILBERT = parse_kernel("hilbert")


def gauss(size=256, half_width=8.0, s=1.0):
    return build_function(f"gauss:s={s}", 1, size, half_width)


# ---------------------------------------------------------------------------
# radial rules


def test_log_breakpoints_structure():
    bp = log_breakpoints(0.3, 5.0, 0.25, 1, cuts=[0.7, 1.3])
    assert bp[0] == 0.3 and bp[-1] == 5.0
    assert np.all(np.diff(bp) > 0)
    for must in (0.5, 0.7, 1.0, 1.3, 2.0, 4.0):
        assert np.min(np.abs(bp - must)) < 1e-12
    with pytest.raises(ParameterError):
        log_breakpoints(2.0, 1.0, 0.25, 1)


def test_geometric_grid():
    g = geometric_grid(1.0, 8.0, 4)
    assert g.size == 13
    assert g[0] == 1.0
    assert g[-1] == pytest.approx(8.0)
    np.testing.assert_allclose(g[1:] / g[:-1], 2.0 ** 0.25, rtol=1e-12)
    with pytest.raises(ParameterError):
        geometric_grid(3.0, 2.0, 4)
    with pytest.raises(ParameterError):
        geometric_grid(1.0, 2.0, 0)


# ---------------------------------------------------------------------------
# truncated singular integrals


def test_truncation_of_indicator_matches_closed_form():
    f = build_function("box:a=1", 1, 4096, 8.0)
    tf = truncated_singular(f, HILBERT, 0.5)
    # for |x| > 1 + eps the truncation does not bite and the integral is
    # log|(x+1)/(x-1)| / pi
    want = math.log(3.0) / math.pi
    assert abs(float(sample_at(tf, 2.0)) - want) < 2e-4


def test_odd_output_for_even_input():
    tf = truncated_singular(gauss(), HILBERT, 0.5)
    np.testing.assert_allclose(tf.values, -tf.values[::-1], atol=1e-10)


def test_cancellation_required():
    with pytest.raises(KernelError):
        truncated_singular(gauss(), constant_kernel(1), 0.5)


def test_truncation_resolution_limits():
    f = gauss()
    with pytest.raises(ResolutionError):
        truncated_singular(f, HILBERT, f.h / 4.0)
    empty = truncated_singular(f, HILBERT, f.reach + 1.0)
    assert np.all(empty.values == 0.0)


def test_family_members_match_single_truncations_on_aligned_grid():
    f = gauss()
    eps = geometric_grid(4.0 * f.h, f.reach / 2.0, 8)
    fam = truncated_family(f, HILBERT, eps)
    for j in (0, eps.size // 2, eps.size - 1):
        single = truncated_singular(f, HILBERT, float(eps[j]))
        np.testing.assert_allclose(fam.member(j).values, single.values,
                                   atol=1e-13)


def test_family_members_match_single_truncations_off_grid():
    # cuts that split sub-shell atoms perturb the rule slightly
    f = gauss()
    eps = np.array([0.1003, 0.2517, 0.7919, 3.1113])
    fam = truncated_family(f, HILBERT, eps)
    for j in range(eps.size):
        single = truncated_singular(f, HILBERT, float(eps[j]))
        np.testing.assert_allclose(fam.member(j).values, single.values,
                                   atol=1e-6)


def test_family_grid_validation():
    f = gauss()
    with pytest.raises(ParameterError):
        truncated_family(f, HILBERT, [1.0, 1.0])
    with pytest.raises(ParameterError):
        truncated_family(f, HILBERT, [1.0, f.reach])
    with pytest.raises(ResolutionError):
        truncated_family(f, HILBERT, [f.h / 8.0, 1.0])


def test_dyadic_shell_matches_shell_family_member():
    f = gauss()
    sh = dyadic_shell(f, HILBERT, 0)
    fam = shell_family(f, HILBERT, 0, [1.0])
    np.testing.assert_array_equal(fam.member(0).values, sh.values)


def test_dyadic_shell_limits():
    f = gauss()
    with pytest.raises(ResolutionError):
        dyadic_shell(f, HILBERT, -12)
    with pytest.raises(ResolutionError):
        dyadic_shell(f, HILBERT, 6)
    # the shell opening exactly at the reach is empty
    assert np.all(dyadic_shell(f, HILBERT, 4).values == 0.0)


def test_shell_family_top_member_is_empty():
    f = gauss()
    fam = shell_family(f, HILBERT, 0, [1.0, 1.5, 2.0])
    assert np.all(fam.values[:, 2] == 0.0)
    assert np.any(fam.values[:, 0] != 0.0)


def test_shell_derivative_closed_form():
    f = gauss()
    j, t = 0, 1.3
    r = 2.0 ** j * t
    sd = shell_derivative(f, HILBERT, j, t)
    pair = sample_shifted(f, [r]) - sample_shifted(f, [-r])
    np.testing.assert_allclose(sd.values, -pair / (math.pi * t), atol=1e-12)


def test_sample_shifted_by_whole_cells():
    f = gauss()
    got = sample_shifted(f, [2.0 * f.h])
    want = np.zeros_like(f.values)
    want[2:] = f.values[:-2]
    np.testing.assert_allclose(got, want, atol=1e-12)


# ---------------------------------------------------------------------------
# averages and maximal functions


def test_ball_average_of_one_is_the_ball_measure():
    ones = gauss().with_values(np.ones(256))
    av = averaging(ones, constant_kernel(1), 1.7)
    assert av.values[128] == pytest.approx(2.0, rel=1e-12)
    ones2 = build_function("box:a=9", 2, 64, 4.0)
    av2 = averaging(ones2, constant_kernel(2), 1.3)
    assert av2.values[32, 32] == pytest.approx(math.pi, rel=1e-12)


def test_ball_average_is_exact_on_linear_functions():
    f = gauss()
    lin = f.with_values(f.axis())
    t = 1.25
    av = averaging(lin, constant_kernel(1), t)
    inside = np.abs(f.axis()) <= f.half_width - t - 2.0 * f.h
    np.testing.assert_allclose(av.values[inside], 2.0 * f.axis()[inside],
                               atol=1e-12)
    assert float(sample_at(av, 0.5)) == pytest.approx(1.0, abs=1e-12)


def test_averaging_family_tracks_single_averages():
    ones = gauss().with_values(np.ones(256))
    t = geometric_grid(0.5, 4.0, 4)
    fam = averaging_family(ones, constant_kernel(1), t)
    np.testing.assert_allclose(fam.values[128, :], 2.0, rtol=1e-12)


def test_rough_maximal_dominates_averages():
    f = gauss()
    t = geometric_grid(0.5, 4.0, 4)
    fam = averaging_family(f, constant_kernel(1), t)
    mx = rough_maximal(f, constant_kernel(1), t)
    assert np.all(mx.values.reshape(-1, 1) >= np.abs(fam.values) - 1e-12)


def test_hl_maximal_of_indicator_at_center():
    f = build_function("box:a=1", 1, 256, 8.0)
    mx = hl_maximal(f, geometric_grid(f.h, 4.0, 8))
    assert mx.values[128] == pytest.approx(2.0, rel=1e-9)


def test_maximal_truncated():
    params = np.array([1.0, 2.0])
    values = np.zeros((8, 2))
    values[:, 0] = np.arange(8) - 4.0
    values[:, 1] = 1.0
    fam = FamilySamples(1, 8, 4.0, "toy", params, values)
    got = maximal_truncated(fam)
    np.testing.assert_array_equal(got.values,
                                  np.maximum(np.abs(np.arange(8) - 4.0), 1.0))
    with pytest.raises(ParameterError):
        maximal_truncated(FamilySamples(1, 8, 4.0, "toy", params,
                                        values[:4]))


# ---------------------------------------------------------------------------
# frequency-side comparison against an independent quadrature of the
# truncated kernel's multiplier


def test_windowed_truncation_difference_matches_sine_integral():
    scipy_special = pytest.importorskip("scipy.special")
    f = build_function("gauss:s=1", 1, 4096, 32.0)
    eps, r0 = 0.5, 16.0
    fam = truncated_family(f, HILBERT, np.array([eps, r0]))
    diff = fam.member(0).values - fam.member(1).values

    xi = frequencies(f)
    si_hi = scipy_special.sici(r0 * np.abs(xi))[0]
    si_lo = scipy_special.sici(eps * np.abs(xi))[0]
    mult = -(2.0j / math.pi) * np.sign(xi) * (si_hi - si_lo)
    ref = inverse_spectral_transform(
        spectral_transform(f).with_values(spectral_transform(f).values * mult)
    ).values.real

    window = np.abs(f.axis()) <= 8.0
    err = np.max(np.abs(diff[window] - ref[window]))
    assert err / np.max(np.abs(ref[window])) < 1e-4


# ---------------------------------------------------------------------------
# spectral cutoffs and band projections


def test_cutoff_profile_knots():
    assert cutoff_profile(1.0) == 1.0
    assert cutoff_profile(2.0) == 1.0
    assert cutoff_profile(3.0) == pytest.approx(0.5)
    assert cutoff_profile(4.0) == 0.0
    assert cutoff_profile(7.0) == 0.0
    ramp = cutoff_profile(np.linspace(2.0, 4.0, 41))
    assert np.all(np.diff(ramp) <= 0)


def test_projection_profile_support_and_partition():
    assert projection_profile(1.0) == 1.0
    assert projection_profile(0.5) == 0.0
    assert projection_profile(2.0) == 0.0
    u = np.array([0.07, 0.4, 1.0, 3.3, 17.0])
    total = np.zeros_like(u)
    for level in range(-8, 10):
        total += projection_profile(u / 2.0 ** level) ** 2
    np.testing.assert_allclose(total, 1.0, atol=1e-12)


def test_smooth_cutoff_is_a_diagonal_multiplier():
    f = gauss()
    out = smooth_cutoff(f, 0)
    c_in = spectral_transform(f).values
    c_out = spectral_transform(out).values
    mult = cutoff_profile(np.abs(frequencies(f)))
    np.testing.assert_allclose(c_out, c_in * mult, atol=1e-12)


def test_smooth_cutoff_scale_limits():
    f = gauss()
    with pytest.raises(ResolutionError):
        smooth_cutoff(f, -10)
    with pytest.raises(ResolutionError):
        smooth_cutoff(f, 10)


def test_projection_off_grid_is_zero():
    f = gauss()
    assert np.all(lp_projection(f, 30).values == 0.0)


def test_band_projections_resolve_band_limited_energy():
    f = build_function("gauss:s=1", 1, 512, 8.0)
    x = f.axis()
    vals = np.zeros_like(x)
    rng = np.random.default_rng(3)
    for k in rng.integers(4, 64, size=6):
        vals += rng.standard_normal() * np.cos(math.pi * k * x / 8.0)
    f = f.with_values(vals)
    total = sum(lp_norm(lp_projection(f, lv), 2.0) ** 2
                for lv in projection_levels(f))
    assert total == pytest.approx(lp_norm(f, 2.0) ** 2, rel=1e-10)
