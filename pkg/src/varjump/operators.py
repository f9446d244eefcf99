"""Truncated singular integrals, averages, maximal operators, projections.

All convolution-type operators share one evaluation path.  A radial atom
(one quadrature ring: radius r, directional nodes u_k, coefficients c_k)
is splatted onto an integer-offset stencil with the same linear
interpolation used to sample f at off-lattice points; the stencil is then
applied by zero-padded FFT convolution.  Splatting r*u_k and gathering
f(x - r*u_k) are the same linear map, so this matches direct sampling to
rounding error while letting a whole truncation family reuse one
transform of f.

Radial quadrature is midpoint-in-log on sub-shells anchored at powers of
two (the d(log r) measure of the |y|^-n kernel is handled exactly), with
the sub-shell count per octave chosen so sub-shell width tracks h/2 up to
a per-dimension cap.  Truncation cuts are merged into the sub-shell
breakpoints, so shells and truncations integrate over identical atoms and
shell additivity holds to rounding.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import KernelError, ParameterError, ResolutionError
from .families import FamilySamples
from .grids import GridFunction, ensure_same_grid
from .kernels import DirectionalKernel, constant_kernel, mean

#: cancellation requirement for singular truncations
MEAN_ZERO_TOL = 1e-8

#: sub-shells per octave are multiples of 16, capped per dimension
_SUBSHELL_CAP = {1: 8192, 2: 256}

#: radial node cap for the uniform (ball-average) rule
_UNIFORM_CAP = {1: 16384, 2: 1024}


# --------------------------------------------------------------------------
# stencil machinery


def _next_pow2(n: int) -> int:
    return 1 << (int(n) - 1).bit_length()


class _Stencil:
    """Accumulates interpolation-splatted offsets in cell units."""

    def __init__(self, dimension: int, halfwidth: int):
        self.dimension = dimension
        self.halfwidth = halfwidth
        self.coeffs = np.zeros((2 * halfwidth + 1,) * dimension)

    def splat(self, offsets, coeffs) -> None:
        """offsets: (k, n) in cell units; coeffs: (k,)."""
        off = np.asarray(offsets, dtype=float)
        c = np.asarray(coeffs, dtype=float)
        hw = self.halfwidth
        if self.dimension == 1:
            d = off[:, 0] + hw
            i0 = np.floor(d).astype(int)
            frac = d - i0
            np.add.at(self.coeffs, i0, c * (1.0 - frac))
            np.add.at(self.coeffs, i0 + 1, c * frac)
        else:
            d0 = off[:, 0] + hw
            d1 = off[:, 1] + hw
            i0 = np.floor(d0).astype(int)
            j0 = np.floor(d1).astype(int)
            f0 = d0 - i0
            f1 = d1 - j0
            for di, wi in ((0, 1.0 - f0), (1, f0)):
                for dj, wj in ((0, 1.0 - f1), (1, f1)):
                    np.add.at(self.coeffs, (i0 + di, j0 + dj), c * wi * wj)

    def copy_coeffs(self) -> np.ndarray:
        return self.coeffs.copy()


def _apply_stencils(f: GridFunction, stencils, halfwidth: int) -> np.ndarray:
    """Zero-padded FFT convolution of f with each stencil.

    Returns an array of shape (len(stencils), M) or (len(stencils), M, M).
    """
    m = f.size
    pad = _next_pow2(m + 2 * halfwidth + 2)
    if not f.is_real():
        re = _apply_stencils(f.with_values(f.values.real), stencils, halfwidth)
        im = _apply_stencils(f.with_values(f.values.imag), stencils, halfwidth)
        return re + 1j * im
    batch = np.stack([np.asarray(s) for s in stencils])
    if f.dimension == 1:
        ff = np.fft.rfft(f.values, pad)
        sf = np.fft.rfft(batch, pad, axis=-1)
        out = np.fft.irfft(ff[None, :] * sf, pad, axis=-1)
        return out[:, halfwidth:halfwidth + m]
    ff = np.fft.rfftn(f.values, s=(pad, pad), axes=(0, 1))
    rows = []
    for st in batch:
        sf = np.fft.rfftn(st, s=(pad, pad), axes=(0, 1))
        conv = np.fft.irfftn(ff * sf, s=(pad, pad), axes=(0, 1))
        rows.append(conv[halfwidth:halfwidth + m, halfwidth:halfwidth + m])
    return np.stack(rows)


def _stencil_halfwidth(f: GridFunction, r_max: float) -> int:
    return int(math.ceil(r_max / f.h)) + 2


def sample_shifted(f: GridFunction, offset) -> np.ndarray:
    """f(x - offset) at every grid point, zero outside the box."""
    off = np.atleast_1d(np.asarray(offset, dtype=float))
    if off.size != f.dimension:
        raise ParameterError("offset dimension mismatch")
    hw = _stencil_halfwidth(f, float(np.max(np.abs(off))) + f.h)
    st = _Stencil(f.dimension, hw)
    st.splat((off / f.h)[None, :], np.ones(1))
    return _apply_stencils(f, [st.coeffs], hw)[0]


def _ring(kernel: DirectionalKernel, r: float, h: float):
    """Offsets (cells) and coefficients for one quadrature ring."""
    offsets = kernel.nodes * (r / h)
    coeffs = kernel.weights * kernel.values
    return offsets, coeffs


# --------------------------------------------------------------------------
# radial grids


def _subshells_per_octave(j: int, h: float, dimension: int) -> int:
    target = (2.0 ** j) / (h / 2.0)
    count = 16 * int(math.ceil(max(target, 1.0) / 16.0))
    return min(_SUBSHELL_CAP[dimension], max(16, count))


def log_breakpoints(r_lo: float, r_hi: float, h: float, dimension: int,
                    cuts=()) -> np.ndarray:
    """Sub-shell boundaries anchored at powers of two, merged with cuts."""
    if not 0 < r_lo < r_hi:
        raise ParameterError("need 0 < r_lo < r_hi")
    j_lo = int(math.floor(math.log2(r_lo) + 1e-12))
    j_hi = int(math.ceil(math.log2(r_hi) - 1e-12))
    parts = []
    for j in range(j_lo, j_hi):
        s = _subshells_per_octave(j, h, dimension)
        parts.append(2.0 ** (j + np.arange(s + 1) / s))
    parts.append(np.asarray([r_lo, r_hi], dtype=float))
    if len(cuts):
        parts.append(np.asarray(cuts, dtype=float))
    bp = np.unique(np.concatenate(parts))
    bp = bp[(bp >= r_lo * (1.0 - 1e-13)) & (bp <= r_hi * (1.0 + 1e-13))]
    # drop near-duplicate boundaries so no atom has vanishing width
    keep = np.ones(bp.size, dtype=bool)
    keep[1:] = np.diff(bp) > 1e-13 * bp[1:]
    return bp[keep]


def _uniform_breakpoints(t: float, h: float, dimension: int,
                         cuts=()) -> np.ndarray:
    count = int(math.ceil(t / (h / 2.0)))
    count = min(_UNIFORM_CAP[dimension], max(4, count))
    parts = [np.linspace(0.0, t, count + 1)]
    if len(cuts):
        parts.append(np.asarray(cuts, dtype=float))
    bp = np.unique(np.concatenate(parts))
    bp = bp[(bp >= 0.0) & (bp <= t * (1.0 + 1e-13))]
    keep = np.ones(bp.size, dtype=bool)
    keep[1:] = np.diff(bp) > 1e-13 * max(t, 1.0)
    return bp[keep]


def _require_cancellation(kernel: DirectionalKernel) -> None:
    c = abs(mean(kernel))
    if c > MEAN_ZERO_TOL:
        raise KernelError(
            f"kernel mean {c:.3e} violates the cancellation condition")


def _check_geometry(f: GridFunction, kernel: DirectionalKernel) -> None:
    if kernel.dimension != f.dimension:
        raise ParameterError("kernel and grid dimensions differ")


# --------------------------------------------------------------------------
# truncated singular integrals


def _singular_stencil_values(f, kernel, breakpoints, cut_values):
    """Per-segment convolutions of the log-radial rule.

    Atoms between consecutive cuts are grouped into one stencil each;
    returns (values, seg_of_cut) with values shape (nsegments, grid...).
    """
    a = breakpoints[:-1]
    b = breakpoints[1:]
    mid = np.sqrt(a * b)
    logw = np.log(b / a)
    seg = np.searchsorted(cut_values, a * (1.0 + 1e-13), side="right") - 1
    seg = np.clip(seg, 0, len(cut_values) - 1)
    hw = _stencil_halfwidth(f, float(breakpoints[-1]))
    stencils = []
    for s in range(len(cut_values)):
        st = _Stencil(f.dimension, hw)
        sel = seg == s
        for r, w in zip(mid[sel], logw[sel]):
            off, coef = _ring(kernel, r, f.h)
            st.splat(off, coef * w)
        stencils.append(st.coeffs)
    return _apply_stencils(f, stencils, hw)


def truncated_singular(f: GridFunction, kernel: DirectionalKernel,
                       eps: float) -> GridFunction:
    """Integral of Omega(y/|y|) |y|^-n f(x-y) over eps < |y| <= R, where
    R is the box diameter (beyond it every shifted sample reads zero)."""
    _check_geometry(f, kernel)
    _require_cancellation(kernel)
    if eps < f.h / 2.0 * (1.0 - 1e-12):
        raise ResolutionError(f"eps={eps} below half a cell ({f.h / 2.0})")
    r_hi = f.reach
    if eps >= r_hi:
        return f.with_values(np.zeros_like(f.values, dtype=float))
    bp = log_breakpoints(eps, r_hi, f.h, f.dimension)
    vals = _singular_stencil_values(f, kernel, bp, np.asarray([eps]))
    return f.with_values(vals[0])


def truncated_family(f: GridFunction, kernel: DirectionalKernel,
                     eps_grid) -> FamilySamples:
    """Samples of the truncated integral over a grid of inner radii.

    All members integrate over suffixes of one shared atom list, so
    member differences are exactly thin-shell integrals.
    """
    _check_geometry(f, kernel)
    _require_cancellation(kernel)
    eps = np.asarray(eps_grid, dtype=float)
    if eps.ndim != 1 or eps.size == 0 or np.any(np.diff(eps) <= 0):
        raise ParameterError("eps_grid must be strictly increasing")
    if eps[0] < f.h / 2.0 * (1.0 - 1e-12):
        raise ResolutionError("eps_grid starts below half a cell")
    r_hi = f.reach
    if eps[-1] >= r_hi:
        raise ParameterError("eps_grid must stay below the box diameter")
    bp = log_breakpoints(eps[0], r_hi, f.h, f.dimension, cuts=eps)
    seg_vals = _singular_stencil_values(f, kernel, bp, eps)
    flat = seg_vals.reshape(eps.size, -1)
    suffix = np.cumsum(flat[::-1], axis=0)[::-1]
    return FamilySamples(f.dimension, f.size, f.half_width, "truncated",
                         eps, np.ascontiguousarray(suffix.T))


def dyadic_shell(f: GridFunction, kernel: DirectionalKernel,
                 j: int) -> GridFunction:
    """Convolution with the kernel restricted to 2^j <= |y| < 2^(j+1)."""
    _check_geometry(f, kernel)
    _require_cancellation(kernel)
    lo = 2.0 ** j
    if lo < f.h / 2.0 * (1.0 - 1e-12):
        raise ResolutionError(f"shell 2^{j} below half a cell")
    if lo > f.reach:
        raise ResolutionError(f"shell 2^{j} beyond the box diameter")
    hi = min(2.0 * lo, f.reach)
    if hi <= lo * (1.0 + 1e-13):
        return f.with_values(np.zeros_like(f.values, dtype=float))
    bp = log_breakpoints(lo, hi, f.h, f.dimension)
    vals = _singular_stencil_values(f, kernel, bp, np.asarray([lo]))
    return f.with_values(vals[0])


def shell_family(f: GridFunction, kernel: DirectionalKernel, j: int,
                 t_grid) -> FamilySamples:
    """Samples of the shell integral over 2^j t <= |y| <= 2^(j+1) for t
    in [1, 2]; the t = 2 member integrates over an empty set."""
    _check_geometry(f, kernel)
    _require_cancellation(kernel)
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(np.diff(t) <= 0):
        raise ParameterError("t_grid must be strictly increasing")
    if t[0] < 1.0 - 1e-12 or t[-1] > 2.0 + 1e-12:
        raise ParameterError("t_grid must lie inside [1, 2]")
    lo = 2.0 ** j
    if lo * t[0] < f.h / 2.0 * (1.0 - 1e-12):
        raise ResolutionError(f"inner radius 2^{j}*t below half a cell")
    if lo > f.reach:
        raise ResolutionError(f"shell 2^{j} beyond the box diameter")
    hi = 2.0 * lo
    cuts = lo * t
    shape = (f.size,) * f.dimension
    if cuts[0] >= hi:
        vals = np.zeros((int(np.prod(shape)), t.size))
        return FamilySamples(f.dimension, f.size, f.half_width,
                             f"shell:j={j}", t, vals)
    bp = log_breakpoints(cuts[0], hi, f.h, f.dimension,
                         cuts=cuts[cuts < hi * (1.0 - 1e-13)])
    seg_vals = _singular_stencil_values(f, kernel, bp,
                                        cuts[cuts < hi * (1.0 - 1e-13)])
    nlive = seg_vals.shape[0]
    flat = seg_vals.reshape(nlive, -1)
    suffix = np.cumsum(flat[::-1], axis=0)[::-1]
    values = np.zeros((flat.shape[1], t.size))
    values[:, :nlive] = suffix.T
    return FamilySamples(f.dimension, f.size, f.half_width,
                         f"shell:j={j}", t, values)


def shell_derivative(f: GridFunction, kernel: DirectionalKernel, j: int,
                     t: float) -> GridFunction:
    """Exact t-derivative of the shell integral: a single sphere integral
    at radius 2^j t, scaled by -1/t."""
    _check_geometry(f, kernel)
    if not 1.0 - 1e-12 <= t <= 2.0 + 1e-12:
        raise ParameterError("t must lie in [1, 2]")
    r = (2.0 ** j) * t
    if r < f.h / 2.0 * (1.0 - 1e-12):
        raise ResolutionError("sphere radius below half a cell")
    hw = _stencil_halfwidth(f, r)
    st = _Stencil(f.dimension, hw)
    off, coef = _ring(kernel, r, f.h)
    st.splat(off, coef)
    vals = _apply_stencils(f, [st.coeffs], hw)[0]
    return f.with_values(-vals / t)


# --------------------------------------------------------------------------
# averaging and maximal operators


def _ball_stencil_values(f, kernel, breakpoints, cut_values):
    """Per-segment convolutions of the uniform (midpoint) radial rule
    with measure r^(n-1) dr; segments end at the cut values."""
    a = breakpoints[:-1]
    b = breakpoints[1:]
    mid = 0.5 * (a + b)
    w = (b - a) * mid ** (f.dimension - 1)
    seg = np.searchsorted(cut_values, b * (1.0 - 1e-13), side="left")
    seg = np.clip(seg, 0, len(cut_values) - 1)
    hw = _stencil_halfwidth(f, float(breakpoints[-1]))
    stencils = []
    for s in range(len(cut_values)):
        st = _Stencil(f.dimension, hw)
        sel = seg == s
        for r, wr in zip(mid[sel], w[sel]):
            off, coef = _ring(kernel, r, f.h)
            st.splat(off, coef * wr)
        stencils.append(st.coeffs)
    return _apply_stencils(f, stencils, hw)


def averaging(f: GridFunction, kernel: DirectionalKernel,
              t: float) -> GridFunction:
    """t^-n times the integral of Omega(y/|y|) f(x-y) over |y| < t."""
    _check_geometry(f, kernel)
    if t < f.h * (1.0 - 1e-12):
        raise ResolutionError(f"radius t={t} below one cell")
    bp = _uniform_breakpoints(t, f.h, f.dimension)
    vals = _ball_stencil_values(f, kernel, bp, np.asarray([t]))
    return f.with_values(vals[0] / t ** f.dimension)


def averaging_family(f: GridFunction, kernel: DirectionalKernel,
                     t_grid) -> FamilySamples:
    """Ball averages over an increasing radius grid; members share one
    radial rule cut at every radius."""
    _check_geometry(f, kernel)
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(np.diff(t) <= 0):
        raise ParameterError("t_grid must be strictly increasing")
    if t[0] < f.h * (1.0 - 1e-12):
        raise ResolutionError("t_grid starts below one cell")
    bp = _uniform_breakpoints(float(t[-1]), f.h, f.dimension, cuts=t)
    seg_vals = _ball_stencil_values(f, kernel, bp, t)
    flat = seg_vals.reshape(t.size, -1)
    prefix = np.cumsum(flat, axis=0)
    values = np.ascontiguousarray(prefix.T) / t[None, :] ** f.dimension
    return FamilySamples(f.dimension, f.size, f.half_width, "averaging",
                         t, values)


def rough_maximal(f: GridFunction, kernel: DirectionalKernel,
                  t_grid) -> GridFunction:
    """max over t of t^-n integral of |Omega(y/|y|) f(x-y)| over |y| < t."""
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0:
        raise ParameterError("t_grid is empty")
    if t[-1] > f.reach * (1.0 + 1e-12):
        raise ParameterError("t_grid exceeds the box diameter")
    abs_kernel = kernel.with_values(np.abs(kernel.values))
    abs_f = f.with_values(np.abs(f.values))
    fam = averaging_family(abs_f, abs_kernel, t)
    vals = fam.values.max(axis=1).reshape((f.size,) * f.dimension)
    return f.with_values(vals)


def hl_maximal(f: GridFunction, r_grid) -> GridFunction:
    """Hardy-Littlewood style maximal function with r^-n normalization."""
    return rough_maximal(f, constant_kernel(f.dimension), r_grid)


def maximal_truncated(fam: FamilySamples) -> GridFunction:
    """Pointwise max of |member| over the family parameter."""
    expect = fam.size ** fam.dimension
    if fam.npoints != expect:
        raise ParameterError("family must cover the full grid")
    vals = np.abs(fam.values).max(axis=1)
    return GridFunction(fam.dimension, fam.size, fam.half_width,
                        vals.reshape((fam.size,) * fam.dimension))


# --------------------------------------------------------------------------
# spectral cutoffs and projections


def cutoff_profile(u):
    """Smooth radial profile: 1 for u <= 2, 0 for u >= 4, C-infinity ramp
    between, with exact saturation at the endpoints."""
    scalar = np.isscalar(u) or np.ndim(u) == 0
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.ones_like(u)
    out[u >= 4.0] = 0.0
    band = (u > 2.0) & (u < 4.0)
    s = (u[band] - 2.0) / 2.0
    down = np.exp(-1.0 / (1.0 - s))
    up = np.exp(-1.0 / s)
    out[band] = down / (down + up)
    return float(out[0]) if scalar else out


def projection_profile(u):
    """psi with psi^2 = cutoff_profile(2u) - cutoff_profile(4u), supported
    in 1/2 <= u <= 2; the squares telescope to 1 across octaves."""
    scalar = np.isscalar(u) or np.ndim(u) == 0
    u = np.atleast_1d(np.asarray(u, dtype=float))
    sq = cutoff_profile(2.0 * u) - cutoff_profile(4.0 * u)
    out = np.sqrt(np.clip(sq, 0.0, 1.0))
    return float(out[0]) if scalar else out


def _radial_frequencies(f: GridFunction) -> np.ndarray:
    k = np.fft.fftfreq(f.size, d=1.0 / f.size)
    xi = math.pi * k / f.half_width
    if f.dimension == 1:
        return np.abs(xi)
    return np.hypot(xi[:, None], xi[None, :])


def _apply_multiplier(f: GridFunction, mult: np.ndarray) -> GridFunction:
    spec = np.fft.fftn(f.values) * mult
    out = np.fft.ifftn(spec)
    if f.is_real():
        out = out.real
    return f.with_values(out)


def smooth_cutoff(f: GridFunction, k_index: int) -> GridFunction:
    """Low-pass at dyadic scale: multiplier cutoff_profile(2^k |xi|)."""
    xi = _radial_frequencies(f)
    mult = cutoff_profile((2.0 ** k_index) * xi)
    live = xi > 0
    if np.all(mult[live] == 1.0) or np.all(mult[live] == 0.0):
        raise ResolutionError(
            f"cutoff scale 2^{k_index} outside the spectral grid")
    return _apply_multiplier(f, mult)


def lp_projection(f: GridFunction, level: int) -> GridFunction:
    """Band projection: multiplier projection_profile(2^-level |xi|).

    An annulus missing the spectral grid yields the zero function.
    """
    xi = _radial_frequencies(f)
    mult = projection_profile(xi / 2.0 ** level)
    return _apply_multiplier(f, mult)


def projection_levels(f: GridFunction) -> list:
    """Levels whose annulus meets the grid's nonzero frequencies."""
    xi = _radial_frequencies(f)
    live = xi[xi > 0]
    lo = int(math.floor(math.log2(live.min()))) - 2
    hi = int(math.ceil(math.log2(live.max()))) + 2
    out = []
    for level in range(lo, hi + 1):
        if np.any(projection_profile(live / 2.0 ** level) > 0.0):
            out.append(level)
    return out


# --------------------------------------------------------------------------
# parameter grids


def geometric_grid(lo: float, hi: float, per_octave: int) -> np.ndarray:
    """lo * 2^(i/per_octave) up to hi, endpoint included when it lands on
    the progression (it does whenever hi/lo is a power of two)."""
    if not 0 < lo < hi:
        raise ParameterError("need 0 < lo < hi")
    if per_octave < 1:
        raise ParameterError("per_octave must be >= 1")
    count = int(math.floor(per_octave * math.log2(hi / lo) + 1e-9))
    return lo * 2.0 ** (np.arange(count + 1) / per_octave)
