"""Grid functions on a centered box with cell-centered sampling.

The box is [-L, L]^n discretized into M cells per axis (M a power of two),
with samples at cell centers x_i = -L + (i + 1/2) h, h = 2L/M.  Functions
are treated as zero outside the box.  Integrals and norms use the midpoint
rule; the spectral transform uses frequencies xi_k = pi*k/L for integer
k in [-M/2, M/2).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, ParameterError

#: floor applied to analytically positive weights that underflow
WEIGHT_FLOOR = 1e-300


def _is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class GridFunction:
    """Values sampled at the cell centers of a centered box grid.

    Attributes
    ----------
    dimension : int
        1 or 2.
    size : int
        Cells per axis, a power of two, at least 8.
    half_width : float
        Box half-width L.
    values : ndarray
        Shape (size,) or (size, size), row-major, real or complex, finite.
    """

    dimension: int
    size: int
    half_width: float
    values: np.ndarray

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ParameterError(f"unsupported dimension {self.dimension}")
        if not _is_power_of_two(self.size) or self.size < 8:
            raise ParameterError(
                f"size must be a power of two >= 8, got {self.size}")
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise ParameterError(f"half_width must be positive, got {self.half_width}")
        values = np.asarray(self.values)
        if values.dtype.kind not in "fc":
            values = values.astype(float)
        expect = (self.size,) * self.dimension
        if values.shape != expect:
            raise ParameterError(f"values shape {values.shape}, expected {expect}")
        if not np.all(np.isfinite(values)):
            raise ParameterError("values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def h(self) -> float:
        """Cell width."""
        return 2.0 * self.half_width / self.size

    @property
    def reach(self) -> float:
        """Box diameter: beyond this shift distance the function reads zero."""
        return 2.0 * self.half_width * math.sqrt(self.dimension)

    def axis(self) -> np.ndarray:
        """Cell-center coordinates along one axis."""
        return -self.half_width + (np.arange(self.size) + 0.5) * self.h

    def radius(self) -> np.ndarray:
        """|x| at every cell center, in the values' shape."""
        ax = self.axis()
        if self.dimension == 1:
            return np.abs(ax)
        return np.hypot(ax[:, None], ax[None, :])

    def is_real(self) -> bool:
        return self.values.dtype.kind == "f"

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.dimension, self.size, self.half_width, values)

    def geometry(self):
        return (self.dimension, self.size, self.half_width)


def ensure_same_grid(*fns) -> None:
    geo = fns[0].geometry()
    for g in fns[1:]:
        if g.geometry() != geo:
            raise GridMismatchError(f"grids differ: {geo} vs {g.geometry()}")


@dataclass(frozen=True)
class Weight(GridFunction):
    """A strictly positive real grid function."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_real():
            raise ParameterError("weights must be real")
        if np.min(self.values) <= 0.0:
            raise ParameterError("weights must be strictly positive")


# --------------------------------------------------------------------------
# norms


def weighted_lp_norm(f: GridFunction, w: Weight, p: float) -> float:
    """Midpoint-rule Lp(w) norm, (sum |f|^p w h^n)^(1/p)."""
    if not (1.0 <= p < math.inf):
        raise ParameterError(f"p must lie in [1, inf), got {p}")
    ensure_same_grid(f, w)
    cell = f.h ** f.dimension
    return float(np.sum(np.abs(f.values) ** p * w.values * cell) ** (1.0 / p))


def lp_norm(f: GridFunction, p: float) -> float:
    """Unweighted midpoint-rule Lp norm."""
    if not (1.0 <= p < math.inf):
        raise ParameterError(f"p must lie in [1, inf), got {p}")
    cell = f.h ** f.dimension
    return float(np.sum(np.abs(f.values) ** p * cell) ** (1.0 / p))


# --------------------------------------------------------------------------
# spectral transform


def frequencies(f: GridFunction) -> np.ndarray:
    """Frequency values pi*k/L along one axis, in coefficient order."""
    k = np.fft.fftshift(np.fft.fftfreq(f.size, d=1.0 / f.size))
    return math.pi * k / f.half_width


def _phases(f: GridFunction) -> np.ndarray:
    # sampling at cell centers contributes exp(i*pi*k*(1 - 1/M)) per axis
    k = np.fft.fftfreq(f.size, d=1.0 / f.size)
    ph = np.exp(1j * math.pi * k * (1.0 - 1.0 / f.size))
    if f.dimension == 1:
        return ph
    return ph[:, None] * ph[None, :]


def spectral_transform(f: GridFunction) -> GridFunction:
    """Discrete Fourier coefficients c_k on the dual grid.

    Normalized so that f(x_i) = sum_k c_k exp(i xi_k . x_i) and the energy
    identity sum |f|^2 h^n = (2L)^n sum |c_k|^2 holds.  Coefficients are
    returned in ascending-frequency order, k = -M/2 .. M/2 - 1 per axis.
    """
    coeff = np.fft.fftn(f.values) / f.size ** f.dimension
    coeff = np.fft.fftshift(_phases(f) * coeff)
    return GridFunction(f.dimension, f.size, f.half_width, coeff)


def inverse_spectral_transform(c: GridFunction) -> GridFunction:
    coeff = np.fft.ifftshift(c.values) / _phases(c)
    vals = np.fft.ifftn(coeff) * c.size ** c.dimension
    return GridFunction(c.dimension, c.size, c.half_width, vals)


def spectral_energy(c: GridFunction) -> float:
    """(2L)^n sum |c_k|^2, matching the squared L2 norm of the signal."""
    return float((2.0 * c.half_width) ** c.dimension
                 * np.sum(np.abs(c.values) ** 2))


# --------------------------------------------------------------------------
# sampling off the lattice


def sample_at(f: GridFunction, points: np.ndarray) -> np.ndarray:
    """Interpolate f linearly at arbitrary points, zero outside the box.

    Parameters
    ----------
    points : ndarray, shape (..., n) or (...) when n == 1
    """
    pts = np.asarray(points, dtype=float)
    if f.dimension == 1:
        x = pts if pts.ndim == 0 or pts.shape[-1:] != (1,) else pts[..., 0]
        idx = (x + f.half_width) / f.h - 0.5
        return _interp_axis(f.values, np.asarray(idx))
    if pts.shape[-1] != 2:
        raise ParameterError("points must have a trailing axis of length 2")
    i = (pts[..., 0] + f.half_width) / f.h - 0.5
    j = (pts[..., 1] + f.half_width) / f.h - 0.5
    return _interp_plane(f.values, i, j)


def _interp_axis(values, idx):
    i0 = np.floor(idx).astype(int)
    frac = idx - i0
    lo = _take_zero(values, i0)
    hi = _take_zero(values, i0 + 1)
    return (1.0 - frac) * lo + frac * hi


def _take_zero(values, idx):
    ok = (idx >= 0) & (idx < values.shape[0])
    out = np.where(ok, values[np.clip(idx, 0, values.shape[0] - 1)], 0.0)
    return out


def _interp_plane(values, i, j):
    i0 = np.floor(i).astype(int)
    j0 = np.floor(j).astype(int)
    fi = i - i0
    fj = j - j0
    out = 0.0
    for di, wi in ((0, 1.0 - fi), (1, fi)):
        for dj, wj in ((0, 1.0 - fj), (1, fj)):
            ii = i0 + di
            jj = j0 + dj
            ok = (ii >= 0) & (ii < values.shape[0]) & (jj >= 0) & (jj < values.shape[1])
            v = np.where(ok,
                         values[np.clip(ii, 0, values.shape[0] - 1),
                                np.clip(jj, 0, values.shape[1] - 1)],
                         0.0)
            out = out + wi * wj * v
    return out


# --------------------------------------------------------------------------
# presets and file format

_PRESET_RE = re.compile(r"^([a-z_]+)(?::(.*))?$")


def _parse_params(text):
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise ParameterError(f"malformed parameter {item!r}")
        key, val = item.split("=", 1)
        out[key.strip()] = float(val)
    return out


def build_function(spec: str, dimension: int, size: int,
                   half_width: float) -> GridFunction:
    """Build a preset input function on the given grid.

    Presets: ``gauss:s=1``, ``box:a=1``, ``bump:a=1``, ``tent:a=1`` with an
    optional first-axis shift ``x0``, or ``file:<path>``.
    """
    if spec.startswith("file:"):
        f = read_grid_function(spec[5:])
        if f.geometry() != (dimension, size, half_width):
            raise GridMismatchError(
                f"file grid {f.geometry()} differs from requested "
                f"{(dimension, size, half_width)}")
        return f
    m = _PRESET_RE.match(spec)
    if not m:
        raise ParameterError(f"unrecognized function spec {spec!r}")
    name, params = m.group(1), _parse_params(m.group(2))
    x0 = params.get("x0", 0.0)
    shell = GridFunction(dimension, size, half_width,
                         np.zeros((size,) * dimension))
    ax = shell.axis()
    if dimension == 1:
        r = np.abs(ax - x0)
    else:
        r = np.hypot(ax[:, None] - x0, ax[None, :])
    if name == "gauss":
        s = params.get("s", 1.0)
        vals = np.exp(-r * r / (2.0 * s * s))
    elif name == "box":
        a = params.get("a", 1.0)
        vals = (r <= a).astype(float)
    elif name == "bump":
        a = params.get("a", 1.0)
        vals = np.zeros_like(r)
        inside = r < a
        vals[inside] = np.exp(-1.0 / (1.0 - (r[inside] / a) ** 2))
    elif name == "tent":
        a = params.get("a", 1.0)
        vals = np.maximum(0.0, 1.0 - r / a)
    else:
        raise ParameterError(f"unknown function preset {name!r}")
    return shell.with_values(vals)


def build_weight(spec: str, dimension: int, size: int,
                 half_width: float) -> Weight:
    """Weight presets: ``one``, ``power:alpha=0.5``, ``file:<path>``."""
    if spec.startswith("file:"):
        f = read_grid_function(spec[5:])
        if f.geometry() != (dimension, size, half_width):
            raise GridMismatchError("file grid differs from requested grid")
        return Weight(*f.geometry(), f.values)
    m = _PRESET_RE.match(spec)
    if not m:
        raise ParameterError(f"unrecognized weight spec {spec!r}")
    name, params = m.group(1), _parse_params(m.group(2))
    shell = GridFunction(dimension, size, half_width,
                         np.zeros((size,) * dimension))
    if name == "one":
        vals = np.ones((size,) * dimension)
    elif name == "power":
        alpha = params.get("alpha", 0.0)
        # cell centers never hit the origin, so |x|^alpha stays finite
        vals = np.maximum(shell.radius() ** alpha, WEIGHT_FLOOR)
    else:
        raise ParameterError(f"unknown weight preset {name!r}")
    return Weight(dimension, size, half_width, vals)


def write_grid_function(f: GridFunction, path) -> None:
    """Text format: header "n M L", then M^n values row-major, one per line."""
    if not f.is_real():
        raise ParameterError("only real grid functions can be written")
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{f.dimension} {f.size} {float(f.half_width)!r}\n")
        for v in f.values.ravel():
            fh.write(f"{float(v)!r}\n")


def read_grid_function(path) -> GridFunction:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ParameterError(f"{path}: malformed grid header")
        n, m, half = int(header[0]), int(header[1]), float(header[2])
        vals = np.loadtxt(fh, dtype=float, ndmin=1)
    if vals.size != m ** n:
        raise ParameterError(f"{path}: expected {m ** n} values, found {vals.size}")
    return GridFunction(n, m, half, vals.reshape((m,) * n))
