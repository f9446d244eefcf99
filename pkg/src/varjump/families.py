"""Sampled one-parameter families of grid functions.

A family stores, for every grid point kept, the values of a family
a_t(x) along a strictly increasing parameter axis t_1 < ... < t_N.
Values are laid out point-major, shape (npoints, nparams), so variation
and jump scans stream along the fast axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .grids import GridFunction

_MAGIC = b"VJFAM01\n"


@dataclass(frozen=True)
class FamilySamples:
    """Values of a one-parameter family at selected grid points.

    Attributes
    ----------
    dimension, size, half_width :
        Geometry of the grid the family was sampled on.
    family : str
        A short tag naming the generating construction.
    params : ndarray, shape (nparams,)
        Strictly increasing positive parameter values.
    values : ndarray, shape (npoints, nparams)
        Row i holds a_t(x_i) for the i-th kept grid point, row-major
        point order.
    """

    dimension: int
    size: int
    half_width: float
    family: str
    params: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        params = np.asarray(self.params, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if params.ndim != 1 or params.size < 1:
            raise ParameterError("params must be a nonempty 1-d array")
        if np.any(params <= 0) or np.any(np.diff(params) <= 0):
            raise ParameterError("params must be positive and strictly increasing")
        if values.ndim != 2 or values.shape[1] != params.size:
            raise ParameterError(
                f"values shape {values.shape} does not match {params.size} params")
        if not (np.all(np.isfinite(params)) and np.all(np.isfinite(values))):
            raise ParameterError("family samples must be finite")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "values", values)

    @property
    def npoints(self) -> int:
        return self.values.shape[0]

    @property
    def nparams(self) -> int:
        return self.params.size

    def member(self, j: int) -> GridFunction:
        """The j-th member of the family as a grid function.

        Only available when every grid point was kept.
        """
        expect = self.size ** self.dimension
        if self.npoints != expect:
            raise ParameterError(
                f"family holds {self.npoints} points, full grid needs {expect}")
        vals = self.values[:, j].reshape((self.size,) * self.dimension)
        return GridFunction(self.dimension, self.size, self.half_width, vals)

    def dyadic_param_indices(self) -> np.ndarray:
        """Indices of the members whose parameter is closest to each power
        of two inside [params[0], params[-1]], deduplicated, ascending."""
        lo = int(np.ceil(np.log2(self.params[0]) - 1e-9))
        hi = int(np.floor(np.log2(self.params[-1]) + 1e-9))
        if hi < lo:
            return np.zeros(0, dtype=int)
        targets = 2.0 ** np.arange(lo, hi + 1)
        idx = np.searchsorted(self.params, targets)
        idx = np.clip(idx, 0, self.nparams - 1)
        left = np.clip(idx - 1, 0, self.nparams - 1)
        use_left = (np.abs(self.params[left] - targets)
                    <= np.abs(self.params[idx] - targets))
        idx = np.where(use_left, left, idx)
        return np.unique(idx)


def write_family(fam: FamilySamples, path) -> None:
    """Binary format: magic, "n M L npoints nparams family" header line,
    then params and values as little-endian float64."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        header = (f"{fam.dimension} {fam.size} {float(fam.half_width)!r} "
                  f"{fam.npoints} {fam.nparams} {fam.family}\n")
        fh.write(header.encode("ascii"))
        fh.write(fam.params.astype("<f8").tobytes())
        fh.write(np.ascontiguousarray(fam.values, dtype="<f8").tobytes())


def read_family(path) -> FamilySamples:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ParameterError(f"{path}: not a family file")
        header = fh.readline().decode("ascii").split(None, 5)
        if len(header) != 6:
            raise ParameterError(f"{path}: malformed family header")
        n, m = int(header[0]), int(header[1])
        half = float(header[2])
        npoints, nparams = int(header[3]), int(header[4])
        family = header[5].strip()
        params = np.frombuffer(fh.read(8 * nparams), dtype="<f8")
        body = fh.read(8 * npoints * nparams)
        if len(body) != 8 * npoints * nparams:
            raise ParameterError(f"{path}: truncated family file")
        values = np.frombuffer(body, dtype="<f8").reshape(npoints, nparams)
    return FamilySamples(n, m, half, family, params.copy(), values.copy())
