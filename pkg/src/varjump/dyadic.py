"""Dyadic cubes on the grid box: conditional expectations, martingale
differences, and the Calderon-Zygmund decomposition.

Level j cubes have sidelength 2^j cells; level 0 is the single cell and
the top level is the whole box.  Cube averages are plain block means, so
every identity below (telescoping, zero means, f = good + bad) holds on
the grid up to rounding only.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .grids import GridFunction

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DyadicLattice:
    """The nested cube structure over an M^n grid (M a power of two)."""

    dimension: int
    size: int

    def __post_init__(self):
        if self.size < 2 or self.size & (self.size - 1):
            raise ParameterError("lattice size must be a power of two >= 2")
        if self.dimension not in (1, 2):
            raise ParameterError("lattice supports dimensions 1 and 2")

    @property
    def top_level(self) -> int:
        return int(math.log2(self.size))

    def cubes_at(self, level: int) -> int:
        """Number of cubes per axis at a level."""
        self.check_level(level)
        return self.size >> level

    def check_level(self, level: int) -> None:
        if not 0 <= level <= self.top_level:
            raise ParameterError(
                f"level {level} outside [0, {self.top_level}]")


def lattice_of(f: GridFunction) -> DyadicLattice:
    return DyadicLattice(f.dimension, f.size)


@dataclass(frozen=True)
class Cube:
    """One dyadic cube: level plus per-axis block index."""

    level: int
    index: tuple

    def slices(self) -> tuple:
        side = 1 << self.level
        return tuple(slice(i * side, (i + 1) * side) for i in self.index)

    def cell_count(self, dimension: int) -> int:
        return (1 << self.level) ** dimension


def _block_view(values: np.ndarray, level: int) -> np.ndarray:
    """Reshape so the trailing axes enumerate the cells of each cube."""
    side = 1 << level
    if values.ndim == 1:
        return values.reshape(-1, side)
    m = values.shape[0]
    return (values.reshape(m // side, side, m // side, side)
            .transpose(0, 2, 1, 3))


def block_means(values: np.ndarray, level: int) -> np.ndarray:
    """Per-cube means at a level: shape (M/2^j,) or (M/2^j, M/2^j)."""
    view = _block_view(values, level)
    if values.ndim == 1:
        return view.mean(axis=1)
    return view.mean(axis=(2, 3))


def _expand(per_cube: np.ndarray, level: int) -> np.ndarray:
    side = 1 << level
    out = np.repeat(per_cube, side, axis=0)
    if per_cube.ndim == 2:
        out = np.repeat(out, side, axis=1)
    return out


def conditional_expectation(f: GridFunction, level: int) -> GridFunction:
    """Average of f over the level-j cube containing each point."""
    lattice_of(f).check_level(level)
    if level == 0:
        return f
    return f.with_values(_expand(block_means(f.values, level), level))


def martingale_difference(f: GridFunction, level: int) -> GridFunction:
    """E_j f - E_{j-1} f; zero mean over every level-j cube."""
    lat = lattice_of(f)
    lat.check_level(level)
    lat.check_level(level - 1)
    fine = conditional_expectation(f, level - 1)
    coarse = conditional_expectation(f, level)
    return f.with_values(coarse.values - fine.values)


@dataclass(frozen=True)
class CZResult:
    """Decomposition f = good + bad at height alpha.

    cubes holds the selected maximal family; good equals the cube average
    of f on each selected cube and f elsewhere; bad parts per cube have
    zero mean and live on their cube.
    """

    alpha: float
    cubes: tuple
    good: GridFunction
    bad: GridFunction
    root_selected: bool = field(default=False)

    def part(self, i: int) -> GridFunction:
        """The i-th per-cube piece of the bad function."""
        q = self.cubes[i]
        vals = np.zeros_like(self.bad.values)
        sl = q.slices()
        vals[sl] = self.bad.values[sl]
        return self.bad.with_values(vals)

    def union_measure(self) -> float:
        """Total measure of the selected cubes."""
        h_cell = self.good.h ** self.good.dimension
        return h_cell * sum(q.cell_count(self.good.dimension)
                            for q in self.cubes)


def cz_decompose(f: GridFunction, alpha: float,
                 lattice: DyadicLattice | None = None) -> CZResult:
    """Select maximal dyadic cubes with average |f| above alpha, top down.

    When even the whole box exceeds alpha the root is selected (flagged
    via root_selected and a logged warning) and the usual maximality
    properties degenerate.
    """
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if not f.is_real():
        raise ParameterError("decomposition expects a real function")
    lat = lattice_of(f)
    if lattice is not None and lattice != lat:
        raise ParameterError("lattice does not match the function's grid")
    absf = np.abs(f.values)
    top = lat.top_level
    cubes = []
    root_selected = False
    covered = np.zeros((1,) * f.dimension, dtype=bool)
    for level in range(top, -1, -1):
        avg = block_means(absf, level)
        sel = (avg > alpha) & ~covered
        if level == top and bool(sel.reshape(-1)[0]):
            root_selected = True
            log.warning("height %.3g is below the global average; "
                        "the root cube is selected", alpha)
        for idx in np.argwhere(sel):
            cubes.append(Cube(level, tuple(int(i) for i in idx)))
        covered = covered | sel
        if level > 0:
            covered = _expand(covered, 1)
    good_vals = f.values.astype(float).copy()
    for q in cubes:
        sl = q.slices()
        good_vals[sl] = np.mean(f.values[sl])
    bad_vals = f.values - good_vals
    return CZResult(float(alpha), tuple(cubes),
                    f.with_values(good_vals), f.with_values(bad_vals),
                    root_selected)
