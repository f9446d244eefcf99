"""Muckenhoupt characteristics over dyadic cube families and the weight
predicates gating the operator-norm experiments.

Characteristics are maxima over a finite cube family, hence lower bounds
for the true supremum; membership questions are settled by watching the
estimate under refinement instead (bounded growth = inside the class).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import DyadicLattice, _block_view, block_means
from .errors import ParameterError
from .grids import GridFunction, Weight, build_weight

#: default ceiling for "characteristic is finite" in predicate checks
DEFAULT_THRESHOLD = 1e6

#: growth ratio between the two deepest refinements below which the
#: characteristic counts as stable
STABLE_GROWTH = 1.05


@dataclass(frozen=True)
class CubeFamily:
    """All dyadic cubes of the given levels (side 2^level cells).

    Levels start at 2 so every cube holds at least 4 cells per axis,
    keeping single-cell degeneracies out of the averages.
    """

    dimension: int
    size: int
    levels: tuple

    def __post_init__(self):
        lat = DyadicLattice(self.dimension, self.size)
        lv = tuple(sorted(set(int(j) for j in self.levels)))
        if not lv:
            raise ParameterError("cube family needs at least one level")
        if lv[0] < 2:
            raise ParameterError("cubes must span at least 4 cells per axis")
        lat.check_level(lv[-1])
        object.__setattr__(self, "levels", lv)

    def matches(self, w: GridFunction) -> None:
        if (w.dimension, w.size) != (self.dimension, self.size):
            raise ParameterError("cube family built for a different grid")


def dyadic_cube_family(w: GridFunction, min_level: int = 2,
                       max_level: int | None = None) -> CubeFamily:
    top = DyadicLattice(w.dimension, w.size).top_level
    if max_level is None:
        max_level = top
    return CubeFamily(w.dimension, w.size,
                      tuple(range(min_level, max_level + 1)))


def _block_min(values: np.ndarray, level: int) -> np.ndarray:
    view = _block_view(values, level)
    if values.ndim == 1:
        return view.min(axis=1)
    return view.min(axis=(2, 3))


def ap_characteristic(w: Weight, p: float, cubes: CubeFamily) -> float:
    """max over the family of (avg_Q w) * (avg_Q w^(1-p'))^(p-1)."""
    if not p > 1:
        raise ParameterError("p must exceed 1; A_1 has its own operation")
    cubes.matches(w)
    dual = w.values ** (-1.0 / (p - 1.0))
    best = 1.0
    for level in cubes.levels:
        prod = block_means(w.values, level) * block_means(dual, level) ** (p - 1.0)
        best = max(best, float(prod.max()))
    return best


def a1_characteristic(w: Weight, cubes: CubeFamily) -> float:
    """max over the family of (avg_Q w) / (min_Q w)."""
    cubes.matches(w)
    best = 1.0
    for level in cubes.levels:
        ratio = block_means(w.values, level) / _block_min(w.values, level)
        best = max(best, float(ratio.max()))
    return best


def characteristic(w: Weight, index: float, cubes: CubeFamily) -> float:
    """A_index characteristic with the index-1 case routed to A_1."""
    if index < 1.0 - 1e-12:
        raise ParameterError(f"class index {index} below 1")
    if abs(index - 1.0) <= 1e-12:
        return a1_characteristic(w, cubes)
    return ap_characteristic(w, index, cubes)


def dual_weight(w: Weight, p: float) -> Weight:
    """w^(1-p') = w^(-1/(p-1)), the weight dual to w at exponent p."""
    if not p > 1:
        raise ParameterError("dual weight needs p > 1")
    return Weight(w.dimension, w.size, w.half_width,
                  w.values ** (-1.0 / (p - 1.0)))


def check_condition(p: float, q: float, w: Weight, which: str,
                    cubes: CubeFamily | None = None,
                    threshold: float = DEFAULT_THRESHOLD) -> bool:
    """Predicates gating the weighted norm inequalities.

    which = "i":  q' <= p < inf, p != 1, and w in A_{p/q'} (estimated by
    characteristic <= threshold over the family; index 1 routes to A_1).
    which = "ii": 1 < p <= q and w^(-1/(p-1)) in A_{p'/q'}.
    """
    if not q > 1:
        raise ParameterError("q must exceed 1")
    if cubes is None:
        cubes = dyadic_cube_family(w)
    q_dual = q / (q - 1.0)
    if which == "i":
        if p == 1 or p < q_dual:
            return False
        return characteristic(w, p / q_dual, cubes) <= threshold
    if which == "ii":
        if not 1.0 < p <= q:
            return False
        p_dual = p / (p - 1.0)
        return characteristic(dual_weight(w, p), p_dual / q_dual,
                              cubes) <= threshold
    raise ParameterError(f"condition selector must be 'i' or 'ii', "
                         f"got {which!r}")


def power_weight_in_class(alpha: float, dimension: int, index: float) -> bool:
    """Classical membership of |x|^alpha in A_index on R^n."""
    if index < 1.0:
        raise ParameterError("class index below 1")
    if abs(index - 1.0) <= 1e-12:
        return -dimension < alpha <= 0.0
    return -dimension < alpha < dimension * (index - 1.0)


def refinement_profile(weight_spec: str, p: float, dimension: int,
                       base_size: int, half_width: float,
                       depths: int = 3) -> dict:
    """Characteristic of a preset weight on grids M, 2M, 4M, ...

    Doubling the grid deepens the cube family near the singular set (the
    smallest admitted cube halves), so a weight outside its class shows
    monotone growth while members stabilize.  Verdict compares the last
    two depths against the stability ratio.
    """
    if depths < 2:
        raise ParameterError("need at least two depths to compare")
    values = []
    for d in range(depths):
        size = base_size * 2 ** d
        w = build_weight(weight_spec, dimension, size, half_width)
        values.append(characteristic(w, p, dyadic_cube_family(w)))
    ratios = [values[i + 1] / values[i] for i in range(len(values) - 1)]
    verdict = "stable" if ratios[-1] < STABLE_GROWTH else "growing"
    return {
        "weight": weight_spec,
        "index": p,
        "sizes": [base_size * 2 ** d for d in range(depths)],
        "characteristic_per_depth": values,
        "growth_ratios": ratios,
        "verdict": verdict,
    }
