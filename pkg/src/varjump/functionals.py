"""Variation norms, jump counts, and jump suprema of sampled families.

Every functional here consumes one point's sample vector a_{t_1},...,a_{t_N}
and is exact for that finite sample: suprema over increasing subsequences
are maxima over index subsets, and the supremum of lambda*sqrt(N_lambda)
is attained at one of the pairwise difference magnitudes.
"""

from __future__ import annotations

import enum
import logging
import math

import numpy as np

from .errors import ParameterError
from .families import FamilySamples

log = logging.getLogger(__name__)

#: Frozen before the build: the smallest constant observed to bound
#: V_3(differences only) / sup_lambda lambda*sqrt(N_lambda) over the
#: exhaustive small-sequence search and the ladder families that maximize
#: the ratio.  Equals zeta(3/2)**(1/3), which bounds the ratio for every
#: finite sequence (sort the jump increments and sum d_k <= J/sqrt(k)).
JUMP_DOMINATION_CONSTANT = 1.377247075926314


class VariationMode(enum.Enum):
    """Whether the variation sum starts from |a_{t_0}|^rho or from zero."""

    WITH_INITIAL = "with_initial"
    NO_INITIAL = "no_initial"

    @classmethod
    def coerce(cls, value) -> "VariationMode":
        if isinstance(value, cls):
            return value
        key = str(value).replace("-", "_").lower()
        for member in cls:
            if member.value == key:
                return member
        raise ParameterError(f"unknown variation mode {value!r}")


# --------------------------------------------------------------------------
# rho-variation


def rho_variation(seq, rho: float, mode) -> float:
    """Maximum of (init + sum |a_{i_k} - a_{i_{k-1}}|^rho)^(1/rho) over all
    increasing index subsequences, init = |a_{i_0}|^rho in WITH_INITIAL
    mode and 0 otherwise.

    Dynamic programming over the end index; O(N^2) and exact.
    """
    a = np.asarray(seq, dtype=float).ravel()
    if a.size == 0:
        raise ParameterError("empty sequence")
    return float(rho_variation_batch(a[None, :], rho, mode)[0])


def rho_variation_batch(values, rho: float, mode) -> np.ndarray:
    """rho_variation applied to every row of a (points, params) array."""
    mode = VariationMode.coerce(mode)
    if not (isinstance(rho, (int, float)) and rho >= 1.0):
        raise ParameterError(f"rho must be >= 1, got {rho}")
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 2 or vals.shape[1] == 0:
        raise ParameterError("values must be a (points, params) array")
    rho = float(rho)
    k, n = vals.shape
    if mode is VariationMode.WITH_INITIAL:
        best = np.abs(vals) ** rho
    else:
        best = np.zeros((k, n))
    for i in range(1, n):
        stepped = best[:, :i] + np.abs(vals[:, i:i + 1] - vals[:, :i]) ** rho
        np.maximum(best[:, i], stepped.max(axis=1), out=best[:, i])
    return best.max(axis=1) ** (1.0 / rho)


# --------------------------------------------------------------------------
# jump counting


def lambda_jump(seq, lam: float) -> int:
    """Maximum number of disjoint pairs s_1<t_1<=s_2<t_2<=... with
    |a_{t_k} - a_{s_k}| > lam.

    Greedy earliest-endpoint scan; optimal for this interval packing.
    """
    if not lam > 0:
        raise ParameterError(f"lambda must be positive, got {lam}")
    a = np.asarray(seq, dtype=float).ravel()
    if a.size == 0:
        raise ParameterError("empty sequence")
    count = 0
    mn = mx = a[0]
    for v in a[1:]:
        # pairing with the running extremum dominates any other open start
        if v - mn > lam or mx - v > lam:
            count += 1
            mn = mx = v
        else:
            mn = min(mn, v)
            mx = max(mx, v)
    return count


class JumpProfile:
    """Exact graph of lambda -> N_lambda for one sample vector.

    breakpoints : sorted distinct positive pairwise difference magnitudes
    counts : jump count with criterion >= breakpoint (left limit of the
        strict count at that magnitude)
    sup_value : max over breakpoints of magnitude * sqrt(count), which is
        the exact supremum of lambda * sqrt(N_lambda) over lambda > 0
    """

    __slots__ = ("breakpoints", "counts", "sup_value")

    def __init__(self, breakpoints, counts):
        self.breakpoints = np.asarray(breakpoints, dtype=float)
        self.counts = np.asarray(counts, dtype=np.int64)
        if self.breakpoints.size:
            self.sup_value = float(
                np.max(self.breakpoints * np.sqrt(self.counts)))
        else:
            self.sup_value = 0.0

    def count_at(self, lam: float) -> int:
        """N_lambda with the strict criterion > lam."""
        # strictly-greater pairs survive exactly below the next breakpoint
        i = np.searchsorted(self.breakpoints, lam, side="right")
        if i >= self.breakpoints.size:
            return 0
        return int(self.counts[i])


def jump_profile(seq) -> JumpProfile:
    """Evaluate the jump count at every pairwise difference magnitude."""
    a = np.asarray(seq, dtype=float).ravel()
    if a.size < 2:
        raise ParameterError("need at least two samples")
    mags = np.unique(np.abs(a[None, :] - a[:, None]))
    mags = mags[mags > 0]
    if mags.size == 0:
        return JumpProfile(np.zeros(0), np.zeros(0, dtype=np.int64))
    rows = np.zeros(mags.size, dtype=np.intp)
    counts = _greedy_counts(a[None, :], rows, mags)
    return JumpProfile(mags, counts)


def _greedy_counts(vals, rows, mags, strict: bool = False) -> np.ndarray:
    """Greedy counts, one (row, mag) query per entry; criterion >= mag,
    or > mag when strict.

    Scans the columns once, gathering a single column per step, so memory
    stays O(#queries) no matter how many rows the batch has.
    """
    v = vals[rows, 0]
    mn = v.copy()
    mx = v.copy()
    counts = np.zeros(rows.size, dtype=np.int64)
    for t in range(1, vals.shape[1]):
        v = vals[rows, t]
        if strict:
            fire = (v - mn > mags) | (mx - v > mags)
        else:
            fire = (v - mn >= mags) | (mx - v >= mags)
        counts += fire
        np.minimum(mn, v, out=mn)
        np.maximum(mx, v, out=mx)
        mn[fire] = v[fire]
        mx[fire] = v[fire]
    return counts


def jump_count_batch(values, row_indices, thresholds,
                     strict: bool = True) -> np.ndarray:
    """Jump counts for many (row, threshold) queries against one sample
    matrix.  strict=True matches the > lambda definition; strict=False
    gives the left limit used by jump profiles."""
    vals = np.asarray(values, dtype=float)
    rows = np.asarray(row_indices, dtype=np.intp)
    mags = np.asarray(thresholds, dtype=float)
    if vals.ndim != 2 or rows.shape != mags.shape:
        raise ParameterError("need matching row and threshold vectors")
    return _greedy_counts(vals, rows, mags, strict=strict)


def jump_sup_batch(values, chunk_cells: int = 4_000_000) -> np.ndarray:
    """sup over lambda of lambda*sqrt(N_lambda) for every row, exact.

    Candidate magnitudes are the pairwise differences of each row; most
    are pruned by two value bounds before any greedy scan runs:
    N(m) <= TV/m gives value <= sqrt(m*TV), and N(m) <= N-1 gives
    value <= m*sqrt(N-1).  A probe at half the range tightens the
    incumbent first.
    """
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 2:
        raise ParameterError("values must be a (points, params) array")
    k, n = vals.shape
    out = np.zeros(k)
    if n < 2:
        return out
    ptp = vals.max(axis=1) - vals.min(axis=1)
    live = np.nonzero(ptp > 0)[0]
    if live.size == 0:
        return out
    tv = np.sum(np.abs(np.diff(vals, axis=1)), axis=1)
    best = ptp.copy()
    probe_mags = ptp[live] / 2.0
    probe = _greedy_counts(vals, live, probe_mags)
    best[live] = np.maximum(best[live], probe_mags * np.sqrt(probe))
    # magnitudes below this cannot beat the incumbent for their row
    floor = np.zeros(k)
    floor[live] = best[live] * np.maximum(best[live] / tv[live],
                                          1.0 / math.sqrt(n - 1))
    out[:] = best
    rows_per_chunk = max(1, chunk_cells // (n * n))
    for start in range(0, live.size, rows_per_chunk):
        rows = live[start:start + rows_per_chunk]
        sub = vals[rows]
        mags = np.abs(sub[:, None, :] - sub[:, :, None]).reshape(rows.size, -1)
        ridx, cidx = np.nonzero(mags >= floor[rows][:, None])
        if ridx.size == 0:
            continue
        pair_rows = rows[ridx]
        pair_mags = mags[ridx, cidx]
        keyed = np.unique(np.stack([pair_rows.astype(float), pair_mags]),
                          axis=1)
        pair_rows = keyed[0].astype(np.intp)
        pair_mags = keyed[1]
        counts = _greedy_counts(vals, pair_rows, pair_mags)
        np.maximum.at(out, pair_rows, pair_mags * np.sqrt(counts))
    return out


# --------------------------------------------------------------------------
# short 2-variation over dyadic octaves


def octave_index(params) -> np.ndarray:
    """j with t in [2^j, 2^(j+1)), nudged so exact powers of two land in
    the octave they open."""
    t = np.asarray(params, dtype=float)
    return np.floor(np.log2(t) + 1e-9).astype(int)


def short_variation(fam: FamilySamples, point: int) -> float:
    """Square-summed per-octave 2-variation at one kept grid point."""
    return float(short_variation_batch(fam)[point])


def short_variation_batch(fam: FamilySamples) -> np.ndarray:
    """Per-octave 2-variation (differences only), combined in l2 over
    octaves, for every kept point.

    Octaves with fewer than two samples contribute zero; a warning is
    logged because that usually means the parameter grid is too sparse.
    """
    octs = octave_index(fam.params)
    labels = np.unique(octs)
    if labels.size < 2:
        raise ParameterError("parameters must cover at least two octaves")
    total = np.zeros(fam.npoints)
    for j in labels:
        cols = octs == j
        if int(cols.sum()) < 2:
            log.warning("octave [2^%d, 2^%d) holds %d sample(s); "
                        "it contributes no short variation", j, j + 1,
                        int(cols.sum()))
            continue
        v = rho_variation_batch(fam.values[:, cols], 2.0,
                                VariationMode.NO_INITIAL)
        total += v * v
    return np.sqrt(total)


# --------------------------------------------------------------------------
# smooth-family variation bound


def smooth_variation_bound(t_grid, seq, deriv) -> tuple:
    """(lhs, rhs) with lhs the 2-variation (differences only) of the sample
    and rhs = 8 * sqrt(||a||_X * ||a'||_X), where ||.||_X is the trapezoid
    quadrature of (integral over [1,2] of |.|^2 dt/t)^(1/2)."""
    t = np.asarray(t_grid, dtype=float).ravel()
    a = np.asarray(seq, dtype=float).ravel()
    da = np.asarray(deriv, dtype=float).ravel()
    if t.size < 64:
        raise ParameterError("need at least 64 parameter samples")
    if t.size != a.size or t.size != da.size:
        raise ParameterError("sample and derivative lengths must match")
    if np.any(np.diff(t) <= 0):
        raise ParameterError("parameter grid must be strictly increasing")
    if t[0] < 1.0 - 1e-12 or t[-1] > 2.0 + 1e-12:
        raise ParameterError("parameter grid must lie inside [1, 2]")
    lhs = rho_variation(a, 2.0, VariationMode.NO_INITIAL)
    norm_a = math.sqrt(float(np.trapezoid(a * a / t, t)))
    norm_da = math.sqrt(float(np.trapezoid(da * da / t, t)))
    rhs = 8.0 * math.sqrt(norm_a * norm_da)
    return lhs, rhs
