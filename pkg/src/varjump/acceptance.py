"""Acceptance battery: ten self-contained checks behind `varjump verify`.

Each criterion returns (passed, detail) and pins its own tolerances and
seeds.  The discrete functionals are checked against independent oracles
written from the definitions (subset enumeration for the variation,
suffix dynamic programming for the pairing count), the operators against
closed forms and exact algebraic identities.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from . import dyadic, functionals as fn, grids, harness, muckenhoupt as mk
from . import operators as op
from .grids import build_function, build_weight, lp_norm, sample_at
from .kernels import constant_kernel, hilbert_kernel
from .functionals import JUMP_DOMINATION_CONSTANT, VariationMode


# --------------------------------------------------------------------------
# independent oracles for the discrete functionals


def _variation_oracle(vals: np.ndarray, rhos) -> dict:
    """Brute-force variation over every index subsequence.

    Returns {(rho, with_initial): (rows,) array}.  Exponential in the
    row length; rows must share one length.
    """
    b, n = vals.shape
    best = {(r, m): np.zeros(b) for r in rhos for m in (False, True)}
    for bits in range(1, 2 ** n):
        idx = np.nonzero([(bits >> i) & 1 for i in range(n)])[0]
        sub = vals[:, idx]
        d = np.abs(np.diff(sub, axis=1))
        a0 = np.abs(sub[:, 0])
        for r in rhos:
            s = (d ** r).sum(axis=1)
            np.maximum(best[(r, False)], s, out=best[(r, False)])
            np.maximum(best[(r, True)], s + a0 ** r, out=best[(r, True)])
    return {k: v ** (1.0 / k[0]) for k, v in best.items()}


def _jump_oracle(vals: np.ndarray, lams: np.ndarray) -> np.ndarray:
    """Optimal disjoint-pair count by suffix recursion, one lambda per row.

    d[i] = max(d[i+1], 1 + d[j]) over j > i with |a_j - a_i| > lambda;
    proves the greedy count is not just feasible but maximal.
    """
    p, n = vals.shape
    d = np.zeros((p, n))
    for i in range(n - 2, -1, -1):
        gap = np.abs(vals[:, i + 1:] - vals[:, i:i + 1]) > lams[:, None]
        cand = np.where(gap, 1.0 + d[:, i + 1:], 0.0).max(axis=1)
        d[:, i] = np.maximum(d[:, i + 1], cand)
    return d[:, 0].astype(np.int64)


def _integer_corpus(length: int) -> np.ndarray:
    grid = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    prod = itertools.product(range(5), repeat=length)
    idx = np.fromiter(itertools.chain.from_iterable(prod), dtype=np.int64)
    return grid[idx.reshape(-1, length)]


def criterion_01() -> tuple:
    """Functionals agree with brute-force oracles."""
    rhos = (1.0, 2.0, 3.0)
    lam_grid = np.arange(1, 17) * 0.25
    checked = 0
    # complete enumeration over {0,+-1,+-2} through length 5
    for n in range(1, 6):
        vals = _integer_corpus(n)
        oracle = _variation_oracle(vals, rhos)
        for (rho, initial), want in oracle.items():
            mode = (VariationMode.WITH_INITIAL if initial
                    else VariationMode.NO_INITIAL)
            got = fn.rho_variation_batch(vals, rho, mode)
            if not np.allclose(got, want, rtol=1e-12, atol=1e-12):
                i = int(np.argmax(np.abs(got - want)))
                return False, (f"variation mismatch len={n} rho={rho} "
                               f"initial={initial} row={vals[i]}")
        checked += vals.shape[0]
        if n >= 2:
            b = vals.shape[0]
            rows = np.repeat(np.arange(b), lam_grid.size)
            lams = np.tile(lam_grid, b)
            greedy = fn.jump_count_batch(vals, rows, lams, strict=True)
            want = _jump_oracle(vals[rows], lams)
            if not np.array_equal(greedy, want):
                i = int(np.argmax(greedy != want))
                return False, (f"jump mismatch len={n} "
                               f"row={vals[rows[i]]} lam={lams[i]}")
    # randomized sweep through length 12
    rng = np.random.default_rng(101)
    lengths = rng.integers(2, 13, size=10_000)
    for n in range(2, 13):
        b = int(np.sum(lengths == n))
        if b == 0:
            continue
        vals = rng.standard_normal((b, n)) * rng.uniform(0.5, 3.0, (b, 1))
        oracle = _variation_oracle(vals, rhos)
        for (rho, initial), want in oracle.items():
            mode = (VariationMode.WITH_INITIAL if initial
                    else VariationMode.NO_INITIAL)
            got = fn.rho_variation_batch(vals, rho, mode)
            if not np.allclose(got, want, rtol=1e-10, atol=1e-12):
                return False, f"random variation mismatch len={n} rho={rho}"
        rows = np.repeat(np.arange(b), 8)
        i_idx = rng.integers(0, n, size=rows.size)
        j_idx = rng.integers(0, n, size=rows.size)
        mags = np.abs(vals[rows, i_idx] - vals[rows, j_idx])
        lams = np.where(np.arange(rows.size) % 2 == 0, mags,
                        mags * rng.uniform(0.2, 1.0, rows.size))
        greedy = fn.jump_count_batch(vals, rows, lams, strict=True)
        want = _jump_oracle(vals[rows], lams)
        if not np.array_equal(greedy, want):
            return False, f"random jump mismatch len={n}"
        checked += b
        # supremum pruning must reproduce the exact per-row profile
        sup = fn.jump_sup_batch(vals)
        for i in range(0, b, max(1, b // 40)):
            want_sup = fn.jump_profile(vals[i]).sup_value
            if abs(sup[i] - want_sup) > 1e-12 * (1.0 + want_sup):
                return False, f"jump sup mismatch len={n} row={i}"
    return True, f"oracle agreement on {checked} sequences"


def criterion_02() -> tuple:
    """Monotonicity and pointwise-domination battery."""
    rng = np.random.default_rng(202)
    rhos = [1.0, 1.5, 2.0, 3.0, 4.0]
    cases = 0
    for n in (4, 9, 17, 33):
        vals = rng.standard_normal((250, n)) * 2.0
        prev = {m: None for m in VariationMode}
        for rho in rhos:
            for mode in VariationMode:
                cur = fn.rho_variation_batch(vals, rho, mode)
                if prev[mode] is not None:
                    bad = cur > prev[mode] * (1.0 + 1e-12) + 1e-12
                    if np.any(bad):
                        return False, f"V_rho increased in rho at len={n}"
                prev[mode] = cur
        sup = np.abs(vals).max(axis=1)
        for rho in (1.0, 2.0, 3.0):
            v = fn.rho_variation_batch(vals, rho, VariationMode.WITH_INITIAL)
            if np.any(sup > v * (1.0 + 1e-12) + 1e-12):
                return False, f"sup exceeded V_rho at len={n}"
        lam_grid = np.linspace(0.1, 1.2, 8) * np.median(np.ptp(vals, axis=1))
        rows = np.repeat(np.arange(vals.shape[0]), lam_grid.size)
        counts = fn.jump_count_batch(vals, rows,
                                     np.tile(lam_grid, vals.shape[0]))
        counts = counts.reshape(vals.shape[0], lam_grid.size)
        if np.any(np.diff(counts, axis=1) > 0):
            return False, f"N_lambda increased in lambda at len={n}"
        cases += vals.shape[0]
    # truncation / averaging families: max |member| never beats the variation
    kern = hilbert_kernel()
    fams = []
    for spec in ("gauss:s=1", "box:a=1"):
        f = build_function(spec, 1, 256, 8.0)
        eps = op.geometric_grid(4.0 * f.h, f.reach / 2.0, 8)
        fams.append(op.truncated_family(f, kern, eps))
    g = build_function("gauss:s=1", 1, 256, 8.0)
    t = op.geometric_grid(2.0 * g.h, g.reach / 2.0, 8)
    fams.append(op.averaging_family(g, constant_kernel(1), t))
    for fam in fams:
        astar = op.maximal_truncated(fam).values.ravel()
        for rho in (2.0, 3.0):
            v = fn.rho_variation_batch(fam.values, rho,
                                       VariationMode.WITH_INITIAL)
            if np.any(astar > v * (1.0 + 1e-12) + 1e-12):
                return False, f"A* exceeded V_rho on {fam.family}"
    return True, f"{cases} random cases and {len(fams)} families monotone"


def criterion_03() -> tuple:
    """3-variation is dominated by the jump supremum: the k-th largest
    jump of any subsequence is at most sup/sqrt(k), so the ratio stays
    below zeta(3/2)^(1/3)."""
    rng = np.random.default_rng(303)
    maxima = {}
    for n in (16, 32, 64):
        vals = rng.standard_normal((1000, n))
        sup = fn.jump_sup_batch(vals)
        v3 = fn.rho_variation_batch(vals, 3.0, VariationMode.NO_INITIAL)
        ratios = v3 / sup
        maxima[n] = float(ratios.max())
        if maxima[n] > JUMP_DOMINATION_CONSTANT + 1e-12:
            return False, (f"ratio {maxima[n]:.6f} beyond constant "
                           f"{JUMP_DOMINATION_CONSTANT} at len={n}")
    if not maxima[64] < 1.25 * maxima[16]:
        return False, (f"max ratio grew from {maxima[16]:.4f} (len 16) "
                       f"to {maxima[64]:.4f} (len 64)")
    return True, (f"max ratios {maxima[16]:.4f}/{maxima[32]:.4f}/"
                  f"{maxima[64]:.4f} vs constant "
                  f"{JUMP_DOMINATION_CONSTANT:.4f}")


def criterion_04() -> tuple:
    """Truncated singular integral: closed-form value, shell additivity,
    near-isometry."""
    kern = hilbert_kernel()
    # value against (1/pi) log 3 at x = 2 for the unit box input
    f = build_function("box:a=1", 1, 4096, 8.0)
    tf = op.truncated_singular(f, kern, 0.5)
    want = np.log(3.0) / np.pi
    got = float(sample_at(tf, 2.0))
    err_val = abs(got - want)
    if err_val > 1e-3:
        return False, f"boundary value error {err_val:.2e} > 1e-3"
    # shells partition the truncation exactly
    g = build_function("gauss:s=1", 1, 1024, 8.0)
    total = op.truncated_singular(g, kern, 0.25).values
    acc = np.zeros_like(total)
    j = -2
    while 2.0 ** j < g.reach:
        acc = acc + op.dyadic_shell(g, kern, j).values
        j += 1
    err_add = float(np.max(np.abs(acc - total))
                    / max(np.max(np.abs(total)), 1e-30))
    if err_add > 1e-8:
        return False, f"shell additivity error {err_add:.2e} > 1e-8"
    # near-isometry on a well-resolved Gaussian
    u = build_function("gauss:s=0.25", 1, 4096, 16.0)
    ratio = lp_norm(op.truncated_singular(u, kern, u.h / 2.0), 2.0) \
        / lp_norm(u, 2.0)
    if not 0.98 <= ratio <= 1.02:
        return False, f"isometry ratio {ratio:.5f} outside [0.98, 1.02]"
    return True, (f"value err {err_val:.1e}, additivity err {err_add:.1e}, "
                  f"isometry ratio {ratio:.5f}")


def criterion_05() -> tuple:
    """Square partition of unity and band telescoping."""
    for n, m, hw in ((1, 4096, 8.0), (2, 64, 4.0)):
        ax = np.fft.fftfreq(m, d=1.0 / m) * np.pi / hw
        if n == 1:
            r = np.abs(ax)
        else:
            r = np.hypot(*np.meshgrid(ax, ax, indexing="ij")).ravel()
        r = r[r > 0]
        rmin, rmax = r.min(), r.max()
        mid = r[(r >= 4.0 * rmin) & (r <= rmax / 4.0)]
        lo = int(np.floor(np.log2(rmin))) - 2
        hi = int(np.ceil(np.log2(rmax))) + 2
        total = np.zeros_like(mid)
        for lev in range(lo, hi + 1):
            total += np.asarray(op.projection_profile(mid / 2.0 ** lev)) ** 2
        err = float(np.max(np.abs(total - 1.0)))
        if err > 1e-10:
            return False, f"partition defect {err:.2e} at n={n}"
    # doubled band projections rebuild a band-limited input
    rng = np.random.default_rng(505)
    m, hw = 4096, 8.0
    xi = np.abs(np.fft.fftfreq(m, d=1.0 / m)) * np.pi / hw
    keep = (xi >= 4.0 * np.pi / hw) & (xi <= xi.max() / 4.0)
    coeff = np.where(keep, np.fft.fft(rng.standard_normal(m)), 0.0)
    f = grids.GridFunction(1, m, hw, np.fft.ifft(coeff).real)
    acc = np.zeros(m)
    for lev in op.projection_levels(f):
        acc = acc + op.lp_projection(op.lp_projection(f, lev), lev).values
    err_tel = float(np.linalg.norm(acc - f.values)
                    / np.linalg.norm(f.values))
    if err_tel > 1e-8:
        return False, f"telescoping error {err_tel:.2e} > 1e-8"
    return True, f"partition exact to 1e-10, telescoping err {err_tel:.1e}"


def _cz_case(f, alpha: float) -> str | None:
    res = dyadic.cz_decompose(f, alpha)
    cell = f.h ** f.dimension
    vals = f.values
    scale = float(np.max(np.abs(vals))) + 1.0
    l1 = float(np.sum(np.abs(vals))) * cell
    covered = np.zeros_like(vals, dtype=bool)
    measure = 0.0
    for q in res.cubes:
        sl = q.slices()
        if covered[sl].any():
            return "cubes overlap"
        covered[sl] = True
        measure += q.cell_count(f.dimension) * cell
        avg = float(np.mean(np.abs(vals[sl])))
        if not (alpha < avg <= 2.0 ** f.dimension * alpha + 1e-12 * alpha):
            return f"cube average {avg} outside (alpha, 2^n alpha]"
        bad_q = res.bad.values[sl]
        if abs(float(np.sum(bad_q))) > 1e-12 * scale * bad_q.size:
            return "bad part mean not zero on a cube"
    if measure > l1 / alpha * (1.0 + 1e-12):
        return "total cube measure above ||f||_1 / alpha"
    if np.any(np.abs(vals[~covered]) > alpha * (1.0 + 1e-12)):
        return "|f| above alpha off the cubes"
    if np.max(np.abs(res.good.values)) > 2.0 ** f.dimension * alpha * (
            1.0 + 1e-12):
        return "good part above 2^n alpha"
    if float(np.sum(np.abs(res.bad.values))) * cell > 2.0 * l1 * (
            1.0 + 1e-12):
        return "bad part above 2 ||f||_1"
    resid = res.good.values + res.bad.values - vals
    if np.max(np.abs(resid)) > 1e-12 * scale:
        return "good + bad does not rebuild f"
    return None


def criterion_06() -> tuple:
    """Stopping-time decomposition properties on random inputs."""
    rng = np.random.default_rng(606)
    t0 = time.monotonic()
    cases = 0
    for k in range(100):
        if k % 2 == 0:
            f = grids.GridFunction(1, 512, 8.0, rng.standard_normal(512))
        else:
            f = grids.GridFunction(2, 32, 4.0,
                                   rng.standard_normal((32, 32)))
        spots = rng.integers(0, f.size, size=3)
        vals = f.values.copy()
        if f.dimension == 1:
            vals[spots] *= 25.0
        else:
            vals[spots, spots[::-1] % f.size] *= 25.0
        f = f.with_values(vals)
        base = float(np.mean(np.abs(vals)))
        for mult in (1.2, 2.0, 4.0):
            msg = _cz_case(f, mult * base)
            if msg is not None:
                return False, f"case {k} alpha={mult}*mean: {msg}"
            cases += 1
    # martingale algebra: telescoping, orthogonality, Pythagoras
    for f in (grids.GridFunction(1, 256, 8.0, rng.standard_normal(256)),
              grids.GridFunction(2, 16, 4.0,
                                 rng.standard_normal((16, 16)))):
        lat = dyadic.lattice_of(f)
        diffs = [dyadic.martingale_difference(f, lev).values
                 for lev in range(1, lat.top_level + 1)]
        top = dyadic.conditional_expectation(f, lat.top_level).values
        resid = f.values - top + np.sum(diffs, axis=0)
        if np.max(np.abs(resid)) > 1e-10:
            return False, "martingale differences do not telescope"
        cell = f.h ** f.dimension
        for a in range(len(diffs)):
            for b in range(a + 1, len(diffs)):
                ip = abs(float(np.sum(diffs[a] * diffs[b]))) * cell
                if ip > 1e-10:
                    return False, f"D_{a + 1} not orthogonal to D_{b + 1}"
        square = float(np.sum(np.stack(diffs) ** 2)) * cell
        flat = float(np.sum((f.values - top) ** 2)) * cell
        if abs(square - flat) > 1e-10 * max(flat, 1.0):
            return False, "Pythagoras identity violated"
    dt = time.monotonic() - t0
    return True, f"{cases} decompositions clean in {dt:.1f}s"


def criterion_07() -> tuple:
    """Weight characteristics: exact unit case, duality, refinement
    verdicts for power weights at index 2."""
    one = build_weight("one", 1, 256, 8.0)
    fam = mk.dyadic_cube_family(one)
    c = mk.ap_characteristic(one, 2.0, fam)
    if c != 1.0:
        return False, f"characteristic of the unit weight is {c}, not 1"
    rng = np.random.default_rng(707)
    for dim, m, hw in ((1, 64, 8.0), (2, 16, 4.0)):
        shape = (m,) * dim
        w = grids.Weight(dim, m, hw,
                         np.exp(rng.standard_normal(shape) * 0.7))
        cubes = mk.dyadic_cube_family(w)
        for p in (1.5, 2.0, 3.0):
            pp = p / (p - 1.0)
            lhs = mk.ap_characteristic(w, p, cubes) ** (1.0 / (p - 1.0))
            rhs = mk.ap_characteristic(mk.dual_weight(w, p), pp, cubes)
            if abs(lhs - rhs) > 1e-10 * rhs:
                return False, f"duality gap at p={p}, n={dim}"
    verdicts = {}
    for alpha in (-0.5, 0.0, 0.5, 1.5, 2.5):
        prof = mk.refinement_profile(f"power:alpha={alpha}", 2.0, 1, 512,
                                     8.0, depths=3)
        verdicts[alpha] = prof["verdict"]
    want = {-0.5: "stable", 0.0: "stable", 0.5: "stable",
            1.5: "growing", 2.5: "growing"}
    if verdicts != want:
        return False, f"refinement verdicts {verdicts} != {want}"
    return True, ("unit weight exact, duality to 1e-10, verdicts "
                  + "/".join(verdicts[a] for a in sorted(verdicts)))


def sample_shifted_pair(f, r: float) -> np.ndarray:
    """f(x - r) - f(x + r) on the grid, the two-point kernel application."""
    return op.sample_shifted(f, [r]) - op.sample_shifted(f, [-r])


def criterion_08() -> tuple:
    """Shell derivative matches finite differences and the two-point
    closed form."""
    kern = hilbert_kernel()
    delta, t0 = 1e-3, 1.3
    worst = 0.0
    for spec in ("gauss:s=1", "gauss:s=1,x0=2", "bump:a=1"):
        f = build_function(spec, 1, 1024, 8.0)
        for j in (-1, 0, 1):
            fam = op.shell_family(f, kern, j, [t0 - delta, t0, t0 + delta])
            fd = (fam.values[:, 2] - fam.values[:, 0]) / (2.0 * delta)
            sd = op.shell_derivative(f, kern, j, t0).values.ravel()
            curv = np.abs(fam.values[:, 2] - 2.0 * fam.values[:, 1]
                          + fam.values[:, 0]) / delta ** 2
            bound = 5.0 * delta * max(1.0, float(curv.max()),
                                      float(np.abs(sd).max()))
            err = float(np.max(np.abs(fd - sd)))
            worst = max(worst, err / bound)
            if err > bound:
                return False, (f"finite-difference gap {err:.2e} > "
                               f"{bound:.2e} for {spec}, j={j}")
            r = 2.0 ** j * t0
            closed = -(sample_shifted_pair(f, r)) / (np.pi * t0)
            err_cf = float(np.max(np.abs(sd - closed)))
            if err_cf > 1e-10 * (1.0 + float(np.max(np.abs(closed)))):
                return False, f"closed form gap {err_cf:.2e} for {spec}"
    return True, f"worst finite-difference ratio {worst:.3f} of budget"


def criterion_09() -> tuple:
    """Discrete 2-variation obeys the endpoint interpolation bound."""
    rng = np.random.default_rng(909)
    t = np.linspace(1.0, 2.0, 256)
    worst = 0.0
    for k in range(1000):
        if k % 2 == 0:
            coef = rng.standard_normal(6) * (3.0 ** -np.arange(6))
            a = np.polynomial.polynomial.polyval(t, coef)
            da = np.polynomial.polynomial.polyval(
                t, coef[1:] * np.arange(1, 6))
        else:
            freq = rng.uniform(0.5, 6.0, 3)
            amp = rng.standard_normal(3)
            phase = rng.uniform(0, 2 * np.pi, 3)
            a = (amp[:, None] * np.sin(freq[:, None] * t[None, :]
                                       + phase[:, None])).sum(axis=0)
            da = (amp[:, None] * freq[:, None]
                  * np.cos(freq[:, None] * t[None, :]
                           + phase[:, None])).sum(axis=0)
        lhs, rhs = fn.smooth_variation_bound(t, a, da)
        if lhs > rhs * (1.0 + 1e-12):
            return False, f"bound violated at case {k}: {lhs} > {rhs}"
        if rhs > 0:
            worst = max(worst, lhs / rhs)
    return True, f"1000 smooth families, worst lhs/rhs = {worst:.3f}"


def _suite_maxima(size: int, per_octave: int) -> tuple:
    cfg = harness.ExperimentConfig(
        experiment=f"stab-{size}-{per_octave}", dimension=1, size=size,
        half_width=8.0, kernel="hilbert", functions=("smooth",),
        weights=("one",), p=2.0, rho=3.0,
        eps_grid=f"0.03125:8:{per_octave}")
    jump = harness.run_jump_ratio(cfg).suite_max
    var = harness.run_variation_ratio(cfg).suite_max
    return jump, var


def criterion_10() -> tuple:
    """Suite maxima drift under grid doubling and parameter densification
    stays below 2 percent."""
    base = _suite_maxima(2048, 8)
    fine = _suite_maxima(4096, 8)
    dense = _suite_maxima(4096, 16)
    drifts = {
        "jump/grid": abs(fine[0] - base[0]) / base[0],
        "var/grid": abs(fine[1] - base[1]) / base[1],
        "jump/density": abs(dense[0] - fine[0]) / fine[0],
        "var/density": abs(dense[1] - fine[1]) / fine[1],
    }
    bad = {k: v for k, v in drifts.items() if v >= 0.02}
    if bad:
        return False, f"drift at or above 2%: {bad}"
    worst = max(drifts.values())
    return True, f"largest relative drift {worst:.2e} (< 2e-2)"


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float


CRITERIA = (
    (1, "functional oracles", criterion_01),
    (2, "monotonicity", criterion_02),
    (3, "jump domination", criterion_03),
    (4, "singular integral values", criterion_04),
    (5, "spectral partition", criterion_05),
    (6, "stopping-time decomposition", criterion_06),
    (7, "weight characteristics", criterion_07),
    (8, "shell derivative", criterion_08),
    (9, "interpolation bound", criterion_09),
    (10, "refinement stability", criterion_10),
)


def run_all(selection=None) -> list:
    """Run the acceptance battery; selection is an iterable of numbers."""
    wanted = set(selection) if selection else {num for num, _, _ in CRITERIA}
    results = []
    for num, name, func in CRITERIA:
        if num not in wanted:
            continue
        t0 = time.monotonic()
        try:
            passed, detail = func()
        except Exception as exc:  # a crash is a failure, not an abort
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(CriterionResult(num, name, passed, detail,
                                       time.monotonic() - t0))
    return results
