"""Experiment configurations and the top-level empirical runs.

Each run assembles operators, functionals, and weights into one report:
norm-ratio experiments (jump or variation numerators), pointwise
inequality checks, and the power-weight boundary sweep.  Runs are pure
functions of the configuration; the only nondeterminism is the report
timestamp, which the config hash excludes.
"""

from __future__ import annotations

import dataclasses
import datetime
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import functionals as fn
from . import operators as op
from .errors import ParameterError
from .grids import GridFunction, build_function, build_weight, weighted_lp_norm
from .kernels import parse_kernel
from .muckenhoupt import (check_condition, power_weight_in_class,
                          refinement_profile)
from .report import (SCHEMA_VERSION, RatioReport, RatioRow, VERSION,
                     config_hash)

#: default function suites; smooth members are dilates and translates of
#: a Gaussian and a compact bump, rough members have corners or jumps
SMOOTH_SUITE = ("gauss:s=1", "gauss:s=0.5", "gauss:s=2", "gauss:s=1,x0=2",
                "gauss:s=1,x0=-1.5", "bump:a=1", "bump:a=2", "bump:a=1,x0=1")
ROUGH_SUITE = ("box:a=1", "box:a=0.5", "tent:a=1", "tent:a=2")

_KINDS = ("jump", "variation", "pointwise", "weight-boundary")


def parse_scale(token, h: float, reach: float) -> float:
    """Resolve a scale token: a number, a multiple of h ("4h", "h/2"),
    or a fraction of the box diameter ("R", "R/2")."""
    if isinstance(token, (int, float)):
        return float(token)
    tok = token.strip()
    try:
        if tok.startswith("R"):
            rest = tok[1:]
            if not rest:
                return reach
            if rest.startswith("/"):
                return reach / float(rest[1:])
        elif tok.startswith("h"):
            rest = tok[1:]
            if not rest:
                return h
            if rest.startswith("/"):
                return h / float(rest[1:])
        elif tok.endswith("h"):
            return float(tok[:-1]) * h
        else:
            return float(tok)
    except ValueError:
        pass
    raise ParameterError(f"cannot parse scale token {token!r}")


def parse_param_grid(spec: str, h: float, reach: float) -> np.ndarray:
    """Geometric parameter grid from a "lo:hi:per_octave" spec."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ParameterError(f"grid spec {spec!r} is not lo:hi:per_octave")
    lo = parse_scale(parts[0], h, reach)
    hi = parse_scale(parts[1], h, reach)
    per_octave = int(parts[2])
    return op.geometric_grid(lo, hi, per_octave)


@dataclass
class ExperimentConfig:
    """Everything a run needs; serializable to and from JSON."""

    experiment: str = "exp"
    kind: str = "jump"
    dimension: int = 1
    size: int = 1024
    half_width: float = 8.0
    kernel: str = "hilbert"
    functions: tuple = ("smooth",)
    weights: tuple = ("one",)
    p: float = 2.0
    q: float = 2.0
    rho: float = 3.0
    variation_mode: str = "with_initial"
    family: str = "truncated"
    eps_grid: str = "4h:R/2:8"
    alphas: tuple = (-0.5, 0.0, 0.5, 1.5, 2.5)
    depths: int = 3
    base_size: int = 256
    seed: int = 0
    refine: bool = False
    out: str | None = None

    def __post_init__(self):
        self.functions = tuple(self.functions)
        self.weights = tuple(self.weights)
        self.alphas = tuple(float(a) for a in self.alphas)

    def validate(self) -> None:
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown experiment kind {self.kind!r}")
        if self.family not in ("truncated", "averaging"):
            raise ParameterError(f"unknown family {self.family!r}")
        if self.p < 1 or self.q <= 1 or self.rho < 1:
            raise ParameterError("need p >= 1, q > 1, rho >= 1")
        fn.VariationMode.coerce(self.variation_mode)
        parse_kernel(self.kernel)
        if not self.functions:
            raise ParameterError("function suite is empty")
        self.params()

    def grid_shell(self) -> GridFunction:
        return GridFunction(self.dimension, self.size, self.half_width,
                            np.zeros((self.size,) * self.dimension))

    def params(self) -> np.ndarray:
        shell = self.grid_shell()
        return parse_param_grid(self.eps_grid, shell.h, shell.reach)

    def function_specs(self) -> tuple:
        out = []
        for entry in self.functions:
            if entry == "smooth":
                out.extend(SMOOTH_SUITE)
            elif entry == "rough":
                out.extend(ROUGH_SUITE)
            else:
                out.append(entry)
        return tuple(out)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(d) - known
        if extra:
            raise ParameterError(f"unknown config fields {sorted(extra)}")
        return cls(**d)

    def with_updates(self, **kw) -> "ExperimentConfig":
        return ExperimentConfig.from_dict({**self.to_dict(), **kw})


def load_configs(path) -> list:
    """Read one config or an {"experiments": [...]} collection."""
    with open(path, "r", encoding="utf-8") as fh:
        d = json.load(fh)
    if isinstance(d, dict) and "experiments" in d:
        return [ExperimentConfig.from_dict(e) for e in d["experiments"]]
    return [ExperimentConfig.from_dict(d)]


def _metadata(cfg: ExperimentConfig) -> dict:
    return {
        "config": cfg.to_dict(),
        "config_hash": config_hash(cfg.to_dict()),
        "version": VERSION,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def _build_family(cfg, f, kernel, params):
    if cfg.family == "averaging":
        return op.averaging_family(f, kernel, params)
    return op.truncated_family(f, kernel, params)


def _statistic_grid(cfg, kind, fam):
    if kind == "jump":
        flat = fn.jump_sup_batch(fam.values)
    else:
        flat = fn.rho_variation_batch(fam.values, cfg.rho,
                                      cfg.variation_mode)
    shape = (cfg.size,) * cfg.dimension
    return GridFunction(cfg.dimension, cfg.size, cfg.half_width,
                        flat.reshape(shape))


def _run_ratio(cfg: ExperimentConfig, kind: str) -> RatioReport:
    cfg.validate()
    kernel = parse_kernel(cfg.kernel)
    params = cfg.params()
    rows = []
    rho = cfg.rho if kind == "variation" else None
    weight_cache = {}
    for wspec in cfg.weights:
        w = build_weight(wspec, cfg.dimension, cfg.size, cfg.half_width)
        in_class = (check_condition(cfg.p, cfg.q, w, "i")
                    or check_condition(cfg.p, cfg.q, w, "ii"))
        weight_cache[wspec] = (w, in_class)
    for fspec in cfg.function_specs():
        f = build_function(fspec, cfg.dimension, cfg.size, cfg.half_width)
        if float(np.max(np.abs(f.values))) == 0.0:
            for wspec in cfg.weights:
                rows.append(RatioRow(fspec, wspec, cfg.p, rho, 0.0, 0.0,
                                     None, weight_cache[wspec][1],
                                     skipped=True, note="zero function"))
            continue
        fam = _build_family(cfg, f, kernel, params)
        stat = _statistic_grid(cfg, kind, fam)
        for wspec in cfg.weights:
            w, in_class = weight_cache[wspec]
            num = weighted_lp_norm(stat, w, cfg.p)
            den = weighted_lp_norm(f, w, cfg.p)
            note = "" if in_class else "outside-class"
            rows.append(RatioRow(fspec, wspec, cfg.p, rho, num, den,
                                 num / den, in_class, note=note))
    usable = [r.ratio for r in rows if not r.skipped and r.in_class]
    suite_max = max(usable) if usable else None
    refinement = None
    if cfg.refine:
        lo, hi, per = cfg.eps_grid.split(":")
        denser = cfg.with_updates(
            eps_grid=f"{lo}:{hi}:{2 * int(per)}", refine=False)
        other = _run_ratio(denser, kind)
        if suite_max and other.suite_max:
            refinement = {
                "kind": "density",
                "base": suite_max,
                "refined": other.suite_max,
                "delta_fraction": abs(other.suite_max - suite_max) / suite_max,
            }
    return RatioReport(cfg.experiment, kind, tuple(rows), suite_max,
                       refinement, _metadata(cfg))


def run_jump_ratio(cfg: ExperimentConfig) -> RatioReport:
    """L^p(w) norm of the jump supremum of the family, over the norm of
    the input, for every (function, weight) pair in the suite."""
    return _run_ratio(cfg, "jump")


def run_variation_ratio(cfg: ExperimentConfig) -> RatioReport:
    """Same ratio with the rho-variation as numerator."""
    return _run_ratio(cfg, "variation")


# --------------------------------------------------------------------------
# pointwise checks


def _octave_histogram(params) -> dict:
    octs = fn.octave_index(params)
    labels, counts = np.unique(octs, return_counts=True)
    return dict(zip(labels.tolist(), counts.tolist()))


def _conversion_scan(values, sub_values, s2, chunk_rows: int = 256):
    """Max empirical constant of the jump-conversion bound.

    For every point and every pairwise magnitude m of its full-family
    samples: lhs = m * sqrt(count at criterion >= m), denominator =
    short variation + m * sqrt(strict count above m/3 on the dyadic
    subfamily).  Returns (max constant, pairs scanned, anomalies), where
    an anomaly is lhs > 0 against a zero denominator.
    """
    k, n = values.shape
    best = 0.0
    scanned = 0
    anomalies = 0
    for start in range(0, k, chunk_rows):
        sub = values[start:start + chunk_rows]
        c = sub.shape[0]
        mags = np.abs(sub[:, None, :] - sub[:, :, None]).reshape(c, -1)
        ridx, cidx = np.nonzero(mags > 0)
        if ridx.size == 0:
            continue
        rows = (ridx + start).astype(np.intp)
        m = mags[ridx, cidx]
        full_cnt = fn.jump_count_batch(values, rows, m, strict=False)
        sub_cnt = fn.jump_count_batch(sub_values, rows, m / 3.0, strict=True)
        lhs = m * np.sqrt(full_cnt)
        denom = s2[rows] + m * np.sqrt(sub_cnt)
        ok = denom > 0
        anomalies += int(np.count_nonzero(~ok & (lhs > 0)))
        if np.any(ok):
            best = max(best, float((lhs[ok] / denom[ok]).max()))
        scanned += int(ridx.size)
    return best, scanned, anomalies


def _short_variation_domination(cfg, f, kernel, fam):
    """Per-octave 2-variation against the square function built from
    ball maximal operators of twice-projected pieces."""
    octs = fn.octave_index(fam.params)
    shell = cfg.grid_shell()
    t_lo = int(math.ceil(math.log2(shell.h)))
    t_hi = int(math.floor(math.log2(shell.reach)))
    t_grid = 2.0 ** np.arange(t_lo, t_hi + 1)
    sq = np.zeros((cfg.size,) * cfg.dimension)
    for level in op.projection_levels(f):
        piece = op.lp_projection(op.lp_projection(f, level), level)
        mo = op.rough_maximal(piece, kernel, t_grid)
        sq += mo.values ** 2
    rhs = np.sqrt(sq).reshape(-1)
    best = 0.0
    floor_rhs = max(1e-14, 1e-10 * float(rhs.max()))
    for j in np.unique(octs):
        cols = octs == j
        if int(cols.sum()) < 2:
            continue
        lhs = fn.rho_variation_batch(fam.values[:, cols], 2.0, "no_initial")
        ok = rhs > floor_rhs
        if np.any(ok):
            best = max(best, float((lhs[ok] / rhs[ok]).max()))
    return best


def run_pointwise_checks(cfg: ExperimentConfig) -> dict:
    """Pointwise inequality rows on the truncation family.

    Per function: the jump-conversion constant (full-family jumps against
    short variation plus dyadic-subfamily jumps at a third of the
    threshold), the exact maximal-vs-variation domination, and the
    short-variation square-function constant.
    """
    cfg.validate()
    params = cfg.params()
    hist = _octave_histogram(params)
    full = [j for j, c in hist.items() if c >= 8]
    if len(full) < 4:
        raise ParameterError(
            "pointwise checks need >= 4 octaves with >= 8 samples each")
    kernel = parse_kernel(cfg.kernel)
    rows = []
    for fspec in cfg.function_specs():
        f = build_function(fspec, cfg.dimension, cfg.size, cfg.half_width)
        fam = op.truncated_family(f, kernel, params)
        s2 = fn.short_variation_batch(fam)
        sub_idx = fam.dyadic_param_indices()
        conv_c, scanned, anomalies = _conversion_scan(
            fam.values, np.ascontiguousarray(fam.values[:, sub_idx]), s2)
        astar = np.abs(fam.values).max(axis=1)
        vrho = fn.rho_variation_batch(fam.values, cfg.rho,
                                      cfg.variation_mode)
        live = vrho > 0
        max_dom = float((astar[live] / vrho[live]).max()) if live.any() else 0.0
        sq_c = _short_variation_domination(cfg, f, kernel, fam)
        rows.append({
            "function": fspec,
            "conversion_constant": conv_c,
            "conversion_pairs": scanned,
            "conversion_anomalies": anomalies,
            "maximal_over_variation": max_dom,
            "square_function_constant": sq_c,
        })
    passed = (all(r["conversion_anomalies"] == 0 for r in rows)
              and all(r["maximal_over_variation"] <= 1.0 + 1e-12
                      for r in rows))
    return {
        "schema": SCHEMA_VERSION,
        "experiment": cfg.experiment,
        "kind": "pointwise",
        "rows": rows,
        "summary": {
            "max_conversion_constant": max(r["conversion_constant"]
                                           for r in rows),
            "max_square_function_constant": max(r["square_function_constant"]
                                                for r in rows),
            "passed": passed,
        },
        "metadata": _metadata(cfg),
    }


# --------------------------------------------------------------------------
# weight boundary sweep


def run_weight_boundary(cfg: ExperimentConfig) -> dict:
    """Power-weight sweep across the boundary of the routed weight class.

    The class index is p/q' from the first weighted-norm condition; each
    alpha gets a refinement profile (stable inside the class, growing
    outside, judged against the classical membership range) and an
    informational jump ratio at the run grid.
    """
    cfg.validate()
    q_dual = cfg.q / (cfg.q - 1.0)
    if cfg.p < q_dual:
        raise ParameterError("boundary sweep needs p >= q'")
    index = cfg.p / q_dual
    kernel = parse_kernel(cfg.kernel)
    params = cfg.params()
    fspec = cfg.function_specs()[0]
    f = build_function(fspec, cfg.dimension, cfg.size, cfg.half_width)
    fam = op.truncated_family(f, kernel, params)
    stat = _statistic_grid(cfg, "jump", fam)
    rows = []
    for alpha in cfg.alphas:
        wspec = f"power:alpha={alpha}"
        prof = refinement_profile(wspec, index, cfg.dimension,
                                  cfg.base_size, cfg.half_width, cfg.depths)
        expected = power_weight_in_class(alpha, cfg.dimension, index)
        w = build_weight(wspec, cfg.dimension, cfg.size, cfg.half_width)
        num = weighted_lp_norm(stat, w, cfg.p)
        den = weighted_lp_norm(f, w, cfg.p)
        rows.append({
            "alpha": alpha,
            "index": index,
            "expected_in_class": expected,
            "verdict": prof["verdict"],
            "verdict_correct": prof["verdict"] == ("stable" if expected
                                                   else "growing"),
            "characteristic_per_depth": prof["characteristic_per_depth"],
            "growth_ratios": prof["growth_ratios"],
            "jump_ratio": num / den,
        })
    return {
        "schema": SCHEMA_VERSION,
        "experiment": cfg.experiment,
        "kind": "weight-boundary",
        "rows": rows,
        "summary": {
            "index": index,
            "function": fspec,
            "passed": all(r["verdict_correct"] for r in rows),
        },
        "metadata": _metadata(cfg),
    }


# --------------------------------------------------------------------------
# dispatch


def run_experiment(cfg: ExperimentConfig):
    if cfg.kind == "jump":
        return run_jump_ratio(cfg)
    if cfg.kind == "variation":
        return run_variation_ratio(cfg)
    if cfg.kind == "pointwise":
        return run_pointwise_checks(cfg)
    if cfg.kind == "weight-boundary":
        return run_weight_boundary(cfg)
    raise ParameterError(f"unknown experiment kind {cfg.kind!r}")


def _experiment_id(report) -> str:
    if isinstance(report, RatioReport):
        return report.experiment
    return report["experiment"]


def run_many(cfgs) -> list:
    """Run experiments, in processes when VARJUMP_THREADS allows, and
    merge deterministically by experiment id."""
    cfgs = list(cfgs)
    workers = int(os.environ.get("VARJUMP_THREADS", "1") or "1")
    if workers > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(cfgs))) as ex:
            reports = list(ex.map(run_experiment, cfgs))
    else:
        reports = [run_experiment(c) for c in cfgs]
    return sorted(reports, key=_experiment_id)
