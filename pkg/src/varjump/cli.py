"""Command-line entry points.

Subcommands mirror the library surface: ``transform`` samples operator
families, ``variation``/``jump`` evaluate the discrete functionals on a
stored family, ``cz`` runs the stopping-time decomposition with property
checks, ``weights`` profiles a weight characteristic under refinement,
``run`` executes experiment configs, and ``verify`` runs the acceptance
battery.  Exit status is zero exactly when every asserted check passes.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import acceptance, functionals as fn, harness
from . import operators as op
from .dyadic import cz_decompose
from .families import read_family, write_family
from .grids import GridFunction, build_function, write_grid_function
from .kernels import parse_kernel
from .muckenhoupt import refinement_profile
from .report import VERSION, RatioReport, emit_report

_GRID_DEFAULTS = {1: (4096, 8.0), 2: (256, 4.0)}


def _fill_grid(dimension, size, half_width):
    m0, l0 = _GRID_DEFAULTS[dimension]
    return (m0 if size is None else size,
            l0 if half_width is None else half_width)


def _grid_options(fun):
    fun = click.option("--L", "half_width", type=float, default=None,
                       help="box half width (default 8 in 1d, 4 in 2d)")(fun)
    fun = click.option("--M", "size", type=int, default=None,
                       help="cells per axis (default 4096 in 1d, 256 in 2d)"
                       )(fun)
    fun = click.option("--n", "dimension", type=click.IntRange(1, 2),
                       default=1, show_default=True,
                       help="ambient dimension")(fun)
    return fun


def _full_grid_family(fam):
    if fam.npoints != fam.size ** fam.dimension:
        raise click.ClickException("family does not cover the full grid")
    return fam


@click.group()
@click.version_option(VERSION, prog_name="varjump")
def main():
    """Jump and variation experiments for families of singular integrals."""


@main.command()
@click.option("--f", "fspec", required=True,
              help="input preset, e.g. gauss:s=1 or box:a=1")
@_grid_options
@click.option("--kernel", default="hilbert", show_default=True,
              help="kernel preset or file:<path>")
@click.option("--family", "family_kind",
              type=click.Choice(["truncated", "averaging"]),
              default="truncated", show_default=True)
@click.option("--eps-grid", default="4h:R/2:8", show_default=True,
              help="parameter grid as lo:hi:per_octave")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def transform(fspec, dimension, size, half_width, kernel, family_kind,
              eps_grid, out):
    """Sample an operator family over a parameter grid, write it binary."""
    size, half_width = _fill_grid(dimension, size, half_width)
    f = build_function(fspec, dimension, size, half_width)
    kern = parse_kernel(kernel)
    params = harness.parse_param_grid(eps_grid, f.h, f.reach)
    if family_kind == "averaging":
        fam = op.averaging_family(f, kern, params)
    else:
        fam = op.truncated_family(f, kern, params)
    write_family(fam, out)
    click.echo(f"wrote {out}: {fam.family} family, {fam.nparams} members "
               f"on {fam.npoints} points")


@main.command()
@click.option("--fam", "fam_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--rho", type=float, default=3.0, show_default=True)
@click.option("--mode", type=click.Choice(["with-initial", "no-initial"]),
              default="with-initial", show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def variation(fam_path, rho, mode, out):
    """Per-point rho-variation of a stored family, written as a grid."""
    fam = _full_grid_family(read_family(fam_path))
    vals = fn.rho_variation_batch(fam.values, rho, mode)
    g = GridFunction(fam.dimension, fam.size, fam.half_width,
                     vals.reshape((fam.size,) * fam.dimension))
    write_grid_function(g, out)
    click.echo(f"wrote {out}: max {vals.max():.6g}, mean {vals.mean():.6g}")


@main.command()
@click.option("--fam", "fam_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def jump(fam_path, out):
    """Jump supremum per point and the threshold profile at the peak."""
    fam = read_family(fam_path)
    sup = fn.jump_sup_batch(fam.values)
    peak = int(np.argmax(sup))
    prof = fn.jump_profile(fam.values[peak])
    payload = {
        "family": fam.family,
        "points": fam.npoints,
        "params": np.asarray(fam.params).tolist(),
        "sup_max": float(sup.max()),
        "sup_mean": float(sup.mean()),
        "argmax_point": peak,
        "peak_profile": {
            "breakpoints": prof.breakpoints.tolist(),
            "counts": prof.counts.tolist(),
            "sup_value": prof.sup_value,
        },
    }
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    click.echo(f"wrote {out}: sup max {payload['sup_max']:.6g} "
               f"at point {peak}")


def _cz_rows(f, alpha, res):
    cell = f.h ** f.dimension
    vals = f.values
    l1 = float(np.sum(np.abs(vals))) * cell
    covered = np.zeros_like(vals, dtype=bool)
    measure = 0.0
    avg_lo, avg_hi, bad_mean = np.inf, 0.0, 0.0
    for q in res.cubes:
        sl = q.slices()
        covered[sl] = True
        measure += q.cell_count(f.dimension) * cell
        avg = float(np.mean(np.abs(vals[sl])))
        avg_lo, avg_hi = min(avg_lo, avg), max(avg_hi, avg)
        bad_mean = max(bad_mean, abs(float(np.mean(res.bad.values[sl]))))
    off = float(np.max(np.abs(vals[~covered]))) if (~covered).any() else 0.0
    two_n = 2.0 ** f.dimension
    scale = float(np.max(np.abs(vals))) + 1.0
    rows = [
        ("cube measure <= ||f||_1/alpha", measure, l1 / alpha,
         measure <= l1 / alpha * (1 + 1e-12)),
        ("|f| <= alpha off cubes", off, alpha, off <= alpha * (1 + 1e-12)),
        ("cube averages > alpha", avg_lo if res.cubes else np.nan, alpha,
         (not res.cubes) or avg_lo > alpha),
        ("cube averages <= 2^n alpha", avg_hi, two_n * alpha,
         avg_hi <= two_n * alpha * (1 + 1e-12)),
        ("||good||_inf <= 2^n alpha", float(np.max(np.abs(res.good.values))),
         two_n * alpha,
         float(np.max(np.abs(res.good.values))) <= two_n * alpha
         * (1 + 1e-12)),
        ("||bad||_1 <= 2 ||f||_1",
         float(np.sum(np.abs(res.bad.values))) * cell, 2.0 * l1,
         float(np.sum(np.abs(res.bad.values))) * cell
         <= 2.0 * l1 * (1 + 1e-12)),
        ("bad part cube means zero", bad_mean, 1e-12 * scale,
         bad_mean <= 1e-12 * scale),
        ("good + bad rebuilds f",
         float(np.max(np.abs(res.good.values + res.bad.values - vals))),
         1e-12 * scale,
         float(np.max(np.abs(res.good.values + res.bad.values - vals)))
         <= 1e-12 * scale),
    ]
    return [{"property": name, "value": value, "bound": bound,
             "passed": bool(ok)} for name, value, bound, ok in rows]


@main.command()
@click.option("--f", "fspec", required=True, help="input preset")
@_grid_options
@click.option("--alpha", type=float, required=True)
@click.option("--report", "report_path", required=True,
              type=click.Path(dir_okay=False))
def cz(fspec, dimension, size, half_width, alpha, report_path):
    """Height-alpha decomposition with per-property pass/fail."""
    size, half_width = _fill_grid(dimension, size, half_width)
    f = build_function(fspec, dimension, size, half_width)
    res = cz_decompose(f, alpha)
    rows = _cz_rows(f, alpha, res)
    payload = {
        "function": fspec,
        "alpha": alpha,
        "cubes": len(res.cubes),
        "root_selected": res.root_selected,
        "properties": rows,
        "passed": all(r["passed"] for r in rows),
    }
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    for r in rows:
        mark = "PASS" if r["passed"] else "FAIL"
        click.echo(f"{mark} {r['property']}: {r['value']:.6g} "
                   f"(bound {r['bound']:.6g})")
    if not payload["passed"]:
        sys.exit(1)


@main.command()
@click.option("--w", "wspec", required=True,
              help="weight preset, e.g. power:alpha=0.5")
@click.option("--p", type=float, default=2.0, show_default=True,
              help="class index")
@click.option("--depths", type=int, default=3, show_default=True)
@click.option("--n", "dimension", type=click.IntRange(1, 2), default=1,
              show_default=True)
@click.option("--base-size", type=int, default=256, show_default=True)
@click.option("--L", "half_width", type=float, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="also write the JSON here")
def weights(wspec, p, depths, dimension, base_size, half_width, out):
    """Characteristic of a weight on successively refined grids."""
    if half_width is None:
        half_width = _GRID_DEFAULTS[dimension][1]
    prof = refinement_profile(wspec, p, dimension, base_size, half_width,
                              depths)
    blob = json.dumps(prof, indent=1, sort_keys=True)
    click.echo(blob)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(blob + "\n")


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True,
              type=click.Path(file_okay=False))
@click.option("--figures/--no-figures", default=True, show_default=True)
def run(config_path, out_dir, figures):
    """Run experiment configs; write JSON, CSV, and figure per report."""
    cfgs = harness.load_configs(config_path)
    reports = harness.run_many(cfgs)
    os.makedirs(out_dir, exist_ok=True)
    failed = []
    for rep in reports:
        if isinstance(rep, RatioReport):
            name, note = rep.experiment, f"suite max {rep.suite_max:.6g}"
        else:
            name = rep["experiment"]
            ok = rep["summary"]["passed"]
            note = "passed" if ok else "FAILED"
            if not ok:
                failed.append(name)
        base = os.path.join(out_dir, name)
        emit_report(rep, base + ".json", "json")
        emit_report(rep, base + ".csv", "csv")
        if figures:
            from .figures import render_report

            render_report(rep, base)
        click.echo(f"{name}: {note}")
    if failed:
        raise SystemExit(1)


@main.command()
@click.option("--criteria", default=None,
              help="comma-separated criterion numbers, e.g. 1,4,10")
def verify(criteria):
    """Run the acceptance battery; exit 0 only when everything passes."""
    selection = None
    if criteria:
        selection = [int(tok) for tok in criteria.replace(" ", "").split(",")
                     if tok]
    results = acceptance.run_all(selection)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        click.echo(f"{status} criterion {r.number:2d} ({r.name}): "
                   f"{r.detail} [{r.seconds:.1f}s]")
    ok = bool(results) and all(r.passed for r in results)
    total = sum(r.seconds for r in results)
    good = sum(1 for r in results if r.passed)
    click.echo(f"{'OK' if ok else 'FAILED'}: {good}/{len(results)} "
               f"criteria in {total:.1f}s")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
