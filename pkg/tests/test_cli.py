import json

import numpy as np
import pytest
from click.testing import CliRunner

from varjump import VERSION, read_family, read_grid_function
from varjump.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    result = runner.invoke(main, [str(a) for a in args])
    if result.exit_code != 0 and result.exception:
        raise AssertionError(f"cli failed: {result.output}"
                             ) from result.exception
    return result


def test_version(runner):
    result = invoke(runner, "--version")
    assert VERSION in result.output


def test_transform_variation_jump_pipeline(runner, tmp_path):
    fam_path = tmp_path / "fam.bin"
    result = invoke(runner, "transform", "--f", "gauss:s=1", "--M", 64,
                    "--L", 8, "--eps-grid", "4h:R/4:2", "--out", fam_path)
    assert "truncated family" in result.output
    fam = read_family(fam_path)
    assert fam.nparams == 5
    assert fam.npoints == 64

    var_path = tmp_path / "var.grid"
    result = invoke(runner, "variation", "--fam", fam_path, "--rho", 3,
                    "--mode", "no-initial", "--out", var_path)
    g = read_grid_function(var_path)
    assert g.size == 64
    assert np.all(g.values >= 0.0)

    jump_path = tmp_path / "jump.json"
    result = invoke(runner, "jump", "--fam", fam_path, "--out", jump_path)
    payload = json.loads(jump_path.read_text())
    assert payload["points"] == 64
    assert payload["sup_max"] >= payload["peak_profile"]["sup_value"] - 1e-12
    assert len(payload["peak_profile"]["breakpoints"]) \
        == len(payload["peak_profile"]["counts"])
    # the variation dominates the jump supremum pointwise, so the grid
    # written above must peak at least as high
    assert g.values.max() >= payload["sup_max"] - 1e-9


def test_transform_averaging_family(runner, tmp_path):
    fam_path = tmp_path / "avg.bin"
    invoke(runner, "transform", "--f", "box:a=1", "--M", 64, "--L", 8,
           "--family", "averaging", "--kernel", "constant:n=1",
           "--eps-grid", "4h:R/4:2", "--out", fam_path)
    assert read_family(fam_path).family == "averaging"


def test_cz_reports_properties(runner, tmp_path):
    report = tmp_path / "cz.json"
    result = invoke(runner, "cz", "--f", "box:a=1", "--M", 64, "--L", 8,
                    "--alpha", 0.5, "--report", report)
    payload = json.loads(report.read_text())
    assert payload["passed"]
    assert len(payload["properties"]) == 8
    assert result.output.count("PASS") == 8
    assert "FAIL" not in result.output


def test_weights_profile(runner, tmp_path):
    out = tmp_path / "w.json"
    result = invoke(runner, "weights", "--w", "power:alpha=0.5", "--p", 2,
                    "--depths", 2, "--base-size", 64, "--out", out)
    prof = json.loads(result.output)
    assert prof["verdict"] in ("stable", "growing")
    assert json.loads(out.read_text()) == prof


def test_run_writes_reports_and_figures(runner, tmp_path):
    cfg = {"experiments": [
        {"experiment": "demo-jump", "kind": "jump", "size": 64,
         "half_width": 8.0, "functions": ["gauss:s=1"],
         "eps_grid": "4h:R/4:2"},
        {"experiment": "demo-wb", "kind": "weight-boundary", "size": 64,
         "half_width": 8.0, "functions": ["gauss:s=1"],
         "eps_grid": "4h:R/4:2", "p": 2.0, "q": 5.0,
         "alphas": [0.0, 1.5], "depths": 2, "base_size": 64},
    ]}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out_dir = tmp_path / "out"
    result = invoke(runner, "run", "--config", cfg_path, "--out", out_dir)
    assert "demo-jump: suite max" in result.output
    assert "demo-wb: passed" in result.output
    for name in ("demo-jump", "demo-wb"):
        assert (out_dir / f"{name}.json").exists()
        assert (out_dir / f"{name}.csv").exists()
        assert (out_dir / f"{name}.png").stat().st_size > 0

    bare = tmp_path / "bare"
    invoke(runner, "run", "--config", cfg_path, "--out", bare,
           "--no-figures")
    assert not list(bare.glob("*.png"))


def test_verify_single_criterion(runner):
    result = invoke(runner, "verify", "--criteria", "2")
    assert "PASS criterion  2" in result.output
    assert "OK: 1/1" in result.output


def test_bad_inputs_exit_nonzero(runner, tmp_path):
    result = runner.invoke(main, ["variation", "--fam",
                                  str(tmp_path / "missing.bin"),
                                  "--out", str(tmp_path / "x.grid")])
    assert result.exit_code != 0
    result = runner.invoke(main, ["transform", "--f", "gauss:s=1",
                                  "--M", "64", "--L", "8",
                                  "--eps-grid", "h/8:R/4:2",
                                  "--out", str(tmp_path / "y.bin")])
    assert result.exit_code != 0
