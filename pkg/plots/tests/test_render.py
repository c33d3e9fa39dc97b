"""Secondary-component tests: all four figure kinds render from a canonical
run's outputs (generated through the lab's CLI, its only interface here),
the convergence annotation matches an independent fit, the region polygon
matches the admissibility inequalities, and rendering is idempotent."""

import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

PLOTS_DIR = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PLOTS_DIR))

from figures import ColumnError, FigureSpec, render  # noqa: E402
from region import CONSTRAINTS, admissible, region_polygon  # noqa: E402
import render as render_cli  # noqa: E402


def run_lab(experiment, config, out_dir, *extra):
    cfg_path = out_dir / f"{experiment}.json"
    cfg_path.write_text(json.dumps(config))
    cmd = [
        sys.executable, "-m", "dkg_lab.cli", experiment,
        "--config", str(cfg_path), "--out", str(out_dir), *extra,
    ]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return out_dir


@pytest.fixture(scope="session")
def canonical(tmp_path_factory):
    """One cheap canonical run of each producing experiment."""
    root = tmp_path_factory.mktemp("canonical")
    run_lab("simulate", {"n": 32, "dt": 0.05, "T": 0.5, "l": 0.2, "k": 0.25,
                         "seed": 1}, root)
    run_lab("converge", {"n": 32, "dt": 0.1, "T": 0.5, "dt_levels": 4,
                         "l": -1.0, "k": 1.0, "amplitude": 0.5}, root)
    run_lab("probe-star2", {"n": 16, "n_t": 16, "trials": 8, "l": 0.2,
                            "k": 0.3}, root)
    return {
        "trajectory": next(root.glob("trajectory_*.csv")),
        "converge": next(root.glob("converge_*.csv")),
        "probe": next(root.glob("probe_*.csv")),
        "probe_summary": next(
            p for p in root.glob("summary_*.json")
            if json.loads(p.read_text())["experiment"] == "probe-star2"
        ),
    }


def write_spec(tmp_path, **kwargs):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(kwargs))
    return path


def test_timeseries_renders(canonical, tmp_path):
    out = tmp_path / "ts.png"
    spec = FigureSpec("timeseries", [str(canonical["trajectory"])], str(out),
                      options={"columns": ["charge", "phi_h_k"]})
    meta = render(spec)
    assert out.exists() and out.stat().st_size > 0
    assert meta["columns"] == ["charge", "phi_h_k"]


def test_charge_drift_timeseries(canonical, tmp_path):
    out = tmp_path / "drift.png"
    spec = FigureSpec("timeseries", [str(canonical["trajectory"])], str(out),
                      options={"columns": ["charge"], "drift": True})
    render(spec)
    assert out.exists()


def test_convergence_annotation_matches_fit(canonical, tmp_path):
    out = tmp_path / "conv.png"
    spec = FigureSpec("convergence", [str(canonical["converge"])], str(out))
    meta = render(spec)
    assert out.exists()
    # independent fit of the same CSV
    rows = list(csv.DictReader(open(canonical["converge"])))
    dts = np.array([float(r["dt"]) for r in rows])
    errs = np.array([float(r["error"]) for r in rows])
    fit = float(np.polyfit(np.log(dts), np.log(errs), 1)[0])
    assert abs(meta["slopes"][0] - fit) <= 0.05
    assert f"{meta['slopes'][0]:.2f}" in meta["annotation"]


def test_convergence_synthetic_exact_slope(tmp_path):
    # exact-order fixture: error = 0.3 * dt^3.7
    path = tmp_path / "synthetic.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dt", "error"])
        for i in range(5):
            dt = 0.1 / 2**i
            w.writerow([f"{dt:.16e}", f"{0.3 * dt**3.7:.16e}"])
    meta = render(FigureSpec("convergence", [str(path)], str(tmp_path / "s.png")))
    assert abs(meta["slopes"][0] - 3.7) <= 0.05


def test_ratio_hist_renders(canonical, tmp_path):
    out = tmp_path / "hist.png"
    meta = render(FigureSpec("ratio-hist", [str(canonical["probe"])], str(out)))
    assert out.exists()
    assert set(meta["max_per_level"]) == {16, 32}  # base and doubled lattice


def test_region_map_polygon_matches_inequalities(canonical, tmp_path):
    out = tmp_path / "region.png"
    meta = render(
        FigureSpec("region-map", [str(canonical["probe_summary"])], str(out))
    )
    assert out.exists()
    poly = np.array(meta["polygon"])
    assert len(poly) >= 5
    # every vertex satisfies the five inequalities and lies on >= 2 active
    # boundaries (region or window)
    for l, k in poly:
        assert admissible(l, k, tol=1e-9)
    from matplotlib.path import Path as MplPath

    mpath = MplPath(np.vstack([poly, poly[:1]]))
    rng = np.random.default_rng(0)
    for _ in range(400):
        l = rng.uniform(-0.75, 0.5)
        k = rng.uniform(0.0, 1.25)
        direct = admissible(l, k)
        margin = min(c - (a * l + b * k) for _, a, b, c in CONSTRAINTS)
        if abs(margin) < 1e-3:
            continue  # skip boundary-ambiguous samples
        assert mpath.contains_point((l, k)) == direct
    # probe growth factors scattered
    assert meta["points"], "summary JSON should contribute scatter points"


def test_region_polygon_vertices_on_boundaries():
    poly = region_polygon()
    for l, k in poly:
        active = sum(
            1 for _, a, b, c in CONSTRAINTS if abs(a * l + b * k - c) <= 1e-9
        )
        window = sum(
            1 for v, lim in ((l, -0.75), (l, 0.5)) if abs(v - lim) <= 1e-9
        ) + sum(1 for v, lim in ((k, 0.0), (k, 1.25)) if abs(v - lim) <= 1e-9)
        assert active + window >= 2


def test_missing_column_named(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time,foo\n0.0,1.0\n")
    with pytest.raises(ColumnError) as err:
        render(FigureSpec("timeseries", [str(path)], str(tmp_path / "x.png"),
                          options={"columns": ["charge"]}))
    assert "charge" in str(err.value)


def test_cli_exit_codes(canonical, tmp_path):
    good = write_spec(
        tmp_path, kind="convergence", inputs=[str(canonical["converge"])],
        output=str(tmp_path / "ok.png"),
    )
    assert render_cli.main(["--spec", str(good)]) == 0
    bad_kind = write_spec(tmp_path, kind="sparkline", inputs=[], output="x.png")
    assert render_cli.main(["--spec", str(bad_kind)]) == 1
    missing_col = tmp_path / "m.csv"
    missing_col.write_text("a,b\n1,2\n")
    bad_col = write_spec(
        tmp_path, kind="convergence", inputs=[str(missing_col)],
        output=str(tmp_path / "y.png"),
    )
    assert render_cli.main(["--spec", str(bad_col)]) == 1


def test_rendering_idempotent(canonical, tmp_path):
    out = tmp_path / "idem.png"
    spec = FigureSpec("convergence", [str(canonical["converge"])], str(out))
    render(spec)
    first = out.read_bytes()
    render(spec)
    assert out.read_bytes() == first
