"""Reproducible experiment driver.

One flat JSON config per run; every artifact file carries the config hash in
its name, CSV numbers are written with 17 significant digits, and a fixed
(config, seed) pair reproduces the numeric content byte for byte.

    dkg-lab <experiment> --config cfg.json [--seed N] [--out dir]
                         [--override-admissibility]

Exit codes: 0 success, 2 config error, 3 numerical failure.  Independent
sub-runs (convergence levels, probe passes) fan out over at most
DKG_LAB_THREADS workers; outputs merge by run index, so results do not
depend on the worker count.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import SIGN_PAIRS, gamma
from .bourgain import (
    SpaceTimeGrid,
    gronwall_monitor,
    inequality_scan,
    probe_estimate,
    product_estimate_check,
)
from .evolve import (
    NumericalBlowup,
    PicardConfig,
    SchemeConfig,
    diagonal_l2_difference,
    picard_solve,
    solve,
)
from .grid import Field, make_grid
from .rhs import nullform_projected
from .state import (
    Params,
    key_hash,
    random_physical_state,
    random_sobolev_field,
    save_state,
    to_diagonal,
)

EXPERIMENTS = (
    "simulate",
    "picard",
    "converge",
    "null-check",
    "probe-star2",
    "probe-star3",
    "inequality-scan",
    "product-check",
    "gronwall",
)

PROBE_COLUMNS = ("l", "k", "eps", "pair", "phi_sign", "grid_n", "grid_nt",
                 "trial", "lhs", "rhs", "ratio")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "simulate"
    # grid
    n: int = 64
    L: float = 2.0 * np.pi
    n_t: int = 32
    T_box: float = 2.0 * np.pi
    # physics
    M: float = 1.0
    m: float = 1.0
    g: float = 1.0
    # data spec
    l: float = 0.2
    k: float = 0.25
    eps: float = 0.01
    seed: int = 0
    amplitude: float = 1.0
    # scheme
    scheme: str = "lawson-rk4"
    dt: float = 0.01
    T: float = 1.0
    T_p: float = 0.05
    nodes: int = 33
    max_iter: int = 30
    tol: float = 1e-12
    # probe / scan sizes
    trials: int = 200
    samples: int = 1_000_000
    dt_levels: int = 4
    # output
    out_dir: str = "out"
    override_admissibility: bool = False

    @classmethod
    def from_json(cls, path, experiment=None) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"{path}: unknown config keys {unknown}")
        if experiment is not None:
            if "experiment" in raw and raw["experiment"] != experiment:
                raise ConfigError(
                    f"{path}: config is for {raw['experiment']!r}, "
                    f"command line says {experiment!r}"
                )
            raw["experiment"] = experiment
        return cls(**raw)

    def hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:10]


THEOREM1_CLAUSES = (
    ("l < 1/4", lambda l, k: l < 0.25),
    ("k > 0", lambda l, k: k > 0.0),
    ("2l + k < 1", lambda l, k: 2.0 * l + k < 1.0),
    ("l + k <= 1", lambda l, k: l + k <= 1.0),
    ("k >= |l|", lambda l, k: k >= abs(l)),
)


def theorem1_violations(l: float, k: float):
    """Violated local well-posedness hypotheses for the exponent pair."""
    return [clause for clause, ok in THEOREM1_CLAUSES if not ok(l, k)]


def theorem2_ok(k: float) -> bool:
    """Global charge-class range: 0 < k < 1/2."""
    return 0.0 < k < 0.5


_NEEDS_THEOREM1 = {"simulate", "picard", "converge", "probe-star2", "probe-star3"}
_NEEDS_THEOREM2 = {"product-check", "gronwall"}
_OVERRIDABLE = {"probe-star2", "probe-star3", "product-check"}


def validate(cfg: ExperimentConfig):
    """All violated constraints; admissibility ones may be overridden for probes."""
    violations = []
    if cfg.experiment not in EXPERIMENTS:
        violations.append(("experiment", f"unknown experiment {cfg.experiment!r}"))
    if cfg.n % 2 or cfg.n < 8:
        violations.append(("grid", f"n must be even and >= 8, got {cfg.n}"))
    if cfg.n_t % 2 or cfg.n_t < 8:
        violations.append(("grid", f"n_t must be even and >= 8, got {cfg.n_t}"))
    if cfg.L <= 0 or cfg.T_box <= 0:
        violations.append(("grid", "box dimensions must be positive"))
    if cfg.m <= 0:
        violations.append(("params", "scalar mass m must be positive"))
    if cfg.dt <= 0 or cfg.T < cfg.dt:
        violations.append(("scheme", "need dt > 0 and T >= dt"))
    if cfg.nodes < 2:
        violations.append(("scheme", "picard needs at least 2 nodes"))
    if not 0.0 < cfg.eps <= 0.1:
        violations.append(("probe", "eps must lie in (0, 0.1]"))
    if cfg.experiment in _NEEDS_THEOREM1:
        for clause in theorem1_violations(cfg.l, cfg.k):
            violations.append(
                ("admissibility", f"local well-posedness hypothesis violated: {clause}")
            )
    if cfg.experiment in _NEEDS_THEOREM2 and not theorem2_ok(cfg.k):
        violations.append(
            ("admissibility", f"global charge-class range needs 0 < k < 1/2, got k={cfg.k}")
        )
    return violations


def _max_workers() -> int:
    raw = os.environ.get("DKG_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Deterministic fan-out: results ordered by item index."""
    workers = _max_workers()
    items = list(items)
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.16e}"


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(_fmt(row[c]) for c in columns)


def _write_summary(out, cfg, tag, extra, t_start):
    doc = {
        "experiment": cfg.experiment,
        "config": asdict(cfg),
        "config_hash": tag,
        "version": __version__,
        "wall_time_s": time.time() - t_start,
    }
    doc.update(extra)
    path = out / f"summary_{tag}.json"
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, default=str)
    return path


def _initial_diagonal(cfg: ExperimentConfig):
    grid = make_grid(cfg.n, cfg.L)
    params = Params(M=cfg.M, m=cfg.m, g=cfg.g)
    phys = random_physical_state(grid, cfg.l, cfg.k, cfg.seed, cfg.amplitude)
    return grid, params, to_diagonal(phys, params)


def _run_simulate(cfg, out, tag):
    grid, params, d0 = _initial_diagonal(cfg)
    scheme = SchemeConfig(scheme=cfg.scheme, dt=cfg.dt, T=cfg.T)
    save_every = max(1, int(round(cfg.T / cfg.dt)) // 200)
    traj = solve(d0, params, scheme, l=cfg.l, k=cfg.k, save_every=save_every)
    traj.to_csv(out / f"trajectory_{tag}.csv")
    save_state(traj.states[-1], params, out / f"snapshot_{tag}.json")
    drift = np.abs(traj.column("charge") - traj.column("charge")[0])
    rel = float(drift.max() / max(traj.column("charge")[0], 1e-300))
    return {"charge_drift_rel": rel, "snapshots": len(traj.times)}


def _run_picard(cfg, out, tag):
    grid, params, d0 = _initial_diagonal(cfg)
    scheme = SchemeConfig(
        scheme="picard",
        dt=cfg.dt,
        T=max(cfg.T_p, cfg.dt),
        picard=PicardConfig(T_p=cfg.T_p, nodes=cfg.nodes,
                            max_iter=cfg.max_iter, tol=cfg.tol),
    )
    result = picard_solve(d0, params, scheme)
    rows = []
    for i, diff in enumerate(result.diffs):
        rows.append({
            "iteration": i + 1,
            "diff": diff,
            "ratio": result.ratios[i - 1] if 0 < i <= len(result.ratios) else np.nan,
        })
    _write_csv(out / f"picard_{tag}.csv", ("iteration", "diff", "ratio"), rows)
    return {
        "iterations": result.iterate_count,
        "converged": result.converged,
        "ratios": result.ratios,
        "final_diff": result.diffs[-1] if result.diffs else 0.0,
    }


def _run_converge(cfg, out, tag):
    grid, params, d0 = _initial_diagonal(cfg)
    dts = [cfg.dt / 2**i for i in range(cfg.dt_levels + 1)]

    def final_state(dt):
        scheme = SchemeConfig(scheme=cfg.scheme, dt=dt, T=cfg.T)
        n_steps = int(round(cfg.T / dt))
        return solve(d0, params, scheme, l=cfg.l, k=cfg.k, save_every=n_steps).states[-1]

    finals = parallel_map(final_state, dts)
    rows = [
        {"dt": dts[i], "error": diagonal_l2_difference(finals[i], finals[i + 1])}
        for i in range(cfg.dt_levels)
    ]
    _write_csv(out / f"converge_{tag}.csv", ("dt", "error"), rows)
    errs = np.array([r["error"] for r in rows])
    order = float(np.polyfit(np.log([r["dt"] for r in rows]), np.log(errs), 1)[0])
    return {"order": order, "errors": errs.tolist(), "dts": dts[:-1]}


def _run_null_check(cfg, out, tag):
    grid = make_grid(cfg.n, cfg.L)
    rows = []
    worst = 0.0
    spin1 = np.array([1.0 + 0.0j, 0.7 + 0.3j])
    spin2 = np.array([0.4 - 0.2j, 1.0 + 0.0j])
    for pair in SIGN_PAIRS:
        for sgn1 in (1, -1):
            for sgn2 in (1, -1):
                if np.any(gamma(pair, sgn1, sgn2)):
                    continue  # only the zero cells are null-checked
                xi1 = 3 * sgn1
                mode2 = -5 * sgn2  # datum enters the sum at xi2 = -mode2
                c1 = np.zeros((2, grid.n), dtype=complex)
                c1[:, list(grid.k_int).index(xi1)] = spin1
                c2 = np.zeros((2, grid.n), dtype=complex)
                c2[:, list(grid.k_int).index(mode2)] = spin2
                nf = nullform_projected(Field(grid, c1), Field(grid, c2), pair)
                max_abs = float(np.max(np.abs(nf.coef)))
                worst = max(worst, max_abs)
                rows.append({
                    "pair": f"{'+' if pair.s1 > 0 else '-'}{'+' if pair.s2 > 0 else '-'}",
                    "sgn1": sgn1, "sgn2": sgn2, "max_abs": max_abs,
                })
    _write_csv(out / f"nullcheck_{tag}.csv", ("pair", "sgn1", "sgn2", "max_abs"), rows)
    return {"zero_cells": len(rows), "max_abs": worst}


def _run_probe(cfg, out, tag):
    estimate = "star2" if cfg.experiment == "probe-star2" else "star3"
    grid = SpaceTimeGrid(cfg.n, cfg.n_t, cfg.L, cfg.T_box)
    results = parallel_map(
        lambda pair: probe_estimate(estimate, cfg.l, cfg.k, cfg.eps, pair,
                                    cfg.trials, grid, seed=cfg.seed),
        SIGN_PAIRS,
    )
    rows, summary = [], {}
    for pair, res in zip(SIGN_PAIRS, results):
        key = f"{'+' if pair.s1 > 0 else '-'}{'+' if pair.s2 > 0 else '-'}"
        summary[key] = {}
        for pm in (1, -1):
            st = res.stats(pm)
            rows.extend(st.rows)
            summary[key][f"phi_{'plus' if pm > 0 else 'minus'}"] = {
                "max": st.max_ratio, "mean": st.mean_ratio,
                "growth": st.growth, "skipped": st.skipped,
            }
    _write_csv(out / f"probe_{tag}.csv", PROBE_COLUMNS, rows)
    return {"estimate": estimate, "ratios": summary}


def _run_inequality_scan(cfg, out, tag):
    results = inequality_scan(cfg.samples, seed=cfg.seed)
    rows = []
    total = 0
    for (pair, phi_sign), res in results.items():
        total += res["violations"]
        rows.append({
            "pair": f"{'+' if pair.s1 > 0 else '-'}{'+' if pair.s2 > 0 else '-'}",
            "phi_sign": phi_sign,
            "samples": cfg.samples,
            "violations": res["violations"],
            "min_slack": res["min_slack"],
        })
    _write_csv(
        out / f"inequality_{tag}.csv",
        ("pair", "phi_sign", "samples", "violations", "min_slack"),
        rows,
    )
    return {"cases": len(rows), "total_violations": total}


def _run_product_check(cfg, out, tag):
    grid = make_grid(cfg.n, cfg.L)
    allow = cfg.override_admissibility
    rows = []
    for trial in range(cfg.trials):
        u = random_sobolev_field(grid, 0.0, key_hash(cfg.seed, 6, trial).item())
        v = random_sobolev_field(grid, 0.0, key_hash(cfg.seed, 7, trial).item())
        lhs, rhs, ratio = product_estimate_check(u, v, cfg.k, allow_supercritical=allow)
        rows.append({"trial": trial, "lhs": lhs, "rhs": rhs, "ratio": ratio})
    _write_csv(out / f"product_{tag}.csv", ("trial", "lhs", "rhs", "ratio"), rows)
    from .bourgain import product_constant

    return {
        "c_k": product_constant(grid, cfg.k, allow_supercritical=allow),
        "max_ratio": max(r["ratio"] for r in rows),
    }


def _run_gronwall(cfg, out, tag):
    grid, params, d0 = _initial_diagonal(cfg)
    scheme = SchemeConfig(scheme=cfg.scheme, dt=cfg.dt, T=cfg.T)
    save_every = max(1, int(round(cfg.T / cfg.dt)) // 100)
    traj = solve(d0, params, scheme, l=cfg.l, k=cfg.k, save_every=save_every)
    report = gronwall_monitor(traj, cfg.k, params)
    rows = [
        {"time": t, "value": v, "bound": b, "margin": b - v}
        for t, v, b in zip(report.times, report.values, report.bounds)
    ]
    _write_csv(out / f"gronwall_{tag}.csv", ("time", "value", "bound", "margin"), rows)
    return {
        "ok": report.ok,
        "c_k": report.c_k,
        "violations": [list(v) for v in report.violations],
    }


_RUNNERS = {
    "simulate": _run_simulate,
    "picard": _run_picard,
    "converge": _run_converge,
    "null-check": _run_null_check,
    "probe-star2": _run_probe,
    "probe-star3": _run_probe,
    "inequality-scan": _run_inequality_scan,
    "product-check": _run_product_check,
    "gronwall": _run_gronwall,
}


def run(cfg: ExperimentConfig) -> int:
    """Execute one experiment; returns the process exit code."""
    violations = validate(cfg)
    overridable = cfg.override_admissibility and cfg.experiment in _OVERRIDABLE
    fatal = [v for v in violations if v[0] != "admissibility" or not overridable]
    if fatal:
        for where, message in fatal:
            print(f"config error [{where}]: {message}", file=sys.stderr)
        return 2
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tag = cfg.hash()
    t_start = time.time()
    try:
        extra = _RUNNERS[cfg.experiment](cfg, out, tag)
    except NumericalBlowup as exc:
        params = Params(M=cfg.M, m=cfg.m, g=cfg.g)
        save_state(exc.last_good, params, out / f"snapshot_lastgood_{tag}.json")
        print(f"numerical failure: {exc}; last good snapshot saved", file=sys.stderr)
        _write_summary(out, cfg, tag, {"error": str(exc)}, t_start)
        return 3
    if violations:  # overridden admissibility notes still get echoed
        extra["overridden"] = [v[1] for v in violations]
    _write_summary(out, cfg, tag, extra, t_start)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dkg-lab",
        description="experiment driver for the coupled spinor/scalar spectral lab",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, help="flat JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--out", default=None, help="override output directory")
    parser.add_argument(
        "--override-admissibility",
        action="store_true",
        help="let probes run inadmissible exponent pairs",
    )
    args = parser.parse_args(argv)
    try:
        cfg = ExperimentConfig.from_json(args.config, experiment=args.experiment)
    except (ConfigError, TypeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    if args.override_admissibility:
        cfg.override_admissibility = True
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
