"""Figure renderers for the lab's CSV/JSON outputs.

Four kinds: ``timeseries`` (trajectory columns vs time), ``convergence``
(log-log error vs dt with the least-squares slope annotated), ``ratio-hist``
(probe ratio distributions per grid level), and ``region-map`` (the
admissible (l, k) polygon with probe growth factors scattered on top).

Rendering only reads its inputs; the same spec rendered twice produces the
same bytes.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from region import admissible, region_polygon

KINDS = ("timeseries", "convergence", "ratio-hist", "region-map")


class SpecError(ValueError):
    pass


class ColumnError(ValueError):
    def __init__(self, column, path):
        super().__init__(f"column {column!r} missing from {path}")
        self.column = column


@dataclass
class FigureSpec:
    kind: str
    inputs: list
    output: str
    title: str = ""
    labels: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            raw = json.load(fh)
        kind = raw.get("kind")
        if kind not in KINDS:
            raise SpecError(f"figure kind must be one of {KINDS}, got {kind!r}")
        if "output" not in raw:
            raise SpecError("figure spec needs an output path")
        return cls(
            kind=kind,
            inputs=raw.get("inputs", []),
            output=raw["output"],
            title=raw.get("title", ""),
            labels=raw.get("labels", {}),
            options={
                k: v
                for k, v in raw.items()
                if k not in ("kind", "inputs", "output", "title", "labels")
            },
        )


def read_csv_columns(path, wanted):
    """Load the wanted columns as float arrays; unknown names raise."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        for col in wanted:
            if col not in header:
                raise ColumnError(col, path)
        idx = {col: header.index(col) for col in wanted}
        data = {col: [] for col in wanted}
        for row in reader:
            for col in wanted:
                data[col].append(float(row[idx[col]]))
    return {col: np.array(vals) for col, vals in data.items()}


def _finish(fig, ax, spec):
    if spec.title:
        ax.set_title(spec.title)
    if "x" in spec.labels:
        ax.set_xlabel(spec.labels["x"])
    if "y" in spec.labels:
        ax.set_ylabel(spec.labels["y"])
    fig.tight_layout()
    fig.savefig(spec.output, dpi=110, metadata={"Software": None})
    plt.close(fig)


def render_timeseries(spec):
    columns = spec.options.get("columns", ["charge"])
    drift = bool(spec.options.get("drift", False))
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for path in spec.inputs:
        data = read_csv_columns(path, ["time"] + columns)
        for col in columns:
            series = data[col]
            if drift:
                series = np.abs(series - series[0])
            ax.plot(data["time"], series, label=f"{col}")
    if spec.options.get("log_y", drift):
        ax.set_yscale("log")
    ax.set_xlabel(spec.labels.get("x", "time"))
    ax.legend(loc="best")
    _finish(fig, ax, spec)
    return {"output": spec.output, "columns": columns}


def render_convergence(spec):
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    slopes = []
    for path in spec.inputs:
        data = read_csv_columns(path, ["dt", "error"])
        slope = float(np.polyfit(np.log(data["dt"]), np.log(data["error"]), 1)[0])
        slopes.append(slope)
        ax.loglog(data["dt"], data["error"], "o-", label=f"slope {slope:.2f}")
    ax.set_xlabel(spec.labels.get("x", "dt"))
    ax.set_ylabel(spec.labels.get("y", "error"))
    ax.legend(loc="best")
    annotation = f"least-squares order = {slopes[0]:.2f}" if slopes else ""
    if annotation:
        ax.annotate(annotation, xy=(0.05, 0.9), xycoords="axes fraction")
    _finish(fig, ax, spec)
    return {"output": spec.output, "slopes": slopes, "annotation": annotation}


def render_ratio_hist(spec):
    bins = int(spec.options.get("bins", 40))
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    maxima = {}
    for path in spec.inputs:
        data = read_csv_columns(path, ["grid_n", "ratio"])
        for level in sorted(set(data["grid_n"])):
            mask = data["grid_n"] == level
            ratios = data["ratio"][mask]
            ax.hist(ratios, bins=bins, alpha=0.55, label=f"n = {int(level)}")
            maxima[int(level)] = float(ratios.max())
    ax.set_xlabel(spec.labels.get("x", "LHS / RHS"))
    ax.set_ylabel(spec.labels.get("y", "trials"))
    ax.legend(loc="best")
    _finish(fig, ax, spec)
    return {"output": spec.output, "max_per_level": maxima}


def _probe_points(path):
    """(l, k, worst growth) from one probe summary JSON."""
    with open(path) as fh:
        doc = json.load(fh)
    cfg = doc.get("config", {})
    growths = [
        variant.get("growth")
        for pair_stats in doc.get("ratios", {}).values()
        for variant in pair_stats.values()
        if variant.get("growth") is not None
    ]
    if not growths or "l" not in cfg or "k" not in cfg:
        return None
    return float(cfg["l"]), float(cfg["k"]), max(abs(g - 1.0) for g in growths)


def render_region_map(spec):
    l_range = tuple(spec.options.get("l_range", (-0.75, 0.5)))
    k_range = tuple(spec.options.get("k_range", (0.0, 1.25)))
    poly = region_polygon(l_range, k_range)
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    ax.fill(poly[:, 0], poly[:, 1], alpha=0.25, label="admissible")
    ax.plot(np.r_[poly[:, 0], poly[0, 0]], np.r_[poly[:, 1], poly[0, 1]], lw=1.0)
    points = [p for p in (_probe_points(path) for path in spec.inputs) if p]
    if points:
        ls, ks, gs = zip(*points)
        sc = ax.scatter(ls, ks, c=gs, cmap="viridis", zorder=3, label="probe |growth-1|")
        fig.colorbar(sc, ax=ax, label="|growth - 1| per doubling")
    ax.set_xlim(*l_range)
    ax.set_ylim(*k_range)
    ax.set_xlabel(spec.labels.get("x", "l"))
    ax.set_ylabel(spec.labels.get("y", "k"))
    ax.legend(loc="upper right")
    _finish(fig, ax, spec)
    return {
        "output": spec.output,
        "polygon": poly.tolist(),
        "points": points,
    }


_RENDERERS = {
    "timeseries": render_timeseries,
    "convergence": render_convergence,
    "ratio-hist": render_ratio_hist,
    "region-map": render_region_map,
}


def render(spec: FigureSpec):
    return _RENDERERS[spec.kind](spec)
