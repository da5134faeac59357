"""Deterministic figure rendering from versioned experiment CSVs.

Input files carry a '# metriclap-csv v1 kind=...' comment line; the kind
must match the requested figure. Rendering never mutates inputs, uses the
Agg backend with fixed styling, and strips volatile PNG metadata so the
same inputs always produce identical bytes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SCHEMA_PREFIX = "# metriclap-csv v1"

# figure kind -> accepted CSV kinds
KIND_SOURCES = {
    "profile": ("profile",),
    "convergence": ("pointwise",),
    "eigenmap": ("eigenmap",),
    "sweep": ("sweep-fidelity", "sweep-pointwise"),
}

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


class SchemaError(ValueError):
    """Input file does not match the expected CSV schema."""


@dataclass(frozen=True)
class PlotSpec:
    inputs: tuple[str, ...]
    kind: str
    output: str
    dpi: int = 150
    styling: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FigureInfo:
    kind: str
    n_series: int
    n_points: int


def read_table(path, expected_kinds):
    """Parse a versioned CSV; returns (meta, header, float columns)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith(SCHEMA_PREFIX):
            raise SchemaError(f"{path}: missing schema line, got {first!r}")
        meta = {}
        for token in first[len(SCHEMA_PREFIX):].split():
            if "=" in token:
                key, val = token.split("=", 1)
                meta[key] = val
        kind = meta.get("kind")
        if kind not in expected_kinds:
            raise SchemaError(
                f"{path}: kind {kind!r} does not match expected {expected_kinds}"
            )
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: no header row") from None
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    columns = {
        name: np.array([float(row[i]) for row in rows])
        for i, name in enumerate(header)
    }
    return meta, header, columns


def _require(columns, names, path):
    missing = [name for name in names if name not in columns]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")


def _profile_figure(spec):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    series = 0
    points = 0
    for path in spec.inputs:
        _, header, cols = read_table(path, KIND_SOURCES["profile"])
        _require(cols, ["theta"], path)
        theta = cols["theta"]
        points += theta.size
        for i, name in enumerate(h for h in header if h != "theta"):
            ax.plot(theta, cols[name], color=PALETTE[series % len(PALETTE)],
                    lw=1.5, label=name)
            series += 1
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel(r"$d(\theta, 0)$")
    ax.legend(frameon=False)
    return fig, FigureInfo("profile", series, points)


def _convergence_figure(spec):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    series = 0
    points = 0
    for path in spec.inputs:
        _, _, cols = read_table(path, KIND_SOURCES["convergence"])
        _require(cols, ["n", "abs_error"], path)
        ns = np.unique(cols["n"]).astype(int)
        med = [np.median(cols["abs_error"][cols["n"] == n]) for n in ns]
        label = path.rsplit("/", 1)[-1].removesuffix(".csv")
        ax.loglog(ns, med, marker="o", lw=1.5,
                  color=PALETTE[series % len(PALETTE)], label=label)
        series += 1
        points += len(ns)
    ax.set_xlabel("n")
    ax.set_ylabel("median absolute error")
    ax.legend(frameon=False)
    return fig, FigureInfo("convergence", series, points)


def _eigenmap_figure(spec):
    if len(spec.inputs) != 1:
        raise SchemaError("eigenmap figures take exactly one input CSV")
    path = spec.inputs[0]
    meta, _, cols = read_table(path, KIND_SOURCES["eigenmap"])
    _require(cols, ["true_theta", "v1", "v2"], path)
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    sc = ax.scatter(cols["v1"], cols["v2"], c=cols["true_theta"],
                    cmap="hsv", vmin=0.0, vmax=2 * np.pi, s=9)
    cbar = fig.colorbar(sc, ax=ax)
    cbar.set_label("true angle")
    ax.set_xlabel("$v_1$")
    ax.set_ylabel("$v_2$")
    ax.set_aspect("equal")
    if "fidelity" in meta:
        ax.set_title(f"n={meta.get('n')}  fidelity={float(meta['fidelity']):.3f}")
    return fig, FigureInfo("eigenmap", 1, cols["v1"].size)


def _sweep_figure(spec):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    series = 0
    points = 0
    for path in spec.inputs:
        meta, header, cols = read_table(path, KIND_SOURCES["sweep"])
        _require(cols, ["r"], path)
        value_col = header[-1]
        for i, r in enumerate(np.unique(cols["r"])):
            mask = cols["r"] == r
            if meta["kind"] == "sweep-fidelity":
                x = cols["n"][mask]
                y = np.abs(cols[value_col][mask])
            else:
                x = cols["trial"][mask]
                y = cols[value_col][mask]
            order = np.argsort(x)
            ax.plot(x[order], y[order], marker="o", lw=1.5,
                    color=PALETTE[series % len(PALETTE)], label=f"r={r:g}")
            series += 1
            points += int(mask.sum())
        ax.set_xlabel("n" if meta["kind"] == "sweep-fidelity" else "trial")
        ax.set_ylabel(value_col.replace("_", " "))
    ax.legend(frameon=False)
    return fig, FigureInfo("sweep", series, points)


_BUILDERS = {
    "profile": _profile_figure,
    "convergence": _convergence_figure,
    "eigenmap": _eigenmap_figure,
    "sweep": _sweep_figure,
}


def build_figure(spec: PlotSpec):
    """Build the matplotlib figure; returns (figure, FigureInfo)."""
    if spec.kind not in _BUILDERS:
        raise ValueError(f"unknown figure kind {spec.kind!r}")
    if not spec.inputs:
        raise ValueError("no input files")
    return _BUILDERS[spec.kind](spec)


def render(spec: PlotSpec) -> FigureInfo:
    """Render the figure to spec.output with reproducible bytes."""
    fig, info = build_figure(spec)
    try:
        fig.savefig(spec.output, dpi=spec.dpi, metadata={"Software": None})
    finally:
        plt.close(fig)
    return info
