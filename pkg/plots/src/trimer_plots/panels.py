"""Publication-style panels from simulation sweep and trajectory CSVs.

Six panel kinds are supported. The first four read ground-state sweep rows
(finite energies E0..E4); the two ``dissipative_*`` kinds read trajectory
rows, which carry stderr columns instead of energies. Plots only ever read
CSV files; nothing is recomputed here.
"""

import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .schema import SchemaError, read_table

# Coupling at which the mean-field transition sits for U0 = omega; drawn as a
# dashed vertical marker on every panel unless overridden.
DEFAULT_MARKER = 0.75

PANEL_KINDS = (
    "photon_number", "gaps", "g2", "coskewness",
    "dissipative_photon", "dissipative_coskewness",
)

FIGSIZE = (4.8, 3.4)
DPI = 144


@dataclass
class PanelSpec:
    csv_path: str
    kind: str
    etas: list | None = None          # eta series to overlay; None = all in file
    marker: float | None = DEFAULT_MARKER  # dashed vertical line position
    title: str | None = None

    def __post_init__(self):
        if self.kind not in PANEL_KINDS:
            raise ValueError(
                f"unknown panel kind {self.kind!r}; choose from {PANEL_KINDS}"
            )


def _series(table, spec, y_col, err_col=None):
    """Per-eta (g0, y, yerr) series restricted to the requested etas."""
    table.require("g0", "eta", y_col)
    if err_col is not None:
        table.require(err_col)
    g0 = table.column("g0")
    eta = table.column("eta")
    y = table.column(y_col)
    yerr = table.column(err_col) if err_col else [0.0] * len(y)
    etas = spec.etas if spec.etas is not None else sorted(set(eta))
    out = []
    for e in etas:
        pts = [(g, v, w) for g, ee, v, w in zip(g0, eta, y, yerr)
               if ee == e and not math.isnan(v)]
        if pts:
            pts.sort()
            out.append((e, pts))
    if not out:
        raise SchemaError("no rows match the requested eta series")
    return out


def _decorate(ax, spec, xlabel, ylabel):
    if spec.marker is not None:
        ax.axvline(spec.marker, color="0.5", linestyle="--", linewidth=0.9)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if spec.title:
        ax.set_title(spec.title)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(frameon=False, fontsize=8)


def build_figure(spec: PanelSpec):
    """Figure for one panel; split from render() so tests can inspect axes."""
    table = read_table(spec.csv_path)
    fig, ax = plt.subplots(figsize=FIGSIZE)

    if spec.kind == "photon_number":
        for e, pts in _series(table, spec, "n_rescaled"):
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    marker=".", label=f"eta={e:g}")
        _decorate(ax, spec, "g0", "<n>/eta")

    elif spec.kind == "gaps":
        table.require("g0", "eta", "E0", "E1", "E4")
        rows = list(zip(table.column("g0"), table.column("eta"),
                        table.column("E0"), table.column("E1"),
                        table.column("E4")))
        etas = spec.etas if spec.etas is not None else sorted({r[1] for r in rows})
        drew = False
        for e in etas:
            pts = sorted((g, e1 - e0, e4 - e0) for g, ee, e0, e1, e4 in rows
                         if ee == e and not math.isnan(e0))
            if not pts:
                continue
            drew = True
            g = [p[0] for p in pts]
            ax.plot(g, [max(p[1], 1e-300) for p in pts],
                    marker=".", label=f"E1-E0, eta={e:g}")
            ax.plot(g, [max(p[2], 1e-300) for p in pts],
                    marker=".", linestyle="--", label=f"E4-E0, eta={e:g}")
        if not drew:
            raise SchemaError("no rows match the requested eta series")
        ax.set_yscale("log")
        _decorate(ax, spec, "g0", "energy gap")

    elif spec.kind == "g2":
        for e, pts in _series(table, spec, "g2"):
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    marker=".", label=f"eta={e:g}")
        ax.axhline(1.0, color="0.5", linestyle=":", linewidth=0.9)
        _decorate(ax, spec, "g0", "g2(0)")

    elif spec.kind == "coskewness":
        for e, pts in _series(table, spec, "coskewness"):
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    marker=".", label=f"eta={e:g}")
        ax.axhline(-1.0, color="k", linestyle="--", linewidth=0.9)
        _decorate(ax, spec, "g0", "coskewness")

    elif spec.kind == "dissipative_photon":
        for e, pts in _series(table, spec, "n_rescaled", "n_stderr"):
            ax.errorbar([p[0] for p in pts], [p[1] for p in pts],
                        yerr=[p[2] for p in pts], marker=".", capsize=2,
                        label=f"eta={e:g}")
        _decorate(ax, spec, "g0", "steady <n>/eta")

    else:  # dissipative_coskewness
        for e, pts in _series(table, spec, "coskewness", "cosk_stderr"):
            ax.errorbar([p[0] for p in pts], [p[1] for p in pts],
                        yerr=[p[2] for p in pts], marker=".", capsize=2,
                        label=f"eta={e:g}")
        ax.axhline(-1.0, color="k", linestyle="--", linewidth=0.9)
        _decorate(ax, spec, "g0", "steady coskewness")

    fig.tight_layout()
    return fig


def render(spec: PanelSpec, out_path: str) -> str:
    """Render one panel to an image file; returns the output path.

    The CSV is validated before any file is created, so a schema error never
    leaves an empty image behind.
    """
    fig = build_figure(spec)
    try:
        fig.savefig(out_path, dpi=DPI, metadata=_stable_metadata(out_path))
    finally:
        plt.close(fig)
    return out_path


def _stable_metadata(out_path):
    # strip volatile metadata (timestamps, tool versions) so renders are
    # byte-identical given the same CSV and spec
    suffix = out_path.rsplit(".", 1)[-1].lower()
    if suffix == "png":
        return {"Software": None}
    if suffix == "svg":
        return {"Date": None}
    if suffix == "pdf":
        return {"CreationDate": None}
    return None
