"""Figures for census and geodesic outputs.

Everything goes through ``matplotlib.figure.Figure`` directly (no pyplot
state), and SVG output is made reproducible by fixing the hash salt used for
element ids and dropping the date from the metadata.
"""

import math

import matplotlib
from matplotlib.figure import Figure
import numpy as np


matplotlib.rcParams["svg.hashsalt"] = "causalpaths"
# text as paths: no dependence on installed fonts at view time
matplotlib.rcParams["svg.fonttype"] = "path"

COLORS = {"timelike": "#1f77b4", "causal": "#d62728"}


def _save(fig, path):
    fmt = str(path).rsplit(".", 1)[-1].lower()
    meta = {"Date": None} if fmt in ("svg", "pdf") else None
    fig.savefig(path, format=fmt, metadata=meta)


def census_figure(census):
    """Step plot of timelike and causal class counts against ``T``."""
    fig = Figure(figsize=(6.4, 3.6))
    ax = fig.add_subplot(111)
    rows = census.intervals()
    top = max([r["causal"] for r in rows] + [r["timelike"] for r in rows] + [1])
    for flavor, dy in (("timelike", 0.04), ("causal", -0.04)):
        c = COLORS[flavor]
        first = True
        for r in rows:
            y = r[flavor] + dy
            if r["closed"]:
                ax.plot([r["T_lo"]], [y], "o", color=c, ms=4, zorder=3)
            else:
                ax.plot([r["T_lo"], r["T_hi"]], [y, y], "-", color=c, lw=1.6,
                        label=flavor if first else None)
                first = False
    for e in census.events:
        style = {"birth": ":", "merge": "-", "loop": "--", "higher": "-."}[e.kind]
        ax.axvline(e.length, color="0.6", lw=0.7, ls=style, zorder=0)
    for m in census.merges():
        ax.annotate("merge", (m.length, top + 0.25), ha="center", fontsize=8, color="0.3")
    ax.set_xlim(0, census.T_max)
    ax.set_ylim(-0.3, top + 0.6)
    ax.set_yticks(range(top + 1))
    ax.set_xlabel("T")
    ax.set_ylabel("classes")
    ax.legend(loc="upper left", frameon=False, fontsize=8)
    fig.tight_layout()
    return fig


def _lonlat(surface, pts):
    u = np.atleast_2d(pts) / np.asarray(surface.axes)
    return np.arctan2(u[:, 1], u[:, 0]), np.arcsin(np.clip(u[:, 2], -1.0, 1.0))


def geodesics_figure(surface, records):
    """Geodesic traces in a longitude/latitude chart (lifted plane for the torus)."""
    fig = Figure(figsize=(6.4, 4.0))
    ax = fig.add_subplot(111)
    cmap = matplotlib.colormaps["viridis"]
    n = max(len(records), 1)
    for k, rec in enumerate(records):
        tr = rec.trace
        if surface.embedded:
            theta, phi = _lonlat(surface, tr.points)
            x, y = np.unwrap(theta), phi
        else:
            x, y = tr.lifted[:, 0], tr.lifted[:, 1]
        ax.plot(x, y, "-", lw=1.2, color=cmap(k / n),
                label=f"l={rec.length:.4f}, index {rec.index}")
    if records:
        p, q = records[0].start, records[0].end
        for pt, name in ((p, "p"), (q, "q")):
            if surface.embedded:
                th, ph = _lonlat(surface, pt)
                ax.plot(th, ph, "k.", ms=6)
                ax.annotate(name, (th[0], ph[0]), textcoords="offset points", xytext=(4, 4))
            else:
                ax.plot([pt[0]], [pt[1]], "k.", ms=6)
    if surface.embedded:
        ax.set_xlabel("longitude")
        ax.set_ylabel("latitude")
        ax.set_ylim(-math.pi / 2 - 0.1, math.pi / 2 + 0.1)
    else:
        ax.set_xlabel("x (lifted)")
        ax.set_ylabel("y (lifted)")
        ax.set_aspect("equal", adjustable="datalim")
    ax.legend(loc="best", frameon=False, fontsize=7)
    fig.tight_layout()
    return fig


def save_census_plot(census, path):
    _save(census_figure(census), path)


def save_geodesics_plot(surface, records, path):
    _save(geodesics_figure(surface, records), path)
