"""Figure builders for the five supported kinds.

All rendering is pure post-processing: read files, draw, save. Output
bytes depend only on input content and style options (backend pinned to
Agg, no timestamps in the saved files), so re-rendering is idempotent.
"""

import json
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import matplotlib.tri as mtri
import numpy as np

from . import formats, sphere
from .formats import SIGMA, InputError


def _save(fig, out, dpi):
    suffix = os.path.splitext(out)[1].lower()
    meta = None
    if suffix == ".png":
        meta = {"Software": "plots"}
    elif suffix == ".svg":
        meta = {"Date": None}
    fig.savefig(out, dpi=dpi, metadata=meta)
    plt.close(fig)


def _label(path):
    return os.path.splitext(os.path.basename(path))[0]


def energy_figure(paths, out, dpi=150, title=None):
    """E_total / F curves on top, dissipation and exchange work below."""
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    for path in paths:
        s = formats.read_series(path)
        lbl = _label(path)
        ax0.plot(s["t"], s["E_total"], marker="o", ms=3,
                 label="E_total [%s]" % lbl)
        ax0.plot(s["t"], s["F"], marker="o", ms=3, ls="--",
                 label="F [%s]" % lbl)
        for col in ("diss_mu", "diss_theta", "diss_u", "q_work"):
            ax1.plot(s["t"], s[col], marker="o", ms=3,
                     label="%s [%s]" % (col, lbl))
    ax0.set_ylabel("energy")
    ax0.legend(fontsize=8)
    ax1.set_xlabel("t")
    ax1.set_ylabel("rate")
    ax1.legend(fontsize=8)
    if title:
        fig.suptitle(title)
    _save(fig, out, dpi)


def interface_figure(paths, out, dpi=150, title=None):
    """Interface length and varifold mass / sigma over time."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for path in paths:
        s = formats.read_series(path)
        lbl = _label(path)
        ax.plot(s["t"], s["perimeter"], marker="o", ms=3,
                label="perimeter [%s]" % lbl)
        ax.plot(s["t"], s["varifold_mass"] / SIGMA, marker="o", ms=3,
                ls="--", label="m_V / sigma [%s]" % lbl)
    ax.set_xlabel("t")
    ax.set_ylabel("length")
    ax.legend(fontsize=8)
    if title:
        fig.suptitle(title)
    _save(fig, out, dpi)


def _sweep_table(summary):
    lines = ["  %-10s %-12s %-12s %s"
             % ("eps", "disc_plus", "disc_ratio", "decreasing")]
    prev = None
    for row in summary["rows"]:
        eps = "%g" % row["eps"]
        if row.get("failed"):
            lines.append("  %-10s %-12s %-12s %s"
                         % (eps, "failed", "failed", "-"))
            continue
        ratio = row.get("disc_ratio")
        plus = row.get("disc_plus")
        ptxt = "%.4e" % plus if plus is not None else "n/a"
        rtxt = "%.4e" % ratio if ratio is not None else "n/a"
        if ratio is None or prev is None:
            mono = "-"
        else:
            mono = "yes" if ratio < prev else "NO"
        lines.append("  %-10s %-12s %-12s %s" % (eps, ptxt, rtxt, mono))
        if ratio is not None:
            prev = ratio
    lines.append("verdicts:")
    for key in ("disc_ratio_decreasing", "energy_uniformly_bounded",
                "masses_conserved"):
        lines.append("  %s: %s" % (key, json.dumps(summary["verdicts"].get(key))))
    return "\n".join(lines)


def sweep_figure(path, out, dpi=150, title=None):
    """Discrepancy ratio against eps, plus the verdict table text."""
    summary = formats.read_summary(path)
    eps, ratios = [], []
    for row in summary["rows"]:
        if not row.get("failed") and row.get("disc_ratio") is not None:
            eps.append(row["eps"])
            ratios.append(row["disc_ratio"])
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    if eps:
        ax.loglog(eps, ratios, marker="o")
    ax.set_xlabel("eps")
    ax.set_ylabel("discrepancy ratio")
    ax.invert_xaxis()
    if title:
        fig.suptitle(title)
    _save(fig, out, dpi)
    return _sweep_table(summary)


def gibbs_figure(paths, out, dpi=150, title=None):
    """Scatter of (2 mu + theta) / sigma across the transition band."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for path in paths:
        _, t, f, _ = formats.read_snapshot(path)
        band = np.abs(f["phi"]) < 0.95
        lbl = _label(path) if t is None else "t = %.6g" % t
        ax.scatter(f["phi"][band],
                   (2.0 * f["mu"][band] + f["theta"][band]) / SIGMA,
                   s=12, label=lbl)
    for ref in (1.0, -1.0):
        ax.axhline(ref, color="0.6", lw=0.8, ls=":")
    ax.set_xlabel("phi")
    ax.set_ylabel("(2 mu + theta) / sigma")
    ax.legend(fontsize=8)
    if title:
        fig.suptitle(title)
    _save(fig, out, dpi)


def _sphere_panels(fields, t, out, dpi, title):
    n = fields["phi"].shape[0]
    r = sphere.refinement_for(n)
    if r is None:
        raise InputError(out, "vertex count %d is not an icosphere" % n)
    verts, faces = sphere.icosphere(r)
    phi = fields["phi"]
    vmax = max(1.0, float(np.abs(phi).max()))
    cent_z = verts[faces].mean(axis=1)[:, 2]
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 4.0))
    imgs = []
    for ax, front in zip(axes, (True, False)):
        sel = faces[cent_z >= 0.0] if front else faces[cent_z < 0.0]
        x = verts[:, 0] if front else -verts[:, 0]
        tri = mtri.Triangulation(x, verts[:, 1], triangles=sel)
        imgs.append(ax.tripcolor(tri, phi, shading="gouraud",
                                 cmap="RdBu_r", vmin=-vmax, vmax=vmax))
        ax.set_aspect("equal")
        ax.set_axis_off()
        ax.set_title("front" if front else "back", fontsize=9)
    fig.colorbar(imgs[0], ax=axes, shrink=0.8, label="phi")
    head = title or ("phi, t = %.6g" % t if t is not None else "phi")
    fig.suptitle(head)
    _save(fig, out, dpi)


def _circle_panels(fields, t, out, dpi, title):
    n = fields["phi"].shape[0]
    ang = 2.0 * np.pi * np.arange(n) / n
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    ax0.plot(ang, fields["phi"], label="phi")
    ax0.plot(ang, fields["v"], ls="--", label="v")
    ax0.set_ylabel("phase / composition")
    ax0.legend(fontsize=8)
    ax1.plot(ang, fields["mu"], label="mu")
    ax1.plot(ang, fields["theta"], ls="--", label="theta")
    ax1.set_xlabel("angle")
    ax1.set_ylabel("potential")
    ax1.legend(fontsize=8)
    head = title or ("t = %.6g" % t if t is not None else None)
    if head:
        fig.suptitle(head)
    _save(fig, out, dpi)


def snapshot_figure(path, out, dpi=150, title=None):
    """Field render of one snapshot: colormap on the sphere, traces on
    the circle."""
    backend, t, fields, _ = formats.read_snapshot(path)
    if backend == "sphere":
        _sphere_panels(fields, t, out, dpi, title)
    else:
        _circle_panels(fields, t, out, dpi, title)
