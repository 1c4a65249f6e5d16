"""Offline figure generation from simulator output files."""

from dataclasses import dataclass, field

from . import figures
from .formats import InputError

KINDS = ("energy", "sweep", "interface", "gibbs", "snapshot")


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: input files, kind, output path, style."""
    kind: str
    inputs: tuple
    out: str
    style: dict = field(default_factory=dict)


def render(spec: FigureSpec):
    """Render the figure; returns the text table for the sweep kind."""
    if spec.kind not in KINDS:
        raise InputError(spec.out, "unknown figure kind %r" % spec.kind)
    if not spec.inputs:
        raise InputError(spec.out, "no input files given")
    if spec.kind in ("sweep", "snapshot") and len(spec.inputs) != 1:
        raise InputError(spec.inputs[0],
                         "kind %r takes exactly one input" % spec.kind)
    dpi = int(spec.style.get("dpi", 150))
    title = spec.style.get("title")
    if spec.kind == "energy":
        figures.energy_figure(spec.inputs, spec.out, dpi=dpi, title=title)
    elif spec.kind == "interface":
        figures.interface_figure(spec.inputs, spec.out, dpi=dpi, title=title)
    elif spec.kind == "gibbs":
        figures.gibbs_figure(spec.inputs, spec.out, dpi=dpi, title=title)
    elif spec.kind == "snapshot":
        figures.snapshot_figure(spec.inputs[0], spec.out, dpi=dpi,
                                title=title)
    else:
        return figures.sweep_figure(spec.inputs[0], spec.out, dpi=dpi,
                                    title=title)
    return None
