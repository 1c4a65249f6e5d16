"""Strict key=value run configuration.

One text file, flat sections, every key checked against a schema so a
typo fails loudly instead of silently running defaults. All numeric
model constraints are re-validated by constructing ModelParams.
"""

import configparser
from dataclasses import dataclass, field

from ..errors import InvalidArgumentError
from ..geometry import build_circle_disk, build_sphere_ball
from ..model import ExchangeSpec, ModelParams


class ConfigError(InvalidArgumentError):
    """Malformed configuration; the message names the offending key."""


_SECTIONS = {
    "mesh": {"backend", "n", "rings", "radius", "refinement", "shells"},
    "model": {"eps", "delta", "S", "dt", "T", "exchange", "k1", "k2"},
    "init": {"kind", "m", "M", "angle"},
    "output": {"snapshots", "csv", "snapshot_dir", "summary"},
    "sweep": {"epsilons", "n_over_eps", "dt_over_eps"},
}


@dataclass
class MeshConfig:
    backend: str
    n: int = None
    rings: int = None
    radius: float = 1.0
    refinement: int = None
    shells: int = None


@dataclass
class InitConfig:
    kind: str
    m: float
    M: float = None
    angle: float = None


@dataclass
class OutputConfig:
    snapshots: tuple = ()
    csv: str = "series.csv"
    snapshot_dir: str = "snapshots"
    summary: str = "summary.json"


@dataclass
class SweepConfig:
    epsilons: tuple
    n_over_eps: float = None
    dt_over_eps: float = None


@dataclass
class RunConfig:
    mesh: MeshConfig
    model: ModelParams
    init: InitConfig
    output: OutputConfig = field(default_factory=OutputConfig)
    sweep: SweepConfig = None


def _to_float(sec, key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError("key %r in [%s] is not a number: %r"
                          % (key, sec, raw))


def _to_int(sec, key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError("key %r in [%s] is not an integer: %r"
                          % (key, sec, raw))


def _to_floats(sec, key, raw):
    parts = raw.replace(",", " ").split()
    if not parts:
        raise ConfigError("key %r in [%s] is empty" % (key, sec))
    return tuple(_to_float(sec, key, p) for p in parts)


def _opt(vals, key):
    raw = vals.get(key)
    if raw is None or raw.strip().lower() == "none":
        return None
    return raw


def parse_config(path):
    """Parse and validate a config file into a RunConfig."""
    cp = configparser.ConfigParser(interpolation=None,
                                   inline_comment_prefixes=("#",))
    cp.optionxform = str
    with open(path) as fh:
        text = fh.read()
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError("cannot parse %s: %s" % (path, exc))

    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise ConfigError("unknown config section [%s]" % sec)
        for key in cp[sec]:
            if key not in _SECTIONS[sec]:
                raise ConfigError("unknown config key %r in [%s]"
                                  % (key, sec))

    for sec in ("mesh", "model", "init"):
        if sec not in cp:
            raise ConfigError("missing config section [%s]" % sec)

    mesh = _parse_mesh(dict(cp["mesh"]))
    model = _parse_model(dict(cp["model"]), mesh.backend)
    init = _parse_init(dict(cp["init"]))
    output = _parse_output(dict(cp["output"]) if "output" in cp else {})
    sweep = _parse_sweep(dict(cp["sweep"])) if "sweep" in cp else None
    cfg = RunConfig(mesh=mesh, model=model, init=init, output=output,
                    sweep=sweep)
    _check_mesh_completeness(cfg)
    return cfg


def _parse_mesh(vals):
    backend = vals.get("backend")
    if backend is None:
        raise ConfigError("missing key 'backend' in [mesh]")
    if backend not in ("circle", "sphere"):
        raise ConfigError("key 'backend' in [mesh] must be circle or "
                          "sphere, got %r" % backend)
    out = MeshConfig(backend=backend)
    if "n" in vals:
        out.n = _to_int("mesh", "n", vals["n"])
    if "rings" in vals:
        out.rings = _to_int("mesh", "rings", vals["rings"])
    if "radius" in vals:
        out.radius = _to_float("mesh", "radius", vals["radius"])
    if "refinement" in vals:
        out.refinement = _to_int("mesh", "refinement", vals["refinement"])
    if _opt(vals, "shells") is not None:
        out.shells = _to_int("mesh", "shells", vals["shells"])
    return out


def _parse_model(vals, backend):
    for key in ("eps", "dt", "T"):
        if key not in vals:
            raise ConfigError("missing key %r in [model]" % key)
    kw = {"eps": _to_float("model", "eps", vals["eps"]),
          "dt": _to_float("model", "dt", vals["dt"]),
          "T": _to_float("model", "T", vals["T"]),
          "backend": backend}
    if "delta" in vals:
        kw["delta"] = _to_float("model", "delta", vals["delta"])
    if "S" in vals:
        kw["S"] = _to_float("model", "S", vals["S"])
    kind = vals.get("exchange", "zero")
    k1 = _to_float("model", "k1", vals["k1"]) if "k1" in vals else 0.0
    k2 = _to_float("model", "k2", vals["k2"]) if "k2" in vals else 0.0
    try:
        kw["exchange"] = ExchangeSpec(kind=kind, k1=k1, k2=k2)
        return ModelParams(**kw)
    except InvalidArgumentError as exc:
        raise ConfigError("invalid [model] values: %s" % exc)


def _parse_init(vals):
    if "kind" not in vals:
        raise ConfigError("missing key 'kind' in [init]")
    if "m" not in vals:
        raise ConfigError("missing key 'm' in [init]")
    if vals["kind"] not in ("band", "cap", "two-point"):
        raise ConfigError("key 'kind' in [init] must be band, cap, or "
                          "two-point, got %r" % vals["kind"])
    m = _to_float("init", "m", vals["m"])
    if not -1.0 < m < 1.0:
        raise ConfigError("key 'm' in [init] must lie in (-1, 1), got %g"
                          % m)
    out = InitConfig(kind=vals["kind"], m=m)
    if _opt(vals, "M") is not None:
        out.M = _to_float("init", "M", vals["M"])
    if _opt(vals, "angle") is not None:
        out.angle = _to_float("init", "angle", vals["angle"])
    return out


def _parse_output(vals):
    out = OutputConfig()
    if "snapshots" in vals:
        out.snapshots = _to_floats("output", "snapshots", vals["snapshots"])
    if "csv" in vals:
        out.csv = vals["csv"]
    if "snapshot_dir" in vals:
        out.snapshot_dir = vals["snapshot_dir"]
    if "summary" in vals:
        out.summary = vals["summary"]
    return out


def _parse_sweep(vals):
    if "epsilons" not in vals:
        raise ConfigError("missing key 'epsilons' in [sweep]")
    eps = _to_floats("sweep", "epsilons", vals["epsilons"])
    if len(eps) < 2:
        raise ConfigError("key 'epsilons' in [sweep] needs at least 2 "
                          "values, got %d" % len(eps))
    if any(e <= 0 for e in eps):
        raise ConfigError("key 'epsilons' in [sweep] must be positive")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("key 'epsilons' in [sweep] must be strictly "
                          "decreasing")
    out = SweepConfig(epsilons=eps)
    if _opt(vals, "n_over_eps") is not None:
        out.n_over_eps = _to_float("sweep", "n_over_eps", vals["n_over_eps"])
    if _opt(vals, "dt_over_eps") is not None:
        out.dt_over_eps = _to_float("sweep", "dt_over_eps",
                                    vals["dt_over_eps"])
    return out


def _check_mesh_completeness(cfg):
    m = cfg.mesh
    if m.backend == "circle":
        scaled = cfg.sweep is not None and cfg.sweep.n_over_eps is not None
        if m.n is None and not scaled:
            raise ConfigError("missing key 'n' in [mesh]")
        if m.rings is None:
            raise ConfigError("missing key 'rings' in [mesh]")
    else:
        if m.refinement is None:
            raise ConfigError("missing key 'refinement' in [mesh]")
        if cfg.sweep is not None and cfg.sweep.n_over_eps is not None:
            raise ConfigError("key 'n_over_eps' in [sweep] applies to the "
                              "circle backend only")


def build_meshes(mesh: MeshConfig, n_override=None):
    """Build (surface, bulk) for a mesh block; n_override serves sweeps."""
    if mesh.backend == "circle":
        n = mesh.n if n_override is None else n_override
        return build_circle_disk(n, mesh.rings, mesh.radius)
    return build_sphere_ball(mesh.refinement, n_shells=mesh.shells)
