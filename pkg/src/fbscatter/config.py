"""Run configuration: JSON loading, defaults and validation."""

import copy
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import geometry


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


DEFAULTS = {
    "name": "run",
    "k": 1.25,
    "H": math.pi,
    "M": 150,
    "M_perturbed": None,
    "N": 600,
    "N_p": 300,
    "n": 32,
    "J_trunc": 50,
    "p": 6,
    "cells": [-2, 2],
    "grid": {"per_cell": [50, 50], "x2_range": None},
    "probes": 300,
    "threads": 1,
    "outputs": {"field": "field.csv", "trace": "trace.csv", "manifest": "manifest.json",
                "convergence": "convergence.csv"},
}

SWEEPABLE = ("n", "M", "N", "N_p")


@dataclass
class RunConfig:
    k: float
    incidence: dict
    geometry: dict
    name: str = "run"
    H: float = math.pi
    M: int = 150
    M_perturbed: int = None
    N: int = 600
    N_p: int = 300
    n: int = 32
    J_trunc: int = 50
    p: int = 6
    cells: list = field(default_factory=lambda: [-2, 2])
    grid: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["grid"]))
    probes: int = 300
    threads: int = 1
    outputs: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["outputs"]))

    # -- derived -----------------------------------------------------------
    @property
    def kind(self):
        return self.incidence["type"]

    @property
    def m_perturbed(self):
        return self.M if self.M_perturbed is None else self.M_perturbed

    def curve(self, role):
        return make_curve(self.geometry[role], f"geometry.{role}")

    @property
    def source(self):
        return np.asarray(self.incidence["source"], dtype=float)

    @property
    def cell_range(self):
        return list(range(int(self.cells[0]), int(self.cells[1]) + 1))

    def with_value(self, name, value):
        d = self.to_dict()
        d[name] = value
        return from_dict(d)

    def to_dict(self):
        return copy.deepcopy(asdict(self))


def make_curve(desc, where="curve"):
    if not isinstance(desc, dict) or "curve" not in desc:
        raise ConfigError(where, "expected an object with a 'curve' entry")
    params = {k: v for k, v in desc.items() if k != "curve"}
    try:
        return geometry.builtin_curve(desc["curve"], **params)
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(where, str(exc)) from None


def _number(value, name):
    if isinstance(value, str) and value.strip().lower() == "pi":
        return math.pi
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a number, got {value!r}")
    return float(value)


def _int(value, name, minimum=None, even=False, multiple=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(name, f"expected an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ConfigError(name, f"must be >= {minimum}")
    if even and value % 2:
        raise ConfigError(name, "must be even")
    if multiple and value % multiple:
        raise ConfigError(name, f"must be a multiple of {multiple}")
    return value


def from_dict(data):
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown configuration key")
    for key in ("k", "incidence", "geometry"):
        if key not in data:
            raise ConfigError(key, "missing required entry")
    d = copy.deepcopy(DEFAULTS)
    for key, value in data.items():
        if isinstance(d.get(key), dict) and isinstance(value, dict):
            d[key].update(value)
        else:
            d[key] = value
    d["k"] = _number(d["k"], "k")
    d["H"] = _number(d["H"], "H")
    cfg = RunConfig(**d)
    validate(cfg)
    return cfg


def load(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON ({exc.msg}, line {exc.lineno})") from None
    return from_dict(data)


def _extent(curve, n=1024):
    return curve(np.linspace(0.0, curve.period, n, endpoint=False))


def validate(cfg):
    if not cfg.k > 0:
        raise ConfigError("k", "wavenumber must be positive")
    if not cfg.H > 0:
        raise ConfigError("H", "must be positive")
    cfg.M = _int(cfg.M, "M", 8, even=True)
    if cfg.M_perturbed is not None:
        cfg.M_perturbed = _int(cfg.M_perturbed, "M_perturbed", 8, even=True)
    cfg.N = _int(cfg.N, "N", 16, multiple=4)
    cfg.N_p = _int(cfg.N_p, "N_p", 8, even=True)
    cfg.n = _int(cfg.n, "n", 2, even=True)
    cfg.J_trunc = _int(cfg.J_trunc, "J_trunc", 1)
    cfg.p = _int(cfg.p, "p", 2)
    cfg.probes = _int(cfg.probes, "probes", 1)
    cfg.threads = _int(cfg.threads, "threads", 1)
    if cfg.J_trunc < cfg.k + 2:
        raise ConfigError("J_trunc", "must exceed k + 2 to cover the propagating orders")
    if (not isinstance(cfg.cells, (list, tuple)) or len(cfg.cells) != 2
            or int(cfg.cells[0]) > 0 or int(cfg.cells[1]) < 0):
        raise ConfigError("cells", "expected [j_min, j_max] with j_min <= 0 <= j_max")
    per = cfg.grid.get("per_cell")
    if not isinstance(per, (list, tuple)) or len(per) != 2:
        raise ConfigError("grid.per_cell", "expected [n_x1, n_x2]")
    for i, v in enumerate(per):
        _int(v, f"grid.per_cell[{i}]", 1)
    if cfg.grid.get("x2_range") is not None:
        lo, hi = (_number(v, "grid.x2_range") for v in cfg.grid["x2_range"])
        if not lo < hi:
            raise ConfigError("grid.x2_range", "lower bound must be below upper bound")

    for role in ("periodic", "perturbed", "artificial"):
        if role not in cfg.geometry:
            raise ConfigError(f"geometry.{role}", "missing curve")
    periodic = _extent(cfg.curve("periodic"))
    perturbed = _extent(cfg.curve("perturbed"))
    gamma_curve = cfg.curve("artificial")
    gamma = _extent(gamma_curve)
    for role, pts in (("periodic", periodic), ("perturbed", perturbed), ("artificial", gamma)):
        if np.abs(pts[:, 1]).max() >= cfg.H:
            raise ConfigError("H", f"must exceed the height of the {role} curve "
                              f"({np.abs(pts[:, 1]).max():.4g})")
        if np.abs(pts[:, 0]).max() >= math.pi:
            raise ConfigError(f"geometry.{role}", "curve must fit inside one period cell")
    for role, pts in (("periodic", periodic), ("perturbed", perturbed)):
        if not np.all(geometry.contains(gamma_curve, pts)):
            raise ConfigError("geometry.artificial",
                              f"artificial curve must enclose the {role} obstacle of cell 0")

    inc = cfg.incidence
    if not isinstance(inc, dict) or inc.get("type") not in ("cylindrical", "plane"):
        raise ConfigError("incidence.type", "must be 'cylindrical' or 'plane'")
    if inc["type"] == "plane":
        if "theta" not in inc:
            raise ConfigError("incidence.theta", "missing incident angle")
        inc["theta"] = _number(inc["theta"], "incidence.theta")
        if not 0 < inc["theta"] < math.pi:
            raise ConfigError("incidence.theta", "must lie in (0, pi) (wave travelling downward)")
    else:
        src = inc.get("source")
        if not isinstance(src, (list, tuple)) or len(src) != 2:
            raise ConfigError("incidence.source", "expected [x1, x2]")
        src = np.array([_number(v, "incidence.source") for v in src])
        inc["source"] = src.tolist()
        if abs(src[1]) >= cfg.H:
            raise ConfigError("H", "must exceed |x2| of the source")
        if abs(src[0]) >= math.pi:
            raise ConfigError("incidence.source", "source must lie in cell 0 (|x1| < pi)")
        if geometry.contains(cfg.curve("perturbed"), src[None])[0]:
            raise ConfigError("incidence.source", "source lies inside the perturbed obstacle")
        if (not geometry.contains(gamma_curve, src[None])[0]
                and geometry.contains(cfg.curve("periodic"), src[None])[0]):
            raise ConfigError("incidence.source", "source lies inside a periodic obstacle")
        dist = np.hypot(*(gamma - src).T).min()
        if dist < 0.05:
            raise ConfigError("incidence.source", "source too close to the artificial curve")
    return cfg


def parse_sweep(text):
    """'n=8,12,16' -> ('n', [8, 12, 16])."""
    if not text or "=" not in text:
        raise ConfigError("--sweep", "expected VAR=V1,V2,...")
    name, _, values = text.partition("=")
    name = name.strip()
    if name not in SWEEPABLE:
        raise ConfigError("--sweep", f"variable must be one of {', '.join(SWEEPABLE)}")
    try:
        vals = [int(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("--sweep", "values must be integers") from None
    if not vals:
        raise ConfigError("--sweep", "no values given")
    return name, vals
