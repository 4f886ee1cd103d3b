"""Run configuration: one strict JSON document drives every subcommand.

Unknown keys are rejected at every nesting level on purpose. A tolerated
typo in a tolerance override would silently audit against defaults, and
that class of bug is invisible in the output, so the parser refuses
anything it does not recognize.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .audit import Tolerances
from .errors import ConfigError, InputError
from .grid import StripGrid
from .vorticity import vorticity_from_config

_TOP_KEYS = {"g", "L", "m", "vorticity", "grid", "continuation",
             "tolerances", "outdir"}
_GRID_KEYS = {"Nq", "Np", "stretching"}
_CONT_KEYS = {"steps", "ds0", "ds_max", "eps_stag", "trough_margin"}
_TOL_KEYS = {"bern", "eq", "residual_scale", "boundary_band", "v_floor_rel"}


def _check_keys(data, allowed, where):
    if not isinstance(data, dict):
        raise ConfigError("%s must be a JSON object" % where)
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError("unknown key(s) %s in %s; allowed: %s"
                          % (", ".join(unknown), where,
                             ", ".join(sorted(allowed))))


def _number(data, key, where, default=None, *, positive=True,
            nonnegative=False, allow_none=False):
    if key not in data:
        return default
    val = data[key]
    if val is None and allow_none:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError("%s.%s must be a number, got %r"
                          % (where, key, val))
    val = float(val)
    if val != val or val in (float("inf"), float("-inf")):
        raise ConfigError("%s.%s must be finite" % (where, key))
    if positive and not val > 0.0:
        raise ConfigError("%s.%s must be positive, got %r"
                          % (where, key, val))
    if nonnegative and val < 0.0:
        raise ConfigError("%s.%s must be nonnegative, got %r"
                          % (where, key, val))
    return val


def _integer(data, key, where, default):
    if key not in data:
        return default
    val = data[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError("%s.%s must be an integer, got %r"
                          % (where, key, val))
    if val < 1:
        raise ConfigError("%s.%s must be at least 1, got %r"
                          % (where, key, val))
    return val


@dataclass(frozen=True)
class GridConfig:
    Nq: int = 64
    Np: int = 48
    stretching: float = 0.5


@dataclass(frozen=True)
class ContinuationConfig:
    steps: int = 25
    ds0: float = 0.005
    ds_max: float = 0.04
    eps_stag: float | None = None
    trough_margin: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    L: float
    m: float
    vorticity: dict
    g: float = 9.81
    grid: GridConfig = field(default_factory=GridConfig)
    continuation: ContinuationConfig = field(
        default_factory=ContinuationConfig)
    tolerances: dict = field(default_factory=dict)
    outdir: str | None = None
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("cannot read config %s: %s" % (path, exc))
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config %s is not valid JSON: %s"
                              % (path, exc))
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data):
        _check_keys(data, _TOP_KEYS, "config")
        for req in ("L", "m", "vorticity"):
            if req not in data:
                raise ConfigError("config is missing required key %r" % req)

        grid_raw = data.get("grid", {})
        _check_keys(grid_raw, _GRID_KEYS, "config.grid")
        grid = GridConfig(
            Nq=_integer(grid_raw, "Nq", "config.grid", GridConfig.Nq),
            Np=_integer(grid_raw, "Np", "config.grid", GridConfig.Np),
            stretching=_number(grid_raw, "stretching", "config.grid",
                               GridConfig.stretching))

        cont_raw = data.get("continuation", {})
        _check_keys(cont_raw, _CONT_KEYS, "config.continuation")
        cont = ContinuationConfig(
            steps=_integer(cont_raw, "steps", "config.continuation",
                           ContinuationConfig.steps),
            ds0=_number(cont_raw, "ds0", "config.continuation",
                        ContinuationConfig.ds0),
            ds_max=_number(cont_raw, "ds_max", "config.continuation",
                           ContinuationConfig.ds_max),
            eps_stag=_number(cont_raw, "eps_stag", "config.continuation",
                             None, allow_none=True),
            trough_margin=_number(cont_raw, "trough_margin",
                                  "config.continuation", 0.0,
                                  positive=False, nonnegative=True))

        tol_raw = data.get("tolerances", {})
        _check_keys(tol_raw, _TOL_KEYS, "config.tolerances")
        tolerances = {
            # null is meaningful only where it selects the scale-aware
            # default; elsewhere a number is the only honest value.
            key: _number(tol_raw, key, "config.tolerances", None,
                         positive=key in ("bern", "eq", "residual_scale"),
                         nonnegative=True, allow_none=key in ("bern", "eq"))
            for key in tol_raw
        }

        outdir = data.get("outdir")
        if outdir is not None and not isinstance(outdir, str):
            raise ConfigError("config.outdir must be a string")

        cfg = cls(
            L=_number(data, "L", "config"),
            m=_number(data, "m", "config"),
            vorticity=data["vorticity"],
            g=_number(data, "g", "config", 9.81),
            grid=grid, continuation=cont, tolerances=tolerances,
            outdir=outdir, raw=data)
        cfg.build_vorticity()  # fail fast on a bad vorticity fragment
        return cfg

    def build_vorticity(self):
        try:
            return vorticity_from_config(self.vorticity, self.m)
        except InputError as exc:
            raise ConfigError("config.vorticity: %s" % exc)

    def build_grid(self):
        try:
            return StripGrid(self.L, self.m, self.grid.Nq, self.grid.Np,
                             self.grid.stretching)
        except InputError as exc:
            raise ConfigError("config.grid: %s" % exc)

    def build_tolerances(self):
        return Tolerances(**self.tolerances)
