"""
Configuration management for oscilloflow runs.

A run is described by one JSON (or YAML) document. ``load_config`` parses and
validates it into a frozen ``SimulationConfig``; unknown keys are rejected
with the dotted path of the offending key so every run stays reproducible.
"""

import json
import math
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, Mapping, Optional, Tuple

import yaml

from .errors import ConfigurationError
from .oscillation import OscillationProfile
from .spectral import TorusGrid

_TOP_KEYS = {"equation", "alpha", "grid_n", "grid_dim", "oscillation", "time",
             "initial_data", "tail_threshold", "output"}
_OSC_KEYS = {"kind", "N", "table"}
_TIME_KEYS = {"t_end", "cfl", "osc_fraction", "dt_max", "diagnostic_interval"}
_INIT_KEYS = {"generator", "target_h2", "seed", "params"}
_OUTPUT_KEYS = {"dir", "strict", "snapshot_every", "checkpoint"}
_SWEEP_KEYS = {"n_values", "parallelism"}


@dataclass(frozen=True)
class InitialDataSpec:
    generator: str
    target_h2: Optional[float] = None
    seed: int = 0
    params: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class OutputSpec:
    dir: str = "./outputs"
    strict: bool = False
    snapshot_every: int = 0
    checkpoint: bool = False


@dataclass(frozen=True)
class SimulationConfig:
    equation_kind: str
    grid: TorusGrid
    profile: OscillationProfile
    t_end: float
    dt_max: float
    diagnostic_interval: float
    initial_data: InitialDataSpec
    alpha: Optional[float] = None
    cfl: float = 0.5
    osc_fraction: float = 1.0 / 16.0
    tail_threshold: float = 1e-6
    output: OutputSpec = field(default_factory=OutputSpec)

    def __post_init__(self):
        validate_config(self)

    def with_frequency(self, n_multiplier: float) -> "SimulationConfig":
        profile = OscillationProfile(self.profile.kind, float(n_multiplier), self.profile.table)
        return replace(self, profile=profile)

    def with_output(self, **changes) -> "SimulationConfig":
        return replace(self, output=replace(self.output, **changes))


def validate_config(cfg: SimulationConfig) -> None:
    if cfg.equation_kind not in ("NS", "SQG"):
        raise ConfigurationError(f"equation: expected 'NS' or 'SQG', got {cfg.equation_kind!r}")
    if cfg.equation_kind == "SQG":
        if cfg.grid.dim != 2:
            raise ConfigurationError("grid_dim: SQG is a 2D equation")
        if cfg.alpha is None or not 0.0 < cfg.alpha < 1.0:
            raise ConfigurationError(f"alpha: SQG needs alpha in (0, 1), got {cfg.alpha}")
    checks = (
        ("time.t_end", cfg.t_end, lambda v: v > 0),
        ("time.dt_max", cfg.dt_max, lambda v: v > 0),
        ("time.diagnostic_interval", cfg.diagnostic_interval, lambda v: v > 0),
        ("time.cfl", cfg.cfl, lambda v: 0 < v <= 1),
        ("time.osc_fraction", cfg.osc_fraction, lambda v: v > 0),
        ("tail_threshold", cfg.tail_threshold, lambda v: 0 < v < 1),
    )
    for key, value, ok in checks:
        if not (isinstance(value, (int, float)) and math.isfinite(value) and ok(value)):
            raise ConfigurationError(f"{key}: invalid value {value!r}")
    if cfg.initial_data.target_h2 is not None and not cfg.initial_data.target_h2 > 0:
        raise ConfigurationError(f"initial_data.target_h2: must be positive, got {cfg.initial_data.target_h2}")
    if cfg.output.snapshot_every < 0:
        raise ConfigurationError("output.snapshot_every: must be >= 0")


def _check_keys(section: Mapping[str, Any], allowed, prefix: str) -> None:
    if not isinstance(section, Mapping):
        raise ConfigurationError(f"{prefix or 'config'}: expected a mapping")
    for key in section:
        if key not in allowed:
            raise ConfigurationError(f"unknown config key: {prefix}{key}")


def _require(section: Mapping[str, Any], key: str, prefix: str):
    if key not in section:
        raise ConfigurationError(f"missing config key: {prefix}{key}")
    return section[key]


def _number(value, key: str, kind=float):
    if isinstance(value, bool):
        raise ConfigurationError(f"{key}: expected a number, got {value!r}")
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{key}: expected a number, got {value!r}")


def parse_config(data: Mapping[str, Any], allow_sweep: bool = False) -> SimulationConfig:
    """Validate a config mapping and build the frozen SimulationConfig."""
    _check_keys(data, _TOP_KEYS | ({"sweep"} if allow_sweep else set()), "")
    equation = _require(data, "equation", "")
    if equation not in ("NS", "SQG"):
        raise ConfigurationError(f"equation: expected 'NS' or 'SQG', got {equation!r}")
    alpha = data.get("alpha")
    alpha = None if alpha is None else _number(alpha, "alpha")
    n = _number(_require(data, "grid_n", ""), "grid_n", int)
    dim = _number(data.get("grid_dim", 2 if equation == "SQG" else 3), "grid_dim", int)
    grid = TorusGrid(dim, n)

    osc = _require(data, "oscillation", "")
    _check_keys(osc, _OSC_KEYS, "oscillation.")
    table = osc.get("table")
    if table is not None:
        _check_keys(table, {"times", "values"}, "oscillation.table.")
        table = (tuple(_require(table, "times", "oscillation.table.")),
                 tuple(_require(table, "values", "oscillation.table.")))
    profile = OscillationProfile(str(_require(osc, "kind", "oscillation.")),
                                 _number(osc.get("N", 1.0), "oscillation.N"), table)

    tm = _require(data, "time", "")
    _check_keys(tm, _TIME_KEYS, "time.")
    init = _require(data, "initial_data", "")
    _check_keys(init, _INIT_KEYS, "initial_data.")
    target = init.get("target_h2")
    params = init.get("params", {}) or {}
    if not isinstance(params, Mapping):
        raise ConfigurationError("initial_data.params: expected a mapping")
    initial = InitialDataSpec(
        generator=str(_require(init, "generator", "initial_data.")),
        target_h2=None if target is None else _number(target, "initial_data.target_h2"),
        seed=_number(init.get("seed", 0), "initial_data.seed", int),
        params=dict(params),
    )
    out = data.get("output", {}) or {}
    _check_keys(out, _OUTPUT_KEYS, "output.")
    output = OutputSpec(
        dir=str(out.get("dir", "./outputs")),
        strict=bool(out.get("strict", False)),
        snapshot_every=_number(out.get("snapshot_every", 0), "output.snapshot_every", int),
        checkpoint=bool(out.get("checkpoint", False)),
    )
    return SimulationConfig(
        equation_kind=equation,
        grid=grid,
        profile=profile,
        t_end=_number(_require(tm, "t_end", "time."), "time.t_end"),
        dt_max=_number(_require(tm, "dt_max", "time."), "time.dt_max"),
        diagnostic_interval=_number(_require(tm, "diagnostic_interval", "time."), "time.diagnostic_interval"),
        initial_data=initial,
        alpha=alpha,
        cfl=_number(tm.get("cfl", 0.5), "time.cfl"),
        osc_fraction=_number(tm.get("osc_fraction", 1.0 / 16.0), "time.osc_fraction"),
        tail_threshold=_number(data.get("tail_threshold", 1e-6), "tail_threshold"),
        output=output,
    )


def read_document(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise ConfigurationError(f"config file not found: {path}")
    with open(path, "r") as f:
        try:
            if path.endswith((".yaml", ".yml")):
                data = yaml.safe_load(f)
            else:
                data = json.load(f)
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise ConfigurationError(f"malformed config {path}: {e}")
    if not isinstance(data, dict):
        raise ConfigurationError(f"config {path} must hold a mapping at top level")
    return data


def load_config(path: str) -> SimulationConfig:
    return parse_config(read_document(path))


def load_sweep_document(path: str) -> Tuple[SimulationConfig, Dict[str, Any]]:
    """Base config plus the validated ``sweep`` section of a sweep file."""
    data = read_document(path)
    sweep = _require(data, "sweep", "")
    _check_keys(sweep, _SWEEP_KEYS, "sweep.")
    base = parse_config(data, allow_sweep=True)
    return base, dict(sweep)


def config_to_dict(cfg: SimulationConfig) -> Dict[str, Any]:
    """Inverse of parse_config; the canonical form used for digests and summaries."""
    osc: Dict[str, Any] = {"kind": cfg.profile.kind, "N": cfg.profile.n_multiplier}
    if cfg.profile.table is not None:
        osc["table"] = {"times": list(cfg.profile.table[0]), "values": list(cfg.profile.table[1])}
    doc = {
        "equation": cfg.equation_kind,
        "alpha": cfg.alpha,
        "grid_n": cfg.grid.n,
        "grid_dim": cfg.grid.dim,
        "oscillation": osc,
        "time": {"t_end": cfg.t_end, "cfl": cfg.cfl, "osc_fraction": cfg.osc_fraction,
                 "dt_max": cfg.dt_max, "diagnostic_interval": cfg.diagnostic_interval},
        "initial_data": asdict(cfg.initial_data),
        "tail_threshold": cfg.tail_threshold,
        "output": asdict(cfg.output),
    }
    return doc
