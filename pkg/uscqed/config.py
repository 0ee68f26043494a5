"""JSON run configuration.

All physical quantities are in units of omega0 except the ``circuit`` block,
which is in GHz.
"""

from __future__ import annotations

import json
import math
import pathlib
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Mapping, Optional

import numpy as np

from .circuit import CircuitParams, REFERENCE_CIRCUIT
from .model import ModelParams
from .sim_errors import ConfigError

EXPERIMENTS = (
    "spectrum",
    "g2zero-sweep",
    "g2tau",
    "fluorescence",
    "circuit-check",
    "convergence",
    "flux-demo",
    "dephasing-sweep",
)


@dataclass(frozen=True)
class NumericsConfig:
    dt: Optional[float] = None
    t_relax_factor: float = 20.0
    t_relax_periods: float = 50.0
    max_relax_factor: float = 200.0
    n_phase: int = 8
    qss_tol: float = 1e-10
    qss_periods: int = 1
    tau_max_factor: float = 10.0
    tau_step: float = 0.1
    dephasing_power: int = 1
    drive_full_cosine: bool = False
    check_positivity: bool = True

    def __post_init__(self) -> None:
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.n_phase < 1 or int(self.n_phase) != self.n_phase:
            raise ConfigError(f"n_phase must be a positive integer, got {self.n_phase}")
        if self.qss_periods < 1 or int(self.qss_periods) != self.qss_periods:
            raise ConfigError(f"qss_periods must be a positive integer, got {self.qss_periods}")
        if self.dephasing_power not in (1, 2):
            raise ConfigError(f"dephasing_power must be 1 or 2, got {self.dephasing_power}")
        for name in ("t_relax_factor", "t_relax_periods", "max_relax_factor", "qss_tol", "tau_max_factor", "tau_step"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "."
    prefix: str = "run"


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    model: ModelParams = field(default_factory=ModelParams)
    grids: Mapping[str, Any] = field(default_factory=dict)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    circuit: CircuitParams = field(default_factory=lambda: REFERENCE_CIRCUIT)

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {', '.join(EXPERIMENTS)}")
        for name, spec in self.grids.items():
            if isinstance(spec, (list, tuple, dict)) and _is_grid_spec(spec) and grid_values(spec).size == 0:
                raise ConfigError(f"grid {name!r} is empty")

    def grid(self, name: str, default: Any = None) -> np.ndarray:
        spec = self.grids.get(name, default)
        if spec is None:
            raise ConfigError(f"experiment {self.experiment!r} requires grid {name!r}")
        values = grid_values(spec)
        if values.size == 0:
            raise ConfigError(f"grid {name!r} is empty")
        return values

    def option(self, name: str, default: Any = None) -> Any:
        return self.grids.get(name, default)

    def resolved(self) -> dict[str, Any]:
        return {
            "experiment": self.experiment,
            "model": asdict(self.model),
            "grids": {key: _jsonable(value) for key, value in self.grids.items()},
            "numerics": asdict(self.numerics),
            "output": asdict(self.output),
            "circuit": asdict(self.circuit),
        }


def _is_grid_spec(spec: Any) -> bool:
    if isinstance(spec, Mapping):
        return {"start", "stop", "num"} <= set(spec)
    return isinstance(spec, (list, tuple)) and all(isinstance(v, (int, float)) for v in spec)


def grid_values(spec: Any) -> np.ndarray:
    if isinstance(spec, Mapping):
        missing = {"start", "stop", "num"} - set(spec)
        if missing:
            raise ConfigError(f"grid spec missing keys: {', '.join(sorted(missing))}")
        num = int(spec["num"])
        if num < 1:
            raise ConfigError(f"grid size must be positive, got {num}")
        return np.linspace(float(spec["start"]), float(spec["stop"]), num)
    if isinstance(spec, (int, float)):
        return np.array([float(spec)])
    if isinstance(spec, (list, tuple)):
        return np.array([_number(v) for v in spec], dtype=float)
    raise ConfigError(f"cannot interpret grid spec {spec!r}")


def _number(value: Any) -> float:
    if isinstance(value, str) and value.strip().lower() in {"pi/2", "π/2"}:
        return math.pi / 2
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"expected a number, got {value!r}") from exc


def _build(cls: type, data: Any, section: str) -> Any:
    if data is None:
        return cls()
    if not isinstance(data, Mapping):
        raise ConfigError(f"section {section!r} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in {section!r}: {', '.join(sorted(unknown))}")
    values = {}
    for key, value in data.items():
        if section == "model" and key == "theta":
            value = _number(value)
        values[key] = tuple(value) if isinstance(value, list) else value
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigError(f"invalid {section!r} section: {exc}") from exc


def config_from_mapping(data: Mapping[str, Any], *, experiment: Optional[str] = None) -> RunConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("configuration must be a JSON object")
    allowed = {"experiment", "model", "grids", "numerics", "output", "circuit"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown top-level keys: {', '.join(sorted(unknown))}")
    chosen = experiment or data.get("experiment")
    if experiment and data.get("experiment") not in (None, experiment):
        raise ConfigError(
            f"config declares experiment {data.get('experiment')!r} but {experiment!r} was requested"
        )
    if not chosen:
        raise ConfigError("no experiment given")
    grids = data.get("grids") or {}
    if not isinstance(grids, Mapping):
        raise ConfigError("section 'grids' must be an object")
    return RunConfig(
        experiment=chosen,
        model=_build(ModelParams, data.get("model"), "model"),
        grids=dict(grids),
        numerics=_build(NumericsConfig, data.get("numerics"), "numerics"),
        output=_build(OutputConfig, data.get("output"), "output"),
        circuit=_build(CircuitParams, data.get("circuit"), "circuit"),
    )


def load_config(path: str | pathlib.Path, *, experiment: Optional[str] = None) -> RunConfig:
    try:
        text = pathlib.Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"failed to parse config JSON: {exc}") from exc
    return config_from_mapping(data, experiment=experiment)


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    return value


__all__ = [
    "EXPERIMENTS",
    "NumericsConfig",
    "OutputConfig",
    "RunConfig",
    "config_from_mapping",
    "grid_values",
    "load_config",
]
