from __future__ import annotations

from types import MappingProxyType
from typing import Any, Mapping, Optional


class ConfigError(ValueError):
    """Raised when parameters or a run configuration fail validation."""


class SimulationError(RuntimeError):
    """Numerical failure with the parameter snapshot that produced it attached."""

    def __init__(self, message: str, context: Optional[Mapping[str, Any]] = None):
        super().__init__(message)
        self.context: Mapping[str, Any] = MappingProxyType(dict(context or {}))

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": str(self),
            "context": {key: _plain(value) for key, value in self.context.items()},
        }


class EigensolverError(SimulationError):
    pass


class NotParityEigenstate(SimulationError):
    """A dressed state is not an eigenstate of P (theta != pi/2 misuse)."""


class DimensionMismatch(SimulationError):
    pass


class StepSizeError(SimulationError):
    pass


class PositivityError(SimulationError):
    pass


class TraceError(SimulationError):
    pass


class NonConvergenceError(SimulationError):
    """Quasi-steady state not reached before the relaxation cap."""


class DenominatorUnderflow(SimulationError):
    """Output flux too small to normalise a correlator (undriven system)."""


class ResonanceUnreachable(SimulationError):
    pass


def _plain(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "tolist"):
        return _plain(value.tolist())
    return repr(value)


__all__ = [
    "ConfigError",
    "SimulationError",
    "EigensolverError",
    "NotParityEigenstate",
    "DimensionMismatch",
    "StepSizeError",
    "PositivityError",
    "TraceError",
    "NonConvergenceError",
    "DenominatorUnderflow",
    "ResonanceUnreachable",
]
