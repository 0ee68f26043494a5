from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np

from .model import ModelParams


@dataclass(frozen=True)
class CorrelationResult:
    """Correlator values on a tau grid (time) or omega grid (frequency)."""

    grid: np.ndarray
    values: np.ndarray
    normalization: float = 1.0
    params: Optional[ModelParams] = None
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def rows(self) -> list[list[float]]:
        return [[float(x), float(y)] for x, y in zip(self.grid, np.real(self.values))]


__all__ = ["CorrelationResult"]
