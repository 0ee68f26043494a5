"""Flux-qubit / transmission-line estimates for the mixed-coupling regime.

All frequencies are in GHz (divided by 2*pi). The flux bias is carried as the
frequency ``2 I_p dphi / h``; ``CircuitParams.flux_scale`` converts an
external flux unit into that frequency (1.0 means ``dphi`` already is one).

Qubit energies use the half-splitting convention ``+-omega_q/2``. Only
energy differences are reported, so the convention drops out.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .model import ModelParams
from .sim_errors import ConfigError, ResonanceUnreachable

logger = logging.getLogger(__name__)

UP = +1
DOWN = -1

# (label, qubit state, occupations); |down, n, 0, 0> with n >= 2 is left out
DIAGRAM_STATES: tuple[tuple[str, int, tuple[int, int, int]], ...] = (
    ("down_000", DOWN, (0, 0, 0)),
    ("up_000", UP, (0, 0, 0)),
    ("down_100", DOWN, (1, 0, 0)),
    ("up_100", UP, (1, 0, 0)),
    ("down_010", DOWN, (0, 1, 0)),
    ("down_001", DOWN, (0, 0, 1)),
    ("up_010", UP, (0, 1, 0)),
)


@dataclass(frozen=True)
class CircuitParams:
    delta_gap: float = 2.25
    flux_scale: float = 1.0
    mode_freqs: tuple[float, ...] = (2.782, 5.357, 7.777)
    mode_couplings: tuple[float, ...] = (0.314, 0.636, 0.568)

    def __post_init__(self) -> None:
        if self.delta_gap < 0:
            raise ConfigError(f"delta_gap must be non-negative, got {self.delta_gap}")
        if not self.flux_scale > 0:
            raise ConfigError(f"flux_scale must be positive, got {self.flux_scale}")
        if len(self.mode_freqs) != len(self.mode_couplings) or len(self.mode_freqs) < 2:
            raise ConfigError("mode_freqs and mode_couplings need the same length (at least two modes)")
        if any(not f > 0 for f in self.mode_freqs) or any(not c > 0 for c in self.mode_couplings):
            raise ConfigError("mode frequencies and couplings must be positive")
        if any(b <= a for a, b in zip(self.mode_freqs, self.mode_freqs[1:])):
            raise ConfigError(f"mode_freqs must be strictly ascending, got {self.mode_freqs}")

    @property
    def resonance_gap(self) -> float:
        """omega_2 - omega_1, where |up,100> meets |down,010>."""
        return self.mode_freqs[1] - self.mode_freqs[0]


REFERENCE_CIRCUIT = CircuitParams()


def _bias(cp: CircuitParams, dphi: float) -> float:
    return cp.flux_scale * float(dphi)


def qubit_frequency(cp: CircuitParams, dphi: float) -> float:
    return math.hypot(cp.delta_gap, _bias(cp, dphi))


def mixing_angle(cp: CircuitParams, dphi: float) -> tuple[float, float]:
    """``(cos theta, sin theta)``; the sweet spot is purely transverse."""
    wq = qubit_frequency(cp, dphi)
    if wq == 0.0:
        return 1.0, 0.0
    return _bias(cp, dphi) / wq, cp.delta_gap / wq


def uncoupled_levels(cp: CircuitParams, dphi: float, occupations: Sequence[int], qubit_state: int) -> float:
    if qubit_state not in (UP, DOWN):
        raise ConfigError(f"qubit_state must be +1 or -1, got {qubit_state}")
    if len(occupations) != len(cp.mode_freqs):
        raise ConfigError(f"expected {len(cp.mode_freqs)} occupations, got {len(occupations)}")
    if any(int(n) != n or n < 0 for n in occupations):
        raise ConfigError(f"occupations must be non-negative integers, got {tuple(occupations)}")
    qubit = 0.5 * qubit_state * qubit_frequency(cp, dphi)
    return qubit + sum(w * (n + 0.5) for w, n in zip(cp.mode_freqs, occupations))


def mode_mixing_coupling(cp: CircuitParams, dphi: float) -> float:
    """Second-order coupling J between |up,100> and |down,010> via the qubit."""
    cos_t, sin_t = mixing_angle(cp, dphi)
    g1, g2 = cp.mode_couplings[0], cp.mode_couplings[1]
    return g1 * g2 * cos_t * sin_t / (qubit_frequency(cp, dphi) + cp.mode_freqs[1])


def crossing_flux(cp: CircuitParams) -> float:
    """Positive bias at which |up,100> and |down,010> are degenerate."""
    target = cp.resonance_gap
    if target <= cp.delta_gap:
        raise ResonanceUnreachable(
            f"omega_2 - omega_1 = {target:.6g} GHz does not exceed the qubit gap {cp.delta_gap:.6g} GHz",
            {"resonance_gap": target, "delta_gap": cp.delta_gap},
        )
    upper = target / cp.flux_scale

    def detuning(x: float) -> float:
        return qubit_frequency(cp, x) - target

    if detuning(0.0) == 0.0:
        return 0.0
    return float(brentq(detuning, 0.0, upper, xtol=1e-14, rtol=1e-14))


def max_mixing_angle(cp: CircuitParams) -> float:
    """Largest cos(theta) before the single-mode picture meets the |up,100>/|down,010> crossing."""
    target = cp.resonance_gap
    if target <= cp.delta_gap:
        raise ResonanceUnreachable(
            f"omega_2 - omega_1 = {target:.6g} GHz does not exceed the qubit gap {cp.delta_gap:.6g} GHz",
            {"resonance_gap": target, "delta_gap": cp.delta_gap},
        )
    return math.sqrt(target**2 - cp.delta_gap**2) / target


def margin_report(cp: CircuitParams, dphi_grid: Iterable[float]) -> list[list[float]]:
    """Rows ``dphi, cos_theta, J, deltaE, |deltaE|/|J|``; the ratio is inf where J vanishes."""
    rows = []
    for dphi in dphi_grid:
        cos_t, _ = mixing_angle(cp, dphi)
        coupling = mode_mixing_coupling(cp, dphi)
        n_modes = len(cp.mode_freqs)
        gap = uncoupled_levels(cp, dphi, _single(n_modes, 0), UP) - uncoupled_levels(cp, dphi, _single(n_modes, 1), DOWN)
        ratio = abs(gap) / abs(coupling) if coupling != 0.0 else math.inf
        rows.append([float(dphi), cos_t, coupling, gap, ratio])
    return rows


def _single(n_modes: int, index: int) -> tuple[int, ...]:
    occ = [0] * n_modes
    occ[index] = 1
    return tuple(occ)


def level_diagram(cp: CircuitParams, dphi_grid: Iterable[float]) -> tuple[list[str], np.ndarray]:
    """Uncoupled energies relative to |down,000> over a bias grid.

    Returns the column labels and an array of rows ``dphi, E_state1, ...``.
    """
    if len(cp.mode_freqs) != 3:
        raise ConfigError("the level diagram is defined for three resonator modes")
    grid = list(dphi_grid)
    rows = np.empty((len(grid), len(DIAGRAM_STATES) + 1))
    for i, dphi in enumerate(grid):
        ground = uncoupled_levels(cp, dphi, (0, 0, 0), DOWN)
        rows[i, 0] = dphi
        for col, (_, state, occ) in enumerate(DIAGRAM_STATES, start=1):
            rows[i, col] = uncoupled_levels(cp, dphi, occ, state) - ground
    return [label for label, _, _ in DIAGRAM_STATES], rows


def model_params_from_flux(cp: CircuitParams, dphi: float, mode: int = 1, **overrides: float) -> ModelParams:
    """Single-mode model at a given bias, in units of the chosen mode frequency."""
    if not 1 <= mode <= len(cp.mode_freqs):
        raise ConfigError(f"mode must be in 1..{len(cp.mode_freqs)}, got {mode}")
    cos_t, sin_t = mixing_angle(cp, dphi)
    w_mode = cp.mode_freqs[mode - 1]
    try:
        cos_max = max_mixing_angle(cp)
    except ResonanceUnreachable:
        cos_max = 1.0
    if abs(cos_t) > cos_max:
        logger.warning(
            "bias %.6g gives |cos theta|=%.4f beyond the single-mode bound %.4f", dphi, abs(cos_t), cos_max
        )
    values = {
        "omega0": 1.0,
        "omega_x": qubit_frequency(cp, dphi) / w_mode,
        "g": cp.mode_couplings[mode - 1] / w_mode,
        "theta": math.atan2(sin_t, cos_t),
    }
    values.update(overrides)
    return ModelParams(**values)


__all__ = [
    "CircuitParams",
    "REFERENCE_CIRCUIT",
    "DIAGRAM_STATES",
    "UP",
    "DOWN",
    "qubit_frequency",
    "mixing_angle",
    "uncoupled_levels",
    "mode_mixing_coupling",
    "crossing_flux",
    "max_mixing_angle",
    "margin_report",
    "level_diagram",
    "model_params_from_flux",
]
