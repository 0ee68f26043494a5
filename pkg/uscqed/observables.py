"""Measurable output quantities: photon flux, g2(0), g2(tau) and the
incoherent resonance-fluorescence spectrum.

Everything is built from the positive-frequency part of the field derivative
in the dressed basis, with the input-output prefactor and X0 set to 1. Both
cancel in g2 and in the unit-peak spectrum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, fields, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .config import NumericsConfig
from .dissipation import Superoperator, build_superoperator
from .dressed import DressedBasis, dressed_basis, positive_frequency_part, rotate_operator
from .dynamics import QuasiSteadyState, quasi_steady_state, regression_two_time
from .model import ModelParams
from .results import CorrelationResult
from .sim_errors import ConfigError, DenominatorUnderflow

logger = logging.getLogger(__name__)

FLUX_FLOOR = 1e-300
WEAK_DRIVE_RATIO = 1e-2
SPECTRUM_CHUNK = 64
DRIVE_FIELDS = frozenset({"omega_d", "Omega"})


@dataclass(frozen=True)
class EmissionModel:
    """Dressed basis, generator and field operators for one static parameter set.

    Only the drive settings change along an omega_d sweep, so one instance is
    reused for every point through :meth:`with_drive`.
    """

    params: ModelParams
    numerics: NumericsConfig
    basis: DressedBasis
    superop: Superoperator
    xdot_plus: np.ndarray
    xdot_minus: np.ndarray

    @classmethod
    def build(cls, params: ModelParams, numerics: NumericsConfig | None = None) -> "EmissionModel":
        numerics = numerics or NumericsConfig()
        basis = dressed_basis(params)
        superop = build_superoperator(basis, params, numerics.dephasing_power)
        xp = positive_frequency_part(basis)
        return cls(params, numerics, basis, superop, xp, xp.conj().T)

    def with_drive(self, *, omega_d: Optional[float] = None, Omega: Optional[float] = None) -> "EmissionModel":
        changes = {}
        if omega_d is not None:
            changes["omega_d"] = float(omega_d)
        if Omega is not None:
            changes["Omega"] = float(Omega)
        return replace(self, params=self.params.with_updates(**changes))

    def for_params(self, params: ModelParams) -> "EmissionModel":
        """This model re-driven for ``params``; only the drive settings may differ."""
        if params == self.params:
            return self
        mismatched = [
            f.name
            for f in fields(ModelParams)
            if f.name not in DRIVE_FIELDS and getattr(params, f.name) != getattr(self.params, f.name)
        ]
        if mismatched:
            raise ConfigError(f"model was built for other static parameters: {', '.join(mismatched)}")
        return self.with_drive(omega_d=params.omega_d, Omega=params.Omega)

    def steady_state(self) -> QuasiSteadyState:
        _warn_if_strong_drive(self.params)
        return quasi_steady_state(self.superop, self.params, self.numerics)


def output_flux(rho: np.ndarray, basis: DressedBasis) -> float:
    xp = positive_frequency_part(basis)
    return float(np.real(np.trace(xp.conj().T @ xp @ rho)))


def naive_photon_number(rho: np.ndarray, basis: DressedBasis) -> float:
    """<a†a>, the photon number a standard input-output treatment would count."""
    number = rotate_operator(basis, basis.operators.number)
    return float(np.real(np.trace(number @ rho)))


def coherent_fraction(qss: QuasiSteadyState, basis: DressedBasis) -> float:
    xp = positive_frequency_part(basis)
    flux = output_flux(qss.averaged_state, basis)
    if flux < FLUX_FLOOR:
        return 0.0
    coherent = np.mean([abs(np.trace(xp @ rho)) ** 2 for rho in qss.phase_states])
    return float(coherent / flux)


def g2_from_state(rho: np.ndarray, xdot_plus: np.ndarray) -> float:
    xm = xdot_plus.conj().T
    flux = float(np.real(np.trace(xm @ xdot_plus @ rho)))
    _require_flux(flux)
    numerator = float(np.real(np.trace(xm @ xm @ xdot_plus @ xdot_plus @ rho)))
    return numerator / flux**2


def g2_zero(
    params: ModelParams,
    numerics: NumericsConfig | None = None,
    *,
    model: EmissionModel | None = None,
) -> float:
    model = model.for_params(params) if model is not None else EmissionModel.build(params, numerics)
    qss = model.steady_state()
    return g2_from_state(qss.averaged_state, model.xdot_plus)


def g2_zero_sweep(
    params: ModelParams,
    omega_d_grid: Sequence[float],
    numerics: NumericsConfig | None = None,
    *,
    map_fn: Callable[..., Iterable[float]] = map,
) -> CorrelationResult:
    grid = np.asarray(list(omega_d_grid), dtype=float)
    if grid.size == 0:
        raise ConfigError("omega_d grid must not be empty")
    numerics = numerics or NumericsConfig()
    if map_fn is map:
        model = EmissionModel.build(params, numerics)
        values = []
        for index, w in enumerate(grid, start=1):
            values.append(g2_zero(params.with_updates(omega_d=float(w)), numerics, model=model))
            logger.info("sweep point %d/%d: omega_d=%.6f g2(0)=%.6g", index, grid.size, w, values[-1])
    else:
        values = list(map_fn(g2_zero_point, [(params.with_updates(omega_d=float(w)), numerics) for w in grid]))
    return CorrelationResult(
        grid=grid,
        values=np.asarray(values, dtype=float),
        normalization=1.0,
        params=params,
        metadata={"n_phase": numerics.n_phase, "points": int(grid.size)},
    )


def g2_zero_point(task: tuple[ModelParams, NumericsConfig]) -> float:
    """Picklable single sweep point for worker pools."""
    params, numerics = task
    return g2_zero(params, numerics)


def default_tau_grid(params: ModelParams, numerics: NumericsConfig, span_factor: float = 5.0) -> np.ndarray:
    gamma = params.gamma_min
    if not gamma > 0:
        raise ConfigError("a default tau grid needs a positive damping rate")
    span = span_factor / gamma
    count = int(math.floor(span / numerics.tau_step + 1e-9))
    return np.arange(count + 1) * numerics.tau_step


def g2_tau(
    params: ModelParams,
    tau_grid: Optional[Sequence[float]] = None,
    numerics: NumericsConfig | None = None,
    *,
    model: EmissionModel | None = None,
) -> CorrelationResult:
    numerics = numerics or NumericsConfig()
    model = model.for_params(params) if model is not None else EmissionModel.build(params, numerics)
    taus = np.asarray(list(tau_grid), dtype=float) if tau_grid is not None else default_tau_grid(params, numerics)
    if taus.size == 0 or taus[0] != 0.0:
        raise ConfigError("tau grid must start at 0")
    qss = model.steady_state()
    xp, xm = model.xdot_plus, model.xdot_minus
    flux = float(np.real(np.trace(xm @ xp @ qss.averaged_state)))
    _require_flux(flux)
    raw = regression_two_time(model.superop, qss, xm, xp, xm @ xp, taus, model.params, numerics)
    denominator = flux**2
    imag_ratio = float(np.max(np.abs(raw.values.imag) / np.maximum(np.abs(raw.values), FLUX_FLOOR)))
    if imag_ratio > 1e-10:
        logger.warning("G2(tau) carries a relative imaginary part of %.3e", imag_ratio)
    return CorrelationResult(
        grid=taus,
        values=np.real(raw.values) / denominator,
        normalization=denominator,
        params=model.params,
        metadata={
            "n_phase": qss.n_phase,
            "tau_step": float(taus[1] - taus[0]) if taus.size > 1 else 0.0,
            "max_imag_ratio": imag_ratio,
            "qss_metric": qss.convergence_metric,
        },
    )


def fluorescence_spectrum(
    params: ModelParams,
    omega_grid: Sequence[float],
    numerics: NumericsConfig | None = None,
    *,
    model: EmissionModel | None = None,
) -> CorrelationResult:
    """Incoherent spectrum ``2 Re int_0^tau_max [<Xd-(t)Xd+(t+tau)> - coherent] e^{i omega tau}``,
    phase averaged and normalised to unit peak."""
    numerics = numerics or NumericsConfig()
    model = model.for_params(params) if model is not None else EmissionModel.build(params, numerics)
    omegas = np.asarray(list(omega_grid), dtype=float)
    if omegas.size == 0:
        raise ConfigError("omega grid must not be empty")
    gamma = params.gamma_min
    if not gamma > 0:
        raise ConfigError("the fluorescence spectrum needs a positive damping rate")
    if omegas.size > 1 and np.max(np.diff(omegas)) > gamma / 10:
        logger.warning("omega grid spacing exceeds gamma/10; peaks may be under-resolved")
    tau_max = numerics.tau_max_factor / gamma
    count = int(math.floor(tau_max / numerics.tau_step + 1e-9))
    taus = np.arange(count + 1) * numerics.tau_step

    qss = model.steady_state()
    xp, xm = model.xdot_plus, model.xdot_minus
    _require_flux(float(np.real(np.trace(xm @ xp @ qss.averaged_state))))
    corr = regression_two_time(
        model.superop, qss, xm, None, xp, taus, model.params, numerics, subtract_product=True
    )
    raw = _transform(corr.values, taus, omegas)
    peak = float(np.max(raw))
    if not peak > 0:
        raise DenominatorUnderflow("incoherent spectrum has no positive weight", model.params.as_dict())
    integrated = float(trapezoid(raw, omegas)) if omegas.size > 1 else peak
    return CorrelationResult(
        grid=omegas,
        values=raw / peak,
        normalization=peak,
        params=model.params,
        metadata={
            "n_phase": qss.n_phase,
            "tau_max": float(taus[-1]),
            "tau_step": numerics.tau_step,
            "integrated_power": integrated,
            "coherent_fraction": coherent_fraction(qss, model.basis),
        },
    )


def _transform(values: np.ndarray, taus: np.ndarray, omegas: np.ndarray) -> np.ndarray:
    """Direct trapezoidal quadrature, chunked over omega to bound memory."""
    weights = np.full(taus.size, taus[1] - taus[0] if taus.size > 1 else 1.0)
    if taus.size > 1:
        weights[0] *= 0.5
        weights[-1] *= 0.5
    weighted = values * weights
    out = np.empty(omegas.size)
    for start in range(0, omegas.size, SPECTRUM_CHUNK):
        block = omegas[start : start + SPECTRUM_CHUNK]
        kernel = np.exp(1j * np.outer(block, taus))
        out[start : start + block.size] = 2.0 * np.real(kernel @ weighted)
    return out


def _require_flux(flux: float) -> None:
    if flux < FLUX_FLOOR:
        raise DenominatorUnderflow(
            f"output flux {flux:.3e} is below the normalisation floor; is the system driven (Omega > 0)?",
            {"flux": flux},
        )


def _warn_if_strong_drive(params: ModelParams) -> None:
    if params.Omega > WEAK_DRIVE_RATIO * params.gamma_min:
        logger.warning(
            "drive Omega=%.3g exceeds %.0e*gamma_min=%.3g; the weak-drive treatment may not hold",
            params.Omega,
            WEAK_DRIVE_RATIO,
            WEAK_DRIVE_RATIO * params.gamma_min,
        )


__all__ = [
    "CorrelationResult",
    "EmissionModel",
    "output_flux",
    "naive_photon_number",
    "coherent_fraction",
    "g2_from_state",
    "g2_zero",
    "g2_zero_sweep",
    "g2_zero_point",
    "default_tau_grid",
    "g2_tau",
    "fluorescence_spectrum",
]
