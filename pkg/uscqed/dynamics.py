"""Time evolution under the periodically driven generator.

The drive ``Omega cos(omega_d t)(a + a†)`` is kept in its rotating-wave form
in the dressed basis: lowering blocks ``|j><k|`` (k > j) carry
``(Omega/2) e^{+i omega_d t}``, raising blocks carry ``(Omega/2) e^{-i omega_d t}``.
Terms where system and drive would both gain (or both lose) energy are dropped.
``drive_full_cosine`` restores the unfiltered drive.

Integration is fixed-step RK4 in Liouville space. Several vectors can be
propagated at once, each with its own start time, which is how the phase
samples of a quasi-steady state are pushed through a correlator together.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import NumericsConfig
from .dissipation import Superoperator
from .model import ModelParams
from .results import CorrelationResult
from .sim_errors import (
    ConfigError,
    DimensionMismatch,
    NonConvergenceError,
    PositivityError,
    StepSizeError,
    TraceError,
)

logger = logging.getLogger(__name__)

STEP_FRACTION = 0.02
TRACE_TOL = 1e-8
POSITIVITY_TOL = 1e-8


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), n, n)
    params: ModelParams

    def populations(self) -> np.ndarray:
        return np.real(np.einsum("tii->ti", self.states))


@dataclass(frozen=True)
class QuasiSteadyState:
    phase_times: np.ndarray
    phase_states: np.ndarray  # shape (n_phase, n, n)
    averaged_state: np.ndarray
    convergence_metric: float
    metric_history: tuple[float, ...] = ()
    period: float = 0.0
    t_final: float = 0.0

    @property
    def n_phase(self) -> int:
        return int(self.phase_states.shape[0])


@dataclass(frozen=True)
class DrivenGenerator:
    """``L(t)`` for a given superoperator and drive settings."""

    superop: Superoperator
    Omega: float
    omega_d: float
    full_cosine: bool = False

    def apply(self, vecs: np.ndarray, times: np.ndarray | float) -> np.ndarray:
        out = self.superop.l_static @ vecs
        if self.Omega == 0.0:
            return out
        if self.full_cosine:
            scale = self.Omega * np.cos(self.omega_d * np.asarray(times))
            return out + self.superop.l_drive @ vecs * scale
        phase = np.exp(1j * self.omega_d * np.asarray(times))
        half = 0.5 * self.Omega
        out += (self.superop.l_drive_lower @ vecs) * (half * phase)
        out += (self.superop.l_drive_raise @ vecs) * (half * np.conj(phase))
        return out

    def rk4(self, vecs: np.ndarray, times: np.ndarray | float, dt: float, steps: int) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        y = vecs
        half = 0.5 * dt
        for _ in range(steps):
            k1 = self.apply(y, t)
            k2 = self.apply(y + half * k1, t + half)
            k3 = self.apply(y + half * k2, t + half)
            k4 = self.apply(y + dt * k3, t + dt)
            y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = t + dt
        return y


def generator_for(superop: Superoperator, params: ModelParams, numerics: NumericsConfig | None = None) -> DrivenGenerator:
    full = bool(numerics.drive_full_cosine) if numerics is not None else False
    return DrivenGenerator(superop=superop, Omega=params.Omega, omega_d=params.omega_d, full_cosine=full)


def max_step(superop: Superoperator, omega_d: float) -> float:
    """Largest admissible RK4 step: 2% of the fastest retained period."""
    fastest = max(superop.omega_max, omega_d, 1e-12)
    return STEP_FRACTION * 2.0 * math.pi / fastest


def periodic_sampling(omega_d: float, n_phase: int, dt_max: float) -> tuple[float, int]:
    """Step size dividing one drive period into ``n_phase`` equal intervals exactly,
    and the number of steps per interval."""
    if not omega_d > 0:
        raise ConfigError(f"drive frequency must be positive, got {omega_d}")
    period = 2.0 * math.pi / omega_d
    sub = max(1, math.ceil(period / (n_phase * dt_max) - 1e-12))
    return period / (n_phase * sub), sub


def check_density_matrix(rho: np.ndarray, *, time: float = 0.0, context: Optional[dict] = None) -> None:
    trace = np.trace(rho)
    if abs(trace - 1.0) > TRACE_TOL:
        raise TraceError(
            f"trace deviates from 1 at t={time:.6g}: {trace.real:.12g}",
            {**(context or {}), "time": time, "trace": complex(trace)},
        )
    lowest = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    if lowest < -POSITIVITY_TOL:
        raise PositivityError(
            f"density matrix lost positivity at t={time:.6g}: lambda_min={lowest:.3e}",
            {**(context or {}), "time": time, "lambda_min": lowest},
        )


def ground_state(n: int) -> np.ndarray:
    rho = np.zeros((n, n), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def evolve(
    rho0: np.ndarray,
    superop: Superoperator,
    params: ModelParams,
    t_span: tuple[float, float],
    dt: float,
    *,
    record_every: int = 1,
    full_cosine: bool = False,
    check: bool = True,
) -> Trajectory:
    n = superop.n_dressed
    if rho0.shape != (n, n):
        raise DimensionMismatch(f"initial state has shape {rho0.shape}, expected {(n, n)}", {"n_dressed": n})
    bound = max_step(superop, params.omega_d)
    if dt > bound * (1 + 1e-12):
        raise StepSizeError(
            f"dt={dt:.6g} exceeds the stability/accuracy bound {bound:.6g}",
            {**params.as_dict(), "dt": dt, "dt_max": bound},
        )
    t0, t1 = map(float, t_span)
    if t1 < t0:
        raise ConfigError(f"t_span must be ascending, got {t_span}")
    steps = math.ceil((t1 - t0) / dt - 1e-12) if t1 > t0 else 0
    step = (t1 - t0) / steps if steps else dt
    record_every = max(1, int(record_every))
    generator = DrivenGenerator(superop, params.Omega, params.omega_d, full_cosine)

    vec = rho0.astype(complex).ravel()
    times = [t0]
    states = [rho0.astype(complex)]
    t = t0
    done = 0
    while done < steps:
        chunk = min(record_every, steps - done)
        vec = generator.rk4(vec, t, step, chunk)
        done += chunk
        t = t0 + done * step
        rho = vec.reshape(n, n)
        if check:
            check_density_matrix(rho, time=t, context=params.as_dict())
        times.append(t)
        states.append(rho.copy())
    return Trajectory(times=np.asarray(times), states=np.asarray(states), params=params)


def quasi_steady_state(
    superop: Superoperator,
    params: ModelParams,
    numerics: NumericsConfig | None = None,
) -> QuasiSteadyState:
    numerics = numerics or NumericsConfig()
    n = superop.n_dressed
    n_phase = int(numerics.n_phase)
    gamma_min = params.gamma_min
    if not gamma_min > 0:
        raise ConfigError("a quasi-steady state requires at least one positive damping rate")
    if params.Omega == 0.0:
        rho = ground_state(n)
        period = 2.0 * math.pi / params.omega_d if params.omega_d > 0 else 0.0
        return QuasiSteadyState(
            phase_times=np.arange(n_phase) * period / n_phase,
            phase_states=np.repeat(rho[None, :, :], n_phase, axis=0),
            averaged_state=rho,
            convergence_metric=0.0,
            period=period,
        )

    dt_max = min(max_step(superop, params.omega_d), numerics.dt or np.inf)
    dt, sub = periodic_sampling(params.omega_d, n_phase, dt_max)
    period = n_phase * sub * dt
    t_relax = max(numerics.t_relax_factor / gamma_min, numerics.t_relax_periods * period)
    t_cap = max(numerics.max_relax_factor / gamma_min, t_relax + 2 * period)
    relax_periods = math.ceil(t_relax / period)
    generator = generator_for(superop, params, numerics)
    logger.info(
        "relaxing %d periods (t=%.4g, dt=%.4g) toward the quasi-steady state", relax_periods, relax_periods * period, dt
    )

    vec = ground_state(n).ravel()
    vec = generator.rk4(vec, 0.0, dt, relax_periods * sub * n_phase)
    periods_done = relax_periods

    def sample_period(start: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        samples = np.empty((n_phase, n * n), dtype=complex)
        y = start
        for i in range(n_phase):
            samples[i] = y
            y = generator.rk4(y, i * sub * dt, dt, sub)
        return samples, y

    previous, vec = sample_period(vec)
    periods_done += 1
    history: list[float] = []
    while True:
        current, vec = sample_period(vec)
        periods_done += 1
        metric = float(np.max(np.abs(current - previous)))
        history.append(metric)
        if metric < numerics.qss_tol:
            break
        if periods_done * period > t_cap:
            raise NonConvergenceError(
                f"quasi-steady state not reached by t={periods_done * period:.6g} (metric {metric:.3e})",
                {**params.as_dict(), "metric": metric, "t_cap": t_cap},
            )
        previous = current
    tail = history[-5:]
    if any(later > earlier for earlier, later in zip(tail, tail[1:])):
        logger.warning("quasi-steady-state convergence metric not monotone over last periods: %s", tail)

    accumulated = current.copy()
    for _ in range(int(numerics.qss_periods) - 1):
        extra, vec = sample_period(vec)
        periods_done += 1
        accumulated += extra
    accumulated /= numerics.qss_periods

    phase_states = accumulated.reshape(n_phase, n, n)
    phase_states = 0.5 * (phase_states + np.conj(np.transpose(phase_states, (0, 2, 1))))
    averaged = phase_states.mean(axis=0)
    if numerics.check_positivity:
        for i, rho in enumerate(phase_states):
            check_density_matrix(rho, time=i * sub * dt, context=params.as_dict())
        check_density_matrix(averaged, context=params.as_dict())
    logger.info("quasi-steady state converged after %d periods (metric %.3e)", periods_done, history[-1])
    return QuasiSteadyState(
        phase_times=np.arange(n_phase) * sub * dt,
        phase_states=phase_states,
        averaged_state=averaged,
        convergence_metric=history[-1],
        metric_history=tuple(history),
        period=period,
        t_final=periods_done * period,
    )


def regression_two_time(
    superop: Superoperator,
    qss: QuasiSteadyState,
    left_op: np.ndarray,
    right_op: Optional[np.ndarray],
    mid_op: np.ndarray,
    tau_grid: Sequence[float],
    params: ModelParams,
    numerics: NumericsConfig | None = None,
    *,
    subtract_product: bool = False,
) -> CorrelationResult:
    """Two-time correlator by the quantum regression theorem.

    Sandwich form (``right_op`` given): seed ``right·rho(t_i)·left`` and record
    ``Tr[mid·sigma(tau)]``, i.e. ``<left(t) mid(t+tau) right(t)>``. Single-sided
    form (``right_op is None``): seed ``rho(t_i)·left``, i.e.
    ``<left(t) mid(t+tau)>``. ``subtract_product`` removes
    ``<left(t)><mid(t+tau)>`` phase by phase (single-sided form only).
    """
    numerics = numerics or NumericsConfig()
    n = superop.n_dressed
    for name, op in (("left_op", left_op), ("right_op", right_op), ("mid_op", mid_op)):
        if op is not None and op.shape != (n, n):
            raise DimensionMismatch(f"{name} has shape {op.shape}, expected {(n, n)}", {"n_dressed": n})
    if qss.phase_states.shape[1:] != (n, n):
        raise DimensionMismatch("quasi-steady state does not match the superoperator", {"n_dressed": n})
    if subtract_product and right_op is not None:
        raise ConfigError("product subtraction only applies to the single-sided form")
    taus = np.asarray(list(tau_grid), dtype=float)
    if taus.size == 0 or taus[0] < 0 or np.any(np.diff(taus) <= 0):
        raise ConfigError("tau grid must be non-empty, non-negative and strictly ascending")

    generator = generator_for(superop, params, numerics)
    seeds = []
    for rho in qss.phase_states:
        sigma = right_op @ rho @ left_op if right_op is not None else rho @ left_op
        seeds.append(sigma.ravel())
    columns = np.array(seeds).T
    m = columns.shape[1]
    start_times = np.array(qss.phase_times, dtype=float)
    if subtract_product:
        left_expect = np.array([np.trace(left_op @ rho) for rho in qss.phase_states])
        columns = np.hstack([columns, np.array([rho.ravel() for rho in qss.phase_states]).T])
        start_times = np.concatenate([start_times, start_times])

    trace_row = mid_op.T.ravel()
    dt_max = min(max_step(superop, params.omega_d), numerics.dt or np.inf)
    values = np.empty(taus.size, dtype=complex)
    per_phase = np.empty((taus.size, m), dtype=complex)
    elapsed = 0.0
    for idx, tau in enumerate(taus):
        if tau > elapsed:
            steps = math.ceil((tau - elapsed) / dt_max - 1e-12)
            columns = generator.rk4(columns, start_times + elapsed, (tau - elapsed) / steps, steps)
            elapsed = float(tau)
        recorded = trace_row @ columns
        corr = recorded[:m]
        if subtract_product:
            corr = corr - left_expect * recorded[m:]
        per_phase[idx] = corr
        values[idx] = corr.mean()
    return CorrelationResult(
        grid=taus,
        values=values,
        normalization=1.0,
        params=params,
        metadata={"n_phase": m, "dt_max": dt_max, "per_phase": per_phase},
    )


__all__ = [
    "STEP_FRACTION",
    "Trajectory",
    "QuasiSteadyState",
    "DrivenGenerator",
    "generator_for",
    "max_step",
    "periodic_sampling",
    "check_density_matrix",
    "ground_state",
    "evolve",
    "quasi_steady_state",
    "regression_two_time",
]
