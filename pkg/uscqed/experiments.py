"""Experiment orchestration: turns a RunConfig into tables and writes them."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence

import numpy as np

from . import circuit
from .config import NumericsConfig, RunConfig
from .csv_io import ResultWriter
from .dissipation import rate_rows, standard_rate_tables
from .dressed import dressed_basis, spectrum_sweep, transition_rows
from .model import ModelParams
from .observables import (
    EmissionModel,
    default_tau_grid,
    fluorescence_spectrum,
    g2_tau,
    g2_zero,
    g2_zero_sweep,
    naive_photon_number,
    output_flux,
)
from .sim_errors import ConfigError, SimulationError

logger = logging.getLogger(__name__)

CONVERGENCE_TOL = 5e-3
DEFAULT_RUNGS = (
    {"n_fock": 15, "n_dressed": 8},
    {"n_fock": 20, "n_dressed": 8},
    {"n_fock": 30, "n_dressed": 8},
)
NAMED_DRIVES = {"delta10": (1, 0), "delta20": (2, 0), "delta21": (2, 1)}


@dataclass(frozen=True)
class Table:
    header: Sequence[str]
    rows: Sequence[Sequence[Any]]
    tag: str = ""


@dataclass
class ExperimentOutput:
    experiment: str
    tables: list[Table]
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def main(self) -> Table:
        return self.tables[0]


MapFn = Callable[..., Any]


@contextmanager
def worker_map(threads: int) -> Iterator[MapFn]:
    """Order-preserving map over a process pool, or the builtin map for one worker."""
    if threads is None or threads <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=threads) as pool:
        yield pool.map


def resolve_drive(spec: Any, params: ModelParams) -> float:
    """A drive frequency given as a number or as ``delta10``/``delta20``/``delta21``."""
    if spec is None:
        return params.omega_d
    if isinstance(spec, str):
        key = spec.strip().lower()
        if key not in NAMED_DRIVES:
            raise ConfigError(f"unknown drive {spec!r}; expected a number or one of {', '.join(NAMED_DRIVES)}")
        k, j = NAMED_DRIVES[key]
        basis = dressed_basis(params)
        return float(basis.delta[k, j])
    try:
        return float(spec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"cannot interpret drive {spec!r}") from exc


# ------------------------------------------------------------------ runners
def _spectrum(config: RunConfig, map_fn: MapFn) -> ExperimentOutput:
    model = config.model
    g_grid = config.grid("g", {"start": 0.0, "stop": 0.5, "num": 51})
    thetas = config.grid("theta", [model.theta])
    n_levels = int(config.option("n_levels", 6))
    relative = bool(config.option("relative", True))
    header: list[str] = []
    rows: list[list[float]] = []
    for theta in thetas:
        sweep = spectrum_sweep(model.with_updates(theta=float(theta)), g_grid, n_levels, relative=relative)
        header = ["theta", *sweep.header()]
        rows.extend([float(theta), *row] for row in sweep.rows())
    basis = dressed_basis(model)
    transitions = Table(["j", "k", "delta_kj", "abs_X_jk"], transition_rows(basis), tag="transitions")
    return ExperimentOutput(
        "spectrum",
        [Table(header, rows), transitions],
        {"n_levels": n_levels, "relative": relative, "thetas": [float(t) for t in thetas]},
    )


def _g2zero_sweep(config: RunConfig, map_fn: MapFn) -> ExperimentOutput:
    grid = config.grid("omega_d")
    result = g2_zero_sweep(config.model, grid, config.numerics, map_fn=map_fn)
    rows = [[float(w), float(v)] for w, v in zip(result.grid, result.values)]
    return ExperimentOutput("g2zero-sweep", [Table(["omega_d", "g2_zero"], rows)], dict(result.metadata))


def _g2tau(config: RunConfig, map_fn: MapFn) -> ExperimentOutput:
    params = config.model.with_updates(omega_d=resolve_drive(config.option("drive"), config.model))
    taus = config.grid("tau", None) if "tau" in config.grids else default_tau_grid(params, config.numerics)
    result = g2_tau(params, taus, config.numerics)
    return ExperimentOutput(
        "g2tau",
        [Table(["tau", "g2"], result.rows())],
        {"omega_d": params.omega_d, **result.metadata},
    )


def _fluorescence(config: RunConfig, map_fn: MapFn) -> ExperimentOutput:
    params = config.model.with_updates(omega_d=resolve_drive(config.option("drive"), config.model))
    result = fluorescence_spectrum(params, config.grid("omega"), config.numerics)
    return ExperimentOutput(
        "fluorescence",
        [Table(["omega", "S_normalized"], result.rows())],
        {"omega_d": params.omega_d, "peak_value": result.normalization, **result.metadata},
    )


def _circuit_check(config: RunConfig, map_fn: MapFn) -> ExperimentOutput:
    cp = config.circuit
    dphi = config.grid("dphi", {"start": 0.0, "stop": 2.0, "num": 201})
    cos_max = circuit.max_mixing_angle(cp)
    crossing = circuit.crossing_flux(cp)
    labels, levels = circuit.level_diagram(cp, dphi)
    margin = Table(
        ["dphi_freq_GHz", "cos_theta", "J_GHz", "deltaE_GHz", "margin_ratio"],
        circuit.margin_report(cp, dphi),
    )
    diagram = Table(["dphi_freq_GHz", *[f"E_{label}" for label in labels]], levels.tolist(), tag="levels")
    logger.info("cos(theta)_max = %.6f at bias %.6f GHz", cos_max, crossing)
    return ExperimentOutput(
        "circuit-check",
        [margin, diagram],
        {
            "cos_theta_max": cos_max,
            "crossing_flux_GHz": crossing,
            "qubit_frequency_at_crossing_GHz": circuit.qubit_frequency(cp, crossing),
            "J_at_crossing_GHz": circuit.mode_mixing_coupling(cp, crossing),
        },
    )


def _flux_demo(config: RunConfig, map_fn: MapFn) -> ExperimentOutput:
    g_grid = config.grid("g", {"start": 0.0, "stop": 0.5, "num": 51})
    rows = []
    for g in g_grid:
        basis = dressed_basis(config.model.with_updates(g=float(g)))
        ground = np.zeros((basis.n_dressed, basis.n_dressed), dtype=complex)
        ground[0, 0] = 1.0
        rows.append([float(g), output_flux(ground, basis), naive_photon_number(ground, basis)])
    return ExperimentOutput(
        "flux-demo",
        [Table(["g", "output_flux_ground", "naive_photon_number_ground"], rows)],
        {"points": len(rows)},
    )


def _dephasing_sweep(config: RunConfig, map_fn: MapFn) -> ExperimentOutput:
    model = config.model
    if not model.gamma_deph > 0:
        raise ConfigError("dephasing-sweep needs model.gamma_deph > 0")
    grid = config.grid("omega_d")
    gamma_x = float(config.option("dephased_gamma_x", model.gamma_deph))
    clean = model.with_updates(gamma_deph=0.0)
    dephased = model.with_updates(gamma_x=gamma_x)
    plain = g2_zero_sweep(clean, grid, config.numerics, map_fn=map_fn)
    noisy = g2_zero_sweep(dephased, grid, config.numerics, map_fn=map_fn)
    rows = [[float(w), float(a), float(b)] for w, a, b in zip(grid, plain.values, noisy.values)]
    return ExperimentOutput(
        "dephasing-sweep",
        [Table(["omega_d", "g2_zero", "g2_zero_dephased"], rows)],
        {"gamma_deph": model.gamma_deph, "dephased_gamma_x": gamma_x},
    )


def _convergence(config: RunConfig, map_fn: MapFn) -> ExperimentOutput:
    return convergence_report(config)


def convergence_report(config: RunConfig) -> ExperimentOutput:
    """g2(0), Delta10 and Delta20 over a ladder of truncations and step sizes."""
    rungs = config.option("rungs", DEFAULT_RUNGS)
    if not rungs:
        raise ConfigError("convergence needs at least one rung")
    drive = config.option("drive", "delta20")
    records = []
    for index, rung in enumerate(rungs):
        if not isinstance(rung, Mapping) or set(rung) - {"n_fock", "n_dressed", "dt"}:
            raise ConfigError(f"rung {index} must be an object with n_fock, n_dressed and optional dt")
        params = config.model.with_updates(
            n_fock=int(rung.get("n_fock", config.model.n_fock)),
            n_dressed=int(rung.get("n_dressed", config.model.n_dressed)),
        )
        numerics = replace(config.numerics, dt=rung.get("dt", config.numerics.dt))
        params = params.with_updates(omega_d=resolve_drive(drive, params))
        model = EmissionModel.build(params, numerics)
        basis = model.basis
        value = g2_zero(params, numerics, model=model)
        records.append(
            [index, params.n_fock, params.n_dressed, numerics.dt, value, float(basis.delta[1, 0]), float(basis.delta[2, 0])]
        )
        logger.info("rung %d: n_fock=%d n_dressed=%d g2(0)=%.8g", index, params.n_fock, params.n_dressed, value)

    rows = []
    previous = None
    for record in records:
        changes = [math.nan, math.nan, math.nan] if previous is None else [
            _relative_change(record[i], previous[i]) for i in (4, 5, 6)
        ]
        rows.append([*record[:3], math.nan if record[3] is None else record[3], *record[4:], *changes])
        previous = record
    last = rows[-1][7:]
    converged = len(rows) < 2 or all(abs(c) <= CONVERGENCE_TOL for c in last)
    if not converged:
        logger.warning("last two rungs differ by more than %.1f%%: %s", 100 * CONVERGENCE_TOL, last)
    header = [
        "rung",
        "n_fock",
        "n_dressed",
        "dt",
        "g2_zero",
        "delta10",
        "delta20",
        "rel_change_g2",
        "rel_change_delta10",
        "rel_change_delta20",
    ]
    return ExperimentOutput("convergence", [Table(header, rows)], {"converged": converged, "tolerance": CONVERGENCE_TOL})


def _relative_change(current: float, previous: float) -> float:
    scale = max(abs(current), abs(previous))
    return 0.0 if scale == 0.0 else (current - previous) / scale


RUNNERS: dict[str, Callable[[RunConfig, MapFn], ExperimentOutput]] = {
    "spectrum": _spectrum,
    "g2zero-sweep": _g2zero_sweep,
    "g2tau": _g2tau,
    "fluorescence": _fluorescence,
    "circuit-check": _circuit_check,
    "convergence": _convergence,
    "flux-demo": _flux_demo,
    "dephasing-sweep": _dephasing_sweep,
}


def run_experiment(config: RunConfig, threads: int = 1) -> ExperimentOutput:
    runner = RUNNERS[config.experiment]
    with worker_map(threads) as map_fn:
        return runner(config, map_fn)


def rate_table_rows(params: ModelParams, numerics: NumericsConfig) -> Table:
    basis = dressed_basis(params)
    tables = standard_rate_tables(basis, params, numerics.dephasing_power)
    return Table(["channel", "j", "k", "delta_kj", "abs_C_jk_sq", "rate"], rate_rows(tables), tag="rates")


def run(config: RunConfig, threads: int = 1, *, dump_rates: bool = False, out_dir: Optional[str] = None):
    """Run one experiment and write its CSVs and sidecar; returns the written paths."""
    writer = ResultWriter(out_dir or config.output.directory, config.output.prefix)
    started = time.perf_counter()
    logger.info("running %s with %d worker(s)", config.experiment, max(1, threads or 1))
    output = run_experiment(config, threads)
    elapsed = time.perf_counter() - started
    tables = list(output.tables)
    if dump_rates:
        tables.append(rate_table_rows(config.model, config.numerics))
    paths = [writer.write_rows(config.experiment, t.header, t.rows, tag=t.tag) for t in tables]
    sidecar = {
        "config": config.resolved(),
        "timing": {"wall_seconds": elapsed, "threads": max(1, threads or 1)},
        "metrics": output.metadata,
        "files": [p.name for p in paths],
    }
    paths.append(writer.write_sidecar(config.experiment, sidecar))
    return paths


def write_diagnostics(config: RunConfig, error: SimulationError, out_dir: Optional[str] = None):
    writer = ResultWriter(out_dir or config.output.directory, config.output.prefix)
    return writer.write_diagnostics(config.experiment, {"config": config.resolved(), **error.to_dict()})


__all__ = [
    "ExperimentOutput",
    "Table",
    "RUNNERS",
    "convergence_report",
    "resolve_drive",
    "run",
    "run_experiment",
    "worker_map",
    "write_diagnostics",
]
