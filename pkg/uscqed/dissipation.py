"""Dressed-state dissipators and the Liouville-space generator.

Density matrices are vectorized row-major (``rho.ravel()``), so that
``vec(A rho B) = kron(A, B.T) @ vec(rho)``.

The dissipator carries the one-half prefactor,
``D[O]rho = (2 O rho O† - rho O†O - O†O rho) / 2``, and Lamb shifts are not
included.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

from .dressed import DressedBasis, drive_operator
from .model import ModelParams
from .sim_errors import ConfigError, DimensionMismatch

logger = logging.getLogger(__name__)


class Channel(str, Enum):
    CAVITY = "cavity"
    QUBIT = "qubit"
    DEPHASING = "dephasing"


@dataclass(frozen=True)
class RateTable:
    """Rates ``rates[j, k]`` for jumps ``|j><k|``.

    Relaxation tables only populate ``k > j`` (zero-temperature bath, downward
    jumps only); the dephasing table only populates the diagonal.
    """

    channel: Channel
    rates: np.ndarray
    abs_c_sq: np.ndarray
    delta: np.ndarray

    @property
    def n_dressed(self) -> int:
        return int(self.rates.shape[0])

    def jumps(self) -> Iterator[tuple[int, int, float]]:
        js, ks = np.nonzero(self.rates)
        for j, k in zip(js, ks):
            yield int(j), int(k), float(self.rates[j, k])

    def is_empty(self) -> bool:
        return not np.any(self.rates)


@dataclass(frozen=True)
class Superoperator:
    """Generator ``L(t) = l_static + f(t) * drive part``.

    ``l_drive`` is ``-i[(a+a†)_dressed, .]``; ``l_drive_lower`` and
    ``l_drive_raise`` split it into the strictly upper (lowering) and strictly
    lower (raising) blocks of the dressed drive operator for the RWA drive.
    """

    l_static: np.ndarray
    l_drive: np.ndarray
    l_drive_lower: np.ndarray
    l_drive_raise: np.ndarray
    n_dressed: int
    omega_max: float = 0.0

    @property
    def dim(self) -> int:
        return self.n_dressed * self.n_dressed


def relaxation_rates(basis: DressedBasis, channel: Channel | str, gamma_c: float, omega0: float = 1.0) -> RateTable:
    channel = Channel(channel)
    if gamma_c < 0:
        raise ConfigError(f"damping rate must be non-negative, got {gamma_c}")
    if channel is Channel.CAVITY:
        c_elems = basis.c_elems_a
    elif channel is Channel.QUBIT:
        c_elems = basis.c_elems_x
    else:
        raise ConfigError("relaxation_rates only handles the cavity and qubit channels")
    delta_kj = basis.delta.T  # [j, k] -> omega_k - omega_j
    abs_c_sq = np.abs(c_elems) ** 2
    upper = np.triu(np.ones_like(delta_kj, dtype=bool), k=1) & (delta_kj > basis.degeneracy_tol)
    rates = np.where(upper, gamma_c * (delta_kj / omega0) * abs_c_sq, 0.0)
    return RateTable(channel=channel, rates=rates, abs_c_sq=np.where(upper, abs_c_sq, 0.0), delta=delta_kj)


def dephasing_rates(basis: DressedBasis, gamma_deph: float, power: int = 1) -> RateTable:
    if gamma_deph < 0:
        raise ConfigError(f"dephasing rate must be non-negative, got {gamma_deph}")
    if power not in (1, 2):
        raise ConfigError(f"dephasing_power must be 1 or 2, got {power}")
    weights = np.abs(basis.sigma_z_expect) ** power
    rates = np.diag(gamma_deph * weights)
    return RateTable(
        channel=Channel.DEPHASING,
        rates=rates,
        abs_c_sq=np.diag(weights),
        delta=np.zeros_like(rates),
    )


def spre(op: np.ndarray) -> np.ndarray:
    return np.kron(op, np.eye(op.shape[0]))


def spost(op: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(op.shape[0]), op.T)


def commutator_superop(op: np.ndarray) -> np.ndarray:
    """Matrix of ``rho -> -i[op, rho]``."""
    return -1j * (spre(op) - spost(op))


def lindblad_dissipator(op: np.ndarray) -> np.ndarray:
    op_dag_op = op.conj().T @ op
    return np.kron(op, op.conj()) - 0.5 * spre(op_dag_op) - 0.5 * spost(op_dag_op)


def jump_dissipator(n: int, j: int, k: int) -> np.ndarray:
    """``D[|j><k|]`` assembled entry by entry."""
    out = np.zeros((n * n, n * n), dtype=complex)
    out[j * n + j, k * n + k] += 1.0
    for m in range(n):
        out[k * n + m, k * n + m] -= 0.5
        out[m * n + k, m * n + k] -= 0.5
    return out


def assemble_liouvillian(
    basis: DressedBasis,
    rate_tables: Sequence[RateTable],
    params: ModelParams | None = None,
) -> Superoperator:
    n = basis.n_dressed
    for table in rate_tables:
        if table.n_dressed != n:
            raise DimensionMismatch(
                f"{table.channel.value} table has dimension {table.n_dressed}, basis has {n}",
                {"table": table.channel.value, "table_dim": table.n_dressed, "basis_dim": n},
            )
    l_static = commutator_superop(np.diag(basis.relative_energies).astype(complex))
    for table in rate_tables:
        for j, k, rate in table.jumps():
            l_static += rate * jump_dissipator(n, j, k)

    drive = drive_operator(basis)
    lower = np.triu(drive, k=1)
    raise_ = np.tril(drive, k=-1)
    if params is not None:
        logger.debug(
            "assembled Liouvillian dim=%d for g=%.6g theta=%.6g (%d rate tables)",
            n * n,
            params.g,
            params.theta,
            len(rate_tables),
        )
    return Superoperator(
        l_static=l_static,
        l_drive=commutator_superop(drive),
        l_drive_lower=commutator_superop(lower),
        l_drive_raise=commutator_superop(raise_),
        n_dressed=n,
        omega_max=basis.omega_max,
    )


def standard_rate_tables(basis: DressedBasis, params: ModelParams, dephasing_power: int = 1) -> list[RateTable]:
    tables = [
        relaxation_rates(basis, Channel.CAVITY, params.gamma_a, params.omega0),
        relaxation_rates(basis, Channel.QUBIT, params.gamma_x, params.omega0),
    ]
    if params.gamma_deph > 0:
        tables.append(dephasing_rates(basis, params.gamma_deph, dephasing_power))
    return tables


def build_superoperator(basis: DressedBasis, params: ModelParams, dephasing_power: int = 1) -> Superoperator:
    return assemble_liouvillian(basis, standard_rate_tables(basis, params, dephasing_power), params)


def trace_row(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex).ravel()


def rate_rows(tables: Sequence[RateTable]) -> list[list[object]]:
    """Rows ``channel, j, k, delta_kj, abs_C_jk_sq, rate`` for the debug dump."""
    rows: list[list[object]] = []
    for table in tables:
        for j, k, rate in table.jumps():
            rows.append(
                [table.channel.value, j, k, float(table.delta[j, k]), float(table.abs_c_sq[j, k]), rate]
            )
    return rows


__all__ = [
    "Channel",
    "RateTable",
    "Superoperator",
    "relaxation_rates",
    "dephasing_rates",
    "spre",
    "spost",
    "commutator_superop",
    "lindblad_dissipator",
    "jump_dissipator",
    "assemble_liouvillian",
    "standard_rate_tables",
    "build_superoperator",
    "trace_row",
    "rate_rows",
]
