"""Truncated operator algebra and the static Hamiltonian of the TLS–cavity model.

Basis ordering is TLS-major: index ``s * n_fock + n`` for the product state
``|s> ⊗ |n>`` with ``s = 0`` the TLS ground state ``|g>`` and ``s = 1`` the
excited state ``|e>``. ``sigma_z |e> = +|e>``.

A coupling term proportional to ``(a + a†) sigma_y`` is not provided: it can be
rotated away around the z-axis and does not change the physics.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Any

import numpy as np

from .sim_errors import ConfigError

DEFAULT_N_FOCK = 20
DEFAULT_N_DRESSED = 16


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters in units of a reference frequency (``omega0 = 1`` by convention)."""

    omega0: float = 1.0
    omega_x: float = 1.0
    g: float = 0.2
    theta: float = 0.93
    Omega: float = 1e-4
    omega_d: float = 1.0
    gamma_a: float = 1e-2
    gamma_x: float = 1e-2
    gamma_deph: float = 0.0
    n_fock: int = DEFAULT_N_FOCK
    n_dressed: int = DEFAULT_N_DRESSED

    def __post_init__(self) -> None:
        if not self.omega0 > 0:
            raise ConfigError(f"omega0 must be positive, got {self.omega0}")
        if not self.omega_x > 0:
            raise ConfigError(f"omega_x must be positive, got {self.omega_x}")
        if self.g < 0:
            raise ConfigError(f"g must be non-negative, got {self.g}")
        for name in ("gamma_a", "gamma_x", "gamma_deph", "Omega"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.omega_d < 0:
            raise ConfigError(f"omega_d must be non-negative, got {self.omega_d}")
        if not 0.0 <= self.theta <= math.pi:
            raise ConfigError(f"theta must lie in [0, pi], got {self.theta}")
        if int(self.n_fock) != self.n_fock or self.n_fock < 2:
            raise ConfigError(f"n_fock must be an integer >= 2, got {self.n_fock}")
        if int(self.n_dressed) != self.n_dressed or not 2 <= self.n_dressed <= 2 * self.n_fock:
            raise ConfigError(
                f"n_dressed must satisfy 2 <= n_dressed <= 2*n_fock, got {self.n_dressed} (n_fock={self.n_fock})"
            )

    @property
    def gamma_min(self) -> float:
        """Smallest non-zero damping rate; zero when the system is undamped."""
        positive = [rate for rate in (self.gamma_a, self.gamma_x) if rate > 0]
        return min(positive) if positive else 0.0

    def with_updates(self, **changes: Any) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class OperatorSet:
    a: np.ndarray
    a_dag: np.ndarray
    sigma_x: np.ndarray
    sigma_y: np.ndarray
    sigma_z: np.ndarray
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray
    identity: np.ndarray
    n_fock: int

    @property
    def dim(self) -> int:
        return 2 * self.n_fock

    @property
    def number(self) -> np.ndarray:
        return self.a_dag @ self.a


@dataclass(frozen=True)
class HamiltonianPair:
    h0: np.ndarray
    h_drive_op: np.ndarray
    operators: OperatorSet


def build_operators(n_fock: int) -> OperatorSet:
    if int(n_fock) != n_fock or n_fock < 2:
        raise ConfigError(f"n_fock must be an integer >= 2, got {n_fock}")
    n_fock = int(n_fock)
    fock_eye = np.eye(n_fock, dtype=complex)
    tls_eye = np.eye(2, dtype=complex)

    lowering = np.diag(np.sqrt(np.arange(1, n_fock, dtype=float)), k=1).astype(complex)
    sm = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e| in the (g, e) ordering

    a = np.kron(tls_eye, lowering)
    a_dag = a.conj().T
    sigma_minus = np.kron(sm, fock_eye)
    sigma_plus = sigma_minus.conj().T
    sigma_x = sigma_plus + sigma_minus
    sigma_y = -1j * (sigma_plus - sigma_minus)
    sigma_z = np.kron(np.diag([-1.0, 1.0]).astype(complex), fock_eye)
    return OperatorSet(
        a=a,
        a_dag=a_dag,
        sigma_x=sigma_x,
        sigma_y=sigma_y,
        sigma_z=sigma_z,
        sigma_plus=sigma_plus,
        sigma_minus=sigma_minus,
        identity=np.eye(2 * n_fock, dtype=complex),
        n_fock=n_fock,
    )


def build_hamiltonian(params: ModelParams, operators: OperatorSet | None = None) -> HamiltonianPair:
    ops = operators if operators is not None else build_operators(params.n_fock)
    if ops.n_fock != params.n_fock:
        raise ConfigError(f"operator truncation {ops.n_fock} does not match n_fock={params.n_fock}")
    field = ops.a + ops.a_dag
    qubit_coupling = math.cos(params.theta) * ops.sigma_z - math.sin(params.theta) * ops.sigma_x
    h0 = (
        params.omega0 * ops.number
        + params.omega_x * (ops.sigma_plus @ ops.sigma_minus)
        + params.g * (field @ qubit_coupling)
    )
    # field and qubit_coupling act on different factors and commute, so h0 is Hermitian
    h0 = 0.5 * (h0 + h0.conj().T)
    return HamiltonianPair(h0=h0, h_drive_op=field, operators=ops)


def parity_operator(operators: OperatorSet) -> np.ndarray:
    """P = sigma_z exp(i pi a†a); the Fock factor is diag((-1)^n)."""
    signs = (-1.0) ** np.arange(operators.n_fock)
    fock_parity = np.kron(np.eye(2), np.diag(signs)).astype(complex)
    return operators.sigma_z @ fock_parity


__all__ = [
    "DEFAULT_N_FOCK",
    "DEFAULT_N_DRESSED",
    "ModelParams",
    "OperatorSet",
    "HamiltonianPair",
    "build_operators",
    "build_hamiltonian",
    "parity_operator",
]
