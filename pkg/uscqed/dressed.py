"""Dressed basis of H0: eigenpairs, transition tables, parity labels and the
positive-frequency part of the field derivative."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg

from .model import ModelParams, OperatorSet, build_hamiltonian, build_operators, parity_operator
from .sim_errors import ConfigError, EigensolverError, NotParityEigenstate

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-10
PARITY_THRESHOLD = 0.99


@dataclass(frozen=True)
class DressedBasis:
    """Lowest ``n_dressed`` eigenpairs of H0 with their transition tables.

    ``delta[k, j] = omega_k - omega_j``; ``x_elems[j, k] = <j|X|k>`` with
    ``X = -i(a - a†)``; ``c_elems_a`` / ``c_elems_x`` hold ``-i<j|(c - c†)|k>``
    for ``c = a`` and ``c = sigma^-``.
    """

    energies: np.ndarray
    ground_energy: float
    states: np.ndarray
    delta: np.ndarray
    x_elems: np.ndarray
    c_elems_a: np.ndarray
    c_elems_x: np.ndarray
    parity_expect: np.ndarray
    sigma_z_expect: np.ndarray
    operators: OperatorSet = field(repr=False)
    parity: Optional[tuple[int, ...]] = None
    degeneracy_tol: float = DEGENERACY_TOL

    @property
    def n_dressed(self) -> int:
        return int(self.energies.shape[0])

    @property
    def relative_energies(self) -> np.ndarray:
        return self.energies - self.ground_energy

    @property
    def omega_max(self) -> float:
        """Largest retained transition frequency."""
        return float(self.energies[-1] - self.energies[0])

    def transition(self, k: int, j: int) -> float:
        return float(self.delta[k, j])


@dataclass(frozen=True)
class SpectrumSweep:
    g_grid: np.ndarray
    levels: np.ndarray  # shape (len(g_grid), L), each row ascending
    params: ModelParams
    relative: bool = True

    def rows(self) -> list[list[float]]:
        return [[float(g), *map(float, row)] for g, row in zip(self.g_grid, self.levels)]

    def header(self) -> list[str]:
        return ["g", *[f"E{i}" for i in range(self.levels.shape[1])]]


def diagonalize(
    h0: np.ndarray,
    n_dressed: int,
    operators: OperatorSet | None = None,
    *,
    degeneracy_tol: float = DEGENERACY_TOL,
    context: Optional[dict] = None,
) -> DressedBasis:
    dim = h0.shape[0]
    if h0.shape != (dim, dim) or dim % 2:
        raise ConfigError(f"h0 must be a square matrix of even dimension, got shape {h0.shape}")
    if not 2 <= n_dressed <= dim:
        raise ConfigError(f"n_dressed must lie in [2, {dim}], got {n_dressed}")
    ops = operators if operators is not None else build_operators(dim // 2)
    try:
        energies, vectors = scipy.linalg.eigh(h0)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"eigensolver failed: {exc}", context or {"dim": dim}) from exc
    if not np.all(np.isfinite(energies)):
        raise EigensolverError("eigensolver returned non-finite energies", context or {"dim": dim})

    parity = parity_operator(ops)
    energies, vectors = _resolve_degeneracies(energies, vectors, parity, degeneracy_tol)
    if n_dressed < dim and energies[n_dressed] - energies[n_dressed - 1] <= degeneracy_tol:
        logger.warning("dressed truncation n_dressed=%d splits a degenerate level", n_dressed)
    energies = energies[:n_dressed]
    vectors = _fix_phases(vectors[:, :n_dressed])

    x_bare = -1j * (ops.a - ops.a_dag)
    c_x_bare = -1j * (ops.sigma_minus - ops.sigma_plus)
    x_elems = _rotate(vectors, x_bare)
    c_elems_x = _rotate(vectors, c_x_bare)
    parity_expect = np.real(np.einsum("ij,ik,kj->j", vectors.conj(), parity, vectors))
    sigma_z_expect = np.real(np.einsum("ij,ik,kj->j", vectors.conj(), ops.sigma_z, vectors))
    labels: Optional[tuple[int, ...]] = None
    if np.all(np.abs(parity_expect) >= PARITY_THRESHOLD):
        labels = tuple(int(np.sign(p)) for p in parity_expect)
    logger.debug(
        "diagonalized dim=%d n_dressed=%d E0=%.12g Emax=%.12g", dim, n_dressed, energies[0], energies[-1]
    )
    return DressedBasis(
        energies=energies,
        ground_energy=float(energies[0]),
        states=vectors,
        delta=energies[:, None] - energies[None, :],
        x_elems=x_elems,
        c_elems_a=x_elems.copy(),
        c_elems_x=c_elems_x,
        parity_expect=parity_expect,
        sigma_z_expect=sigma_z_expect,
        operators=ops,
        parity=labels,
        degeneracy_tol=degeneracy_tol,
    )


def dressed_basis(params: ModelParams) -> DressedBasis:
    pair = build_hamiltonian(params)
    return diagonalize(pair.h0, params.n_dressed, pair.operators, context=params.as_dict())


def parity_labels(basis: DressedBasis) -> list[int]:
    labels = []
    for j, value in enumerate(basis.parity_expect):
        if abs(value) < PARITY_THRESHOLD:
            raise NotParityEigenstate(
                f"dressed state {j} has <P> = {value:.6f}; parity is only conserved at theta = pi/2",
                {"state": j, "parity_expect": float(value)},
            )
        labels.append(1 if value > 0 else -1)
    return labels


def rotate_operator(basis: DressedBasis, op: np.ndarray) -> np.ndarray:
    return _rotate(basis.states, op)


def drive_operator(basis: DressedBasis) -> np.ndarray:
    """(a + a†) in the truncated dressed basis."""
    return rotate_operator(basis, basis.operators.a + basis.operators.a_dag)


def positive_frequency_part(basis: DressedBasis) -> np.ndarray:
    # [j, k] entry carries Delta_kj X_jk, kept only for k > j
    weighted = basis.delta.T * basis.x_elems
    return -1j * np.triu(weighted, k=1)


def negative_frequency_part(basis: DressedBasis) -> np.ndarray:
    return positive_frequency_part(basis).conj().T


def transition_rows(basis: DressedBasis) -> list[list[float]]:
    """Rows ``j, k, delta_kj, abs_X_jk`` for k > j (magnitudes only, phases are gauge)."""
    rows = []
    n = basis.n_dressed
    for j in range(n):
        for k in range(j + 1, n):
            rows.append([j, k, float(basis.delta[k, j]), float(abs(basis.x_elems[j, k]))])
    return rows


def spectrum_levels(params: ModelParams, g: float, n_levels: int, *, relative: bool = True) -> np.ndarray:
    point = params.with_updates(g=float(g))
    h0 = build_hamiltonian(point).h0
    if not 1 <= n_levels <= h0.shape[0]:
        raise ConfigError(f"number of levels must lie in [1, {h0.shape[0]}], got {n_levels}")
    try:
        levels = scipy.linalg.eigvalsh(h0, subset_by_index=[0, n_levels - 1])
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"eigensolver failed: {exc}", point.as_dict()) from exc
    if relative:
        levels = levels - levels[0]
    return np.sort(levels)


def spectrum_sweep(
    params: ModelParams,
    g_grid: Sequence[float],
    n_levels: int,
    *,
    relative: bool = True,
) -> SpectrumSweep:
    grid = np.asarray(list(g_grid), dtype=float)
    if grid.size == 0:
        raise ConfigError("g_grid must not be empty")
    if np.any(np.diff(grid) < 0):
        raise ConfigError("g_grid must be ascending")
    levels = np.vstack([spectrum_levels(params, g, n_levels, relative=relative) for g in grid])
    return SpectrumSweep(g_grid=grid, levels=levels, params=params, relative=relative)


def parity_resolved_levels(params: ModelParams, n_levels: int) -> dict[int, np.ndarray]:
    """Lowest levels of H0 inside each parity sector (meaningful at theta = pi/2)."""
    pair = build_hamiltonian(params)
    diag_p = np.real(np.diag(parity_operator(pair.operators)))
    result: dict[int, np.ndarray] = {}
    for sign in (1, -1):
        mask = np.isclose(diag_p, sign)
        block = pair.h0[np.ix_(mask, mask)]
        count = min(n_levels, block.shape[0])
        result[sign] = scipy.linalg.eigvalsh(block, subset_by_index=[0, count - 1])
    return result


# ---------------------------------------------------------------- helpers
def _rotate(vectors: np.ndarray, op: np.ndarray) -> np.ndarray:
    return vectors.conj().T @ op @ vectors


def _clusters(energies: np.ndarray, tol: float) -> Iterable[slice]:
    start = 0
    for idx in range(1, len(energies) + 1):
        if idx == len(energies) or energies[idx] - energies[idx - 1] > tol:
            yield slice(start, idx)
            start = idx


def _resolve_degeneracies(
    energies: np.ndarray, vectors: np.ndarray, parity: np.ndarray, tol: float
) -> tuple[np.ndarray, np.ndarray]:
    vectors = vectors.copy()
    index_weight = np.diag(np.arange(vectors.shape[0], dtype=float))
    for block in _clusters(energies, tol):
        if block.stop - block.start < 2:
            continue
        sub = vectors[:, block]
        # parity eigenstates first, then the most bare-like basis inside equal-parity subspaces
        p_vals, p_vecs = np.linalg.eigh(sub.conj().T @ parity @ sub)
        sub = sub @ p_vecs
        rounded = np.round(p_vals, 8)
        for value in np.unique(rounded):
            cols = np.flatnonzero(rounded == value)
            if cols.size > 1:
                inner = sub[:, cols]
                _, w_vecs = np.linalg.eigh(inner.conj().T @ index_weight @ inner)
                sub[:, cols] = inner @ w_vecs
        p_expect = np.real(np.einsum("ij,ik,kj->j", sub.conj(), parity, sub))
        dominant = np.argmax(np.abs(sub) ** 2 - 1e-12 * np.arange(sub.shape[0])[:, None], axis=0)
        order = sorted(range(sub.shape[1]), key=lambda c: (-round(abs(p_expect[c]), 10), int(dominant[c])))
        vectors[:, block] = sub[:, order]
        logger.debug("resolved %d-fold degeneracy at E=%.12g", block.stop - block.start, energies[block.start])
    return energies, vectors


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    vectors = vectors.copy()
    magnitudes = np.abs(vectors)
    for col in range(vectors.shape[1]):
        peak = magnitudes[:, col].max()
        idx = int(np.flatnonzero(magnitudes[:, col] >= peak - 1e-10)[0])
        phase = vectors[idx, col] / magnitudes[idx, col]
        vectors[:, col] *= np.conj(phase)
    return vectors


__all__ = [
    "DEGENERACY_TOL",
    "DressedBasis",
    "SpectrumSweep",
    "diagonalize",
    "dressed_basis",
    "parity_labels",
    "rotate_operator",
    "drive_operator",
    "positive_frequency_part",
    "negative_frequency_part",
    "transition_rows",
    "spectrum_levels",
    "spectrum_sweep",
    "parity_resolved_levels",
]
