import math

import numpy as np
import pytest
import scipy.linalg
from scipy.optimize import brentq

from ..dressed import (
    dressed_basis,
    drive_operator,
    negative_frequency_part,
    parity_labels,
    parity_resolved_levels,
    positive_frequency_part,
    rotate_operator,
    spectrum_sweep,
    transition_rows,
)
from ..model import ModelParams, build_hamiltonian
from ..sim_errors import ConfigError, NotParityEigenstate

MIXED = ModelParams(n_fock=20, n_dressed=10)
TRANSVERSE = MIXED.with_updates(theta=math.pi / 2)


def test_energies_ascending_and_delta_antisymmetric():
    basis = dressed_basis(MIXED)
    assert np.all(np.diff(basis.energies) >= 0)
    assert np.allclose(basis.delta, -basis.delta.T)
    assert basis.delta[2, 0] == pytest.approx(basis.energies[2] - basis.energies[0])
    assert basis.relative_energies[0] == 0.0
    assert basis.transition(2, 1) == pytest.approx(basis.delta[2, 0] - basis.delta[1, 0])


def test_polariton_positions():
    basis = dressed_basis(MIXED)
    assert basis.delta[2, 0] == pytest.approx(1.1532, abs=1e-3)
    assert basis.delta[1, 0] == pytest.approx(0.8439, abs=1e-3)
    assert basis.delta[2, 1] == pytest.approx(0.3093, abs=1e-3)


def test_lower_polariton_matches_high_truncation():
    reference = scipy.linalg.eigvalsh(build_hamiltonian(MIXED.with_updates(n_fock=80)).h0, subset_by_index=[0, 1])
    basis = dressed_basis(MIXED.with_updates(n_fock=40))
    assert basis.delta[1, 0] == pytest.approx(reference[1] - reference[0], abs=1e-8)



def test_eigenpairs_reconstruct_hamiltonian():
    h0 = build_hamiltonian(MIXED).h0
    basis = dressed_basis(MIXED)
    residual = h0 @ basis.states - basis.states * basis.energies[None, :]
    assert np.max(np.abs(residual)) < 1e-10 * np.max(np.abs(h0))
    projected = basis.states.conj().T @ h0 @ basis.states
    assert np.allclose(projected, np.diag(basis.energies), atol=1e-10)


def test_states_orthonormal_and_phase_fixed():
    basis = dressed_basis(MIXED)
    overlap = basis.states.conj().T @ basis.states
    assert np.allclose(overlap, np.eye(basis.n_dressed), atol=1e-12)
    for col in range(basis.n_dressed):
        vec = basis.states[:, col]
        peak = np.argmax(np.abs(vec))
        assert abs(vec[peak].imag) < 1e-12
        assert vec[peak].real > 0


def test_transition_tables_hermitian():
    basis = dressed_basis(MIXED)
    assert np.allclose(basis.x_elems, basis.x_elems.conj().T)
    assert np.allclose(basis.c_elems_x, basis.c_elems_x.conj().T)
    assert np.allclose(basis.c_elems_a, basis.x_elems)


def test_degenerate_uncoupled_levels_ordered_by_bare_index():
    params = ModelParams(g=0.0, omega_x=1.0, n_fock=6, n_dressed=4)
    basis = dressed_basis(params)
    assert np.allclose(basis.relative_energies, [0.0, 1.0, 1.0, 2.0])
    # |g,1> has bare index 1, |e,0> has bare index n_fock
    assert abs(basis.states[1, 1]) == pytest.approx(1.0)
    assert abs(basis.states[params.n_fock, 2]) == pytest.approx(1.0)


def test_parity_labels_uncoupled_ground():
    basis = dressed_basis(ModelParams(g=0.0, omega_x=0.9, n_fock=6, n_dressed=4))
    assert parity_labels(basis)[0] == -1


def test_parity_labels_transverse_polaritons():
    labels = parity_labels(dressed_basis(TRANSVERSE))
    assert labels[1] != labels[0]
    assert labels[2] != labels[0]
    assert dressed_basis(TRANSVERSE).parity == tuple(labels)


def test_parity_labels_fail_for_mixed_coupling():
    basis = dressed_basis(MIXED)
    with pytest.raises(NotParityEigenstate):
        parity_labels(basis)
    assert basis.parity is None


def test_positive_frequency_part_annihilates_ground():
    for params in (MIXED, TRANSVERSE, ModelParams(g=0.0, omega_x=0.9, n_fock=6, n_dressed=6)):
        basis = dressed_basis(params)
        xp = positive_frequency_part(basis)
        assert np.linalg.norm(xp[:, 0]) == 0.0
        assert np.allclose(np.tril(xp), 0.0)
        assert np.allclose(negative_frequency_part(basis), xp.conj().T)


def test_selection_rule_for_transverse_coupling():
    basis = dressed_basis(TRANSVERSE)
    assert abs(basis.x_elems[1, 2]) < 1e-10
    assert abs(positive_frequency_part(basis)[1, 2]) < 1e-10
    assert abs(positive_frequency_part(dressed_basis(MIXED))[1, 2]) > 1e-3


def test_bare_cavity_limit_of_field_derivative():
    params = ModelParams(g=0.0, omega_x=0.9, n_fock=6, n_dressed=6)
    basis = dressed_basis(params)
    xp = positive_frequency_part(basis)
    a_dressed = rotate_operator(basis, basis.operators.a)
    # photon transitions only: -i * omega0 * X^+ with X^+ = -i a
    assert np.allclose(np.abs(xp), np.abs(np.triu(a_dressed, k=1)), atol=1e-12)


def test_drive_operator_is_hermitian():
    d = drive_operator(dressed_basis(MIXED))
    assert np.allclose(d, d.conj().T)


def test_transition_rows_layout():
    basis = dressed_basis(ModelParams(n_fock=10, n_dressed=4))
    rows = transition_rows(basis)
    assert len(rows) == 6
    j, k, delta, mag = rows[0]
    assert (j, k) == (0, 1)
    assert delta == pytest.approx(basis.delta[1, 0])
    assert mag == pytest.approx(abs(basis.x_elems[0, 1]))


def test_spectrum_sweep_uncoupled_resonant():
    sweep = spectrum_sweep(ModelParams(g=0.0, n_fock=10, n_dressed=8), [0.0], 4)
    assert np.allclose(sweep.levels[0], [0.0, 1.0, 1.0, 2.0])
    assert sweep.header() == ["g", "E0", "E1", "E2", "E3"]
    assert sweep.rows()[0][0] == 0.0


def test_spectrum_sweep_rejects_bad_grids():
    with pytest.raises(ConfigError):
        spectrum_sweep(MIXED, [], 4)
    with pytest.raises(ConfigError):
        spectrum_sweep(MIXED, [0.2, 0.1], 4)


def _level_gap(params, g, even_index, odd_index):
    levels = parity_resolved_levels(params.with_updates(g=g), 4)
    return levels[1][even_index] - levels[-1][odd_index]


def test_transverse_spectrum_has_exact_crossing():
    params = ModelParams(theta=math.pi / 2, n_fock=40, n_dressed=8)
    grid = np.linspace(0.05, 1.0, 60)
    found = None
    for even_index in range(3):
        for odd_index in range(3):
            gaps = [_level_gap(params, g, even_index, odd_index) for g in grid]
            for i in range(len(grid) - 1):
                if gaps[i] * gaps[i + 1] < 0:
                    found = (even_index, odd_index, grid[i], grid[i + 1])
                    break
            if found:
                break
        if found:
            break
    assert found is not None
    even_index, odd_index, lo, hi = found
    g_cross = brentq(lambda g: _level_gap(params, g, even_index, odd_index), lo, hi, xtol=1e-13)
    assert abs(_level_gap(params, g_cross, even_index, odd_index)) < 1e-8


def test_mixed_coupling_avoids_crossings():
    sweep = spectrum_sweep(ModelParams(theta=0.93, n_fock=30, n_dressed=8), np.linspace(0.05, 0.5, 46), 6)
    gaps = np.diff(sweep.levels, axis=1)
    assert np.min(gaps) > 1e-6
