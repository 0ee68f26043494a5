"""Independent bare-basis Lindblad pipeline for the Jaynes-Cummings limit,
compared against the dressed-state machinery at vanishing coupling."""

import math

import numpy as np
import pytest
import scipy.linalg

from ..config import NumericsConfig
from ..dissipation import build_superoperator, trace_row
from ..dressed import dressed_basis
from ..model import ModelParams
from ..observables import EmissionModel, g2_tau

N_FOCK = 4
PARAMS = ModelParams(g=1e-6, theta=math.pi / 2, omega_x=1.0, n_fock=N_FOCK, n_dressed=2 * N_FOCK)


def _bare_operators(n):
    a = np.diag(np.sqrt(np.arange(1, n)), 1).astype(complex)
    sm = np.array([[0, 1], [0, 0]], dtype=complex)
    a_full = np.kron(np.eye(2), a)
    sm_full = np.kron(sm, np.eye(n))
    return a_full, sm_full


def _lindblad(h, c_ops):
    eye = np.eye(h.shape[0])
    gen = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c in c_ops:
        cdc = c.conj().T @ c
        gen += np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T)
    return gen


def _jc_generator(params, omega_d, drive):
    a, sm = _bare_operators(params.n_fock)
    h = (
        (params.omega0 - omega_d) * a.conj().T @ a
        + (params.omega_x - omega_d) * sm.conj().T @ sm
        - params.g * (a @ sm.conj().T + a.conj().T @ sm)
        + 0.5 * drive * (a + a.conj().T)
    )
    c_ops = [math.sqrt(params.gamma_a) * a, math.sqrt(params.gamma_x) * sm]
    return _lindblad(h, c_ops), a


def _slowest_decay(generator):
    rates = -np.real(scipy.linalg.eigvals(generator))
    return np.min(rates[rates > 1e-9])


def test_generator_decay_matches_standard_lindblad():
    basis = dressed_basis(PARAMS)
    superop = build_superoperator(basis, PARAMS)
    oracle, _ = _jc_generator(PARAMS, 0.0, 0.0)
    assert _slowest_decay(superop.l_static) == pytest.approx(_slowest_decay(oracle), rel=1e-3)
    assert np.max(np.abs(trace_row(basis.n_dressed) @ superop.l_static)) < 1e-12


def test_g2_tau_matches_standard_regression():
    basis = dressed_basis(PARAMS)
    omega_d = float(basis.delta[1, 0])
    params = PARAMS.with_updates(omega_d=omega_d)

    oracle, a = _jc_generator(params, omega_d, params.Omega)
    null = scipy.linalg.null_space(oracle)
    rho = null[:, 0].reshape(a.shape)
    rho = rho / np.trace(rho)
    number = a.conj().T @ a
    flux = np.real(np.trace(number @ rho))
    taus = np.array([0.0, 10.0, 40.0, 100.0, 250.0])
    seed = (a @ rho @ a.conj().T).ravel()
    expected = []
    for tau in taus:
        sigma = (scipy.linalg.expm(oracle * tau) @ seed).reshape(a.shape)
        expected.append(np.real(np.trace(number @ sigma)) / flux**2)

    numerics = NumericsConfig(qss_tol=1e-13)
    result = g2_tau(params, taus, numerics, model=EmissionModel.build(params, numerics))
    assert np.allclose(result.values, expected, rtol=1e-3)
