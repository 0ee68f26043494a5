import math

import numpy as np
import pytest

from ..circuit import (
    DIAGRAM_STATES,
    DOWN,
    REFERENCE_CIRCUIT,
    UP,
    CircuitParams,
    crossing_flux,
    level_diagram,
    margin_report,
    max_mixing_angle,
    mixing_angle,
    mode_mixing_coupling,
    model_params_from_flux,
    qubit_frequency,
    uncoupled_levels,
)
from ..sim_errors import ConfigError, ResonanceUnreachable


def test_sweet_spot():
    assert qubit_frequency(REFERENCE_CIRCUIT, 0.0) == pytest.approx(2.25)
    cos_t, sin_t = mixing_angle(REFERENCE_CIRCUIT, 0.0)
    assert cos_t == 0.0
    assert sin_t == pytest.approx(1.0)
    assert mode_mixing_coupling(REFERENCE_CIRCUIT, 0.0) == 0.0


def test_symmetric_bias_point():
    cos_t, sin_t = mixing_angle(REFERENCE_CIRCUIT, 2.25)
    assert cos_t == pytest.approx(1 / math.sqrt(2))
    assert sin_t == pytest.approx(1 / math.sqrt(2))


@pytest.mark.parametrize("dphi", [-3.0, -0.4, 0.0, 0.7, 1.252, 5.0])
def test_mixing_angle_normalised(dphi):
    cos_t, sin_t = mixing_angle(REFERENCE_CIRCUIT, dphi)
    assert cos_t**2 + sin_t**2 == pytest.approx(1.0, abs=1e-14)
    assert qubit_frequency(REFERENCE_CIRCUIT, dphi) >= REFERENCE_CIRCUIT.delta_gap


def test_qubit_frequency_at_resonance_bias():
    assert qubit_frequency(REFERENCE_CIRCUIT, 1.252) == pytest.approx(2.575, abs=1e-3)


def test_level_differences():
    wq = qubit_frequency(REFERENCE_CIRCUIT, 0.8)
    w1, w2, _ = REFERENCE_CIRCUIT.mode_freqs
    diff = uncoupled_levels(REFERENCE_CIRCUIT, 0.8, (1, 0, 0), UP) - uncoupled_levels(REFERENCE_CIRCUIT, 0.8, (0, 1, 0), DOWN)
    assert diff == pytest.approx(wq + w1 - w2)
    photon = uncoupled_levels(REFERENCE_CIRCUIT, 0.0, (1, 0, 0), DOWN) - uncoupled_levels(REFERENCE_CIRCUIT, 0.0, (0, 0, 0), DOWN)
    assert photon == pytest.approx(w1)
    with pytest.raises(ConfigError):
        uncoupled_levels(REFERENCE_CIRCUIT, 0.0, (0, 0), DOWN)
    with pytest.raises(ConfigError):
        uncoupled_levels(REFERENCE_CIRCUIT, 0.0, (0, 0, 0), 0)


def test_cos_theta_bound():
    assert max_mixing_angle(REFERENCE_CIRCUIT) == pytest.approx(0.486, abs=0.005)
    assert max_mixing_angle(CircuitParams(delta_gap=0.0)) == pytest.approx(1.0)
    near = CircuitParams(delta_gap=REFERENCE_CIRCUIT.resonance_gap - 1e-9)
    assert max_mixing_angle(near) < 1e-3
    with pytest.raises(ResonanceUnreachable):
        max_mixing_angle(CircuitParams(delta_gap=3.0))


def test_crossing_flux_and_coupling():
    bias = crossing_flux(REFERENCE_CIRCUIT)
    assert qubit_frequency(REFERENCE_CIRCUIT, bias) == pytest.approx(REFERENCE_CIRCUIT.resonance_gap, abs=1e-12)
    assert mixing_angle(REFERENCE_CIRCUIT, bias)[0] == pytest.approx(max_mixing_angle(REFERENCE_CIRCUIT), abs=1e-12)
    assert mode_mixing_coupling(REFERENCE_CIRCUIT, bias) == pytest.approx(0.0107, abs=3e-4)
    assert abs(mode_mixing_coupling(REFERENCE_CIRCUIT, -bias)) == pytest.approx(mode_mixing_coupling(REFERENCE_CIRCUIT, bias))
    with pytest.raises(ResonanceUnreachable):
        crossing_flux(CircuitParams(delta_gap=3.0))


def test_margin_report_rows():
    bias = crossing_flux(REFERENCE_CIRCUIT)
    rows = margin_report(REFERENCE_CIRCUIT, [0.0, 0.5, bias])
    assert len(rows) == 3
    assert rows[0][2] == 0.0
    assert math.isinf(rows[0][4])
    assert rows[1][4] > 1.0
    assert abs(rows[2][3]) < 1e-9


def test_level_diagram_columns():
    labels, rows = level_diagram(REFERENCE_CIRCUIT, np.linspace(0.0, 2.0, 5))
    assert labels == [label for label, _, _ in DIAGRAM_STATES]
    assert rows.shape == (5, len(DIAGRAM_STATES) + 1)
    assert np.allclose(rows[:, 1], 0.0)
    assert rows[0, labels.index("down_100") + 1] == pytest.approx(REFERENCE_CIRCUIT.mode_freqs[0])


def test_model_params_from_flux():
    params = model_params_from_flux(REFERENCE_CIRCUIT, 1.0, n_fock=12, n_dressed=8)
    cos_t, sin_t = mixing_angle(REFERENCE_CIRCUIT, 1.0)
    assert params.omega_x == pytest.approx(qubit_frequency(REFERENCE_CIRCUIT, 1.0) / 2.782)
    assert params.g == pytest.approx(0.314 / 2.782)
    assert math.cos(params.theta) == pytest.approx(cos_t)
    assert params.n_fock == 12
    assert model_params_from_flux(REFERENCE_CIRCUIT, 0.0).theta == pytest.approx(math.pi / 2)
    with pytest.raises(ConfigError):
        model_params_from_flux(REFERENCE_CIRCUIT, 0.0, mode=4)


def test_invalid_circuit_params():
    with pytest.raises(ConfigError):
        CircuitParams(mode_freqs=(5.0, 3.0, 7.0))
    with pytest.raises(ConfigError):
        CircuitParams(mode_couplings=(0.1, 0.2))
