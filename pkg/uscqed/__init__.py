__version__ = "0.1.0"

from .dressed import DressedBasis, dressed_basis, spectrum_sweep
from .model import ModelParams, build_hamiltonian, build_operators
from .observables import fluorescence_spectrum, g2_tau, g2_zero, g2_zero_sweep, naive_photon_number, output_flux
from .sim_errors import ConfigError, SimulationError

__all__ = [
    "__version__",
    "ModelParams",
    "build_operators",
    "build_hamiltonian",
    "DressedBasis",
    "dressed_basis",
    "spectrum_sweep",
    "output_flux",
    "naive_photon_number",
    "g2_zero",
    "g2_zero_sweep",
    "g2_tau",
    "fluorescence_spectrum",
    "ConfigError",
    "SimulationError",
]
