"""Vacuum entanglement in linear trapped-ion chains and its detection."""

__version__ = "0.1.0"

from .chain import Chain, NormalModes, coupling_matrix, normal_modes, solve_equilibrium, truncated_coupling
from .gaussian import (
    entanglement_entropy,
    ground_state_covariance,
    log_negativity,
    reduce,
    symplectic_eigenvalues,
    two_ion_analytics,
)
from .swap import LocalModeBasis, REFERENCE_SEQUENCE, optimize_sequence, parse_sequence, run_sequence, two_qubit_eof
from .detect import DetectionConfig, assemble_rho, detect, eta_sweep, perturbative_amplitudes

__all__ = [
    "__version__",
    "Chain",
    "NormalModes",
    "coupling_matrix",
    "normal_modes",
    "solve_equilibrium",
    "truncated_coupling",
    "entanglement_entropy",
    "ground_state_covariance",
    "log_negativity",
    "reduce",
    "symplectic_eigenvalues",
    "two_ion_analytics",
    "LocalModeBasis",
    "REFERENCE_SEQUENCE",
    "optimize_sequence",
    "parse_sequence",
    "run_sequence",
    "two_qubit_eof",
    "DetectionConfig",
    "assemble_rho",
    "detect",
    "eta_sweep",
    "perturbative_amplitudes",
]
