"""Geometric and dynamical phases of quantum states under noncyclic adiabatic driving.

Units: hbar = 1. Level indices in the Python API are 0-based and ascend in
energy; CSV headers and the CLI ``level`` key count from 1.
"""

from ._kernels import BACKEND
from .analytic_spin import SpinGauge, analytic_basis, analytic_eigenvectors, analytic_phases, rotating_frame_exact
from .evolution import (
    InitialDecomposition,
    adiabatic_deviation,
    adiabatic_state,
    adiabatic_states,
    decompose_initial,
    exact_propagate,
)
from .fieldpath import FieldPath, PrecessingFieldParams, TimeGrid, piecewise_linear_path, precessing_field, precessing_path
from .hamiltonian import (
    HamiltonianFamily,
    MatrixTermsBuilder,
    SpinModelParams,
    family_at,
    matrix_family,
    spin_family,
    spin_half_hamiltonian,
)
from .observables import ObservableOp, expectation_value, gauge_invariance_report, interference_term
from .phases import (
    GaugeFunction,
    PhaseLedger,
    apply_gauge,
    average_energy,
    build_ledger,
    dynamical_phase_factor,
    gauge_transformed_phase,
    geometric_phase,
    phase_difference,
    relative_gauge,
)
from .spectral import (
    GaugeContinuationError,
    NonDegenerateViolation,
    SpectralError,
    SpectralTrajectory,
    continue_gauge,
    eigensystem,
    spectral_trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "adiabatic_deviation",
    "adiabatic_state",
    "adiabatic_states",
    "analytic_basis",
    "analytic_eigenvectors",
    "analytic_phases",
    "apply_gauge",
    "average_energy",
    "BACKEND",
    "build_ledger",
    "continue_gauge",
    "decompose_initial",
    "dynamical_phase_factor",
    "eigensystem",
    "exact_propagate",
    "expectation_value",
    "family_at",
    "FieldPath",
    "gauge_invariance_report",
    "gauge_transformed_phase",
    "GaugeContinuationError",
    "GaugeFunction",
    "geometric_phase",
    "HamiltonianFamily",
    "InitialDecomposition",
    "interference_term",
    "matrix_family",
    "MatrixTermsBuilder",
    "NonDegenerateViolation",
    "ObservableOp",
    "phase_difference",
    "PhaseLedger",
    "piecewise_linear_path",
    "precessing_field",
    "precessing_path",
    "PrecessingFieldParams",
    "relative_gauge",
    "rotating_frame_exact",
    "spectral_trajectory",
    "SpectralError",
    "SpectralTrajectory",
    "spin_family",
    "spin_half_hamiltonian",
    "SpinGauge",
    "SpinModelParams",
    "TimeGrid",
]
