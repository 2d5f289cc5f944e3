"""Adiabatic-theorem states and exact Schroedinger propagation (hbar = 1)."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .fieldpath import TimeGrid
from .hamiltonian import HamiltonianFamily, check_hermitian
from .phases import PhaseLedger
from .spectral import SpectralFrame, SpectralTrajectory

NORM_ATOL = 1e-10


def as_state(amplitudes, atol=NORM_ATOL) -> np.ndarray:
    """Validate a normalised complex state vector."""
    psi = np.asarray(amplitudes, dtype=complex)
    if psi.ndim != 1:
        raise ValueError(f"state must be a 1-D amplitude vector, got shape {psi.shape}")
    norm = np.vdot(psi, psi).real
    if abs(norm - 1.0) > atol:
        raise ValueError(f"state is not normalised: <psi|psi> = {norm!r}")
    return psi


@dataclass(frozen=True)
class InitialDecomposition:
    """Coefficients a_j of psi(0) on the instantaneous basis at t = 0.

    ``coefficients`` has one entry per level of the Hamiltonian; levels outside
    the superposition carry zero.
    """

    coefficients: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.coefficients, dtype=complex)
        total = float(np.sum(np.abs(a) ** 2))
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"sum |a_j|^2 = {total!r}, expected 1")
        object.__setattr__(self, "coefficients", a)

    @property
    def levels(self) -> tuple:
        return tuple(int(j) for j in np.flatnonzero(self.coefficients))

    @classmethod
    def from_levels(cls, d, levels, coefficients):
        a = np.zeros(d, dtype=complex)
        a[list(levels)] = coefficients
        return cls(a)

    def rephased(self, alpha_initial) -> "InitialDecomposition":
        """Coefficients in the basis exp(i alpha_n(0)) |phi_n; 0>: a_j exp(-i alpha_j(0))."""
        return InitialDecomposition(self.coefficients * np.exp(-1j * np.asarray(alpha_initial)))


def decompose_initial(psi0, frame0: SpectralFrame) -> InitialDecomposition:
    psi0 = as_state(psi0)
    a = frame0.vectors.conj().T @ psi0
    # renormalise away rounding so the stricter 1e-12 completeness check holds
    return InitialDecomposition(a / np.sqrt(np.sum(np.abs(a) ** 2)))


def _check_shared_grid(traj, ledger):
    if traj.grid != ledger.grid:
        raise ValueError("trajectory and ledger are sampled on different grids")


def adiabatic_state(decomp: InitialDecomposition, traj: SpectralTrajectory, ledger: PhaseLedger, step: int):
    """sum_j a_j exp(i gamma_j) exp(-i t <E_j>) |v_j(t)> at sample ``step``."""
    _check_shared_grid(traj, ledger)
    if len(decomp.coefficients) != traj.dimension:
        raise ValueError("decomposition and trajectory differ in dimension")
    weights = decomp.coefficients * np.exp(1j * (ledger.geometric[step] + ledger.dynamical_argument[step]))
    return traj.vectors[step] @ weights


def adiabatic_states(decomp: InitialDecomposition, traj: SpectralTrajectory, ledger: PhaseLedger):
    """:func:`adiabatic_state` on every grid sample, shape ``(N+1, d)``."""
    _check_shared_grid(traj, ledger)
    if len(decomp.coefficients) != traj.dimension:
        raise ValueError("decomposition and trajectory differ in dimension")
    weights = decomp.coefficients * np.exp(1j * (ledger.geometric + ledger.dynamical_argument))
    return np.einsum("kij,kj->ki", traj.vectors, weights)


def step_unitaries(evals, evecs, h):
    """exp(-i h H_k) = V_k diag(exp(-i h E_k)) V_k^dagger for a stack of step Hamiltonians.

    Assembled in extended precision and returned as a pair ``(hi, lo)`` of
    complex128 stacks whose sum is the extended result. Any single double
    rounding of a step matrix leaves it off-unitary by ~1e-17 with the same
    sign on every step of a uniformly rotating field, which accumulates
    linearly in the norm.
    """
    d = evecs.shape[-1]
    v = np.asarray(evecs).astype(np.clongdouble)
    eye = np.eye(d, dtype=np.longdouble)
    for _ in range(2):  # Newton-Schulz steps towards the nearest unitary
        gram = np.einsum("kij,kil->kjl", v.conj(), v)
        v = v @ (1.5 * eye - 0.5 * gram)
    phases = np.exp(-1j * (np.longdouble(h) * np.asarray(evals).astype(np.longdouble)))
    u = np.einsum("kij,kj,klj->kil", v, phases, v.conj())
    hi = u.astype(np.complex128)
    return hi, (u - hi).astype(np.complex128)


def exact_propagate(fam: HamiltonianFamily, psi0, grid: TimeGrid) -> np.ndarray:
    """Midpoint-exponential steps psi_{k+1} = exp(-i h H(t_k + h/2)) psi_k.

    Each step exponential comes from the eigendecomposition of the midpoint
    Hamiltonian. The state is carried in compensated (double-double)
    arithmetic so rounding does not accumulate coherently across steps.
    Returns ``(N+1, d)``.
    """
    psi0 = as_state(psi0)
    if grid.duration > fam.duration * (1 + 1e-12):
        raise ValueError(f"grid end {grid.duration} exceeds family duration {fam.duration}")
    if len(psi0) != fam.dimension:
        raise ValueError(f"state has dimension {len(psi0)}, Hamiltonian {fam.dimension}")
    h_mid = check_hermitian(fam.sample(grid.midpoints), what="Hamiltonian")
    evals, evecs = np.linalg.eigh(h_mid)
    u_hi, u_lo = step_unitaries(evals, evecs, grid.step)
    return _kernels.propagate(u_hi, u_lo, psi0)


def adiabatic_deviation(exact, adiab) -> np.ndarray:
    """Global-phase-insensitive distance sqrt(2 - 2 |<exact|adiab>|) per sample."""
    exact = np.atleast_2d(np.asarray(exact, dtype=complex))
    adiab = np.atleast_2d(np.asarray(adiab, dtype=complex))
    if exact.shape != adiab.shape:
        raise ValueError(f"state series differ in shape: {exact.shape} vs {adiab.shape}")
    overlap = np.abs(np.einsum("ki,ki->k", exact.conj(), adiab))
    return np.sqrt(np.clip(2.0 - 2.0 * overlap, 0.0, None))
