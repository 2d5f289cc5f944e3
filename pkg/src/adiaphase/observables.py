"""Expectation values split into cross-level interference terms, and their basis checks."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .evolution import InitialDecomposition
from .hamiltonian import SIGMA_X, SIGMA_Y, SIGMA_Z, check_hermitian
from .phases import GaugeFunction, PhaseLedger, apply_gauge, build_ledger
from .spectral import SpectralTrajectory

IMAG_ATOL = 1e-12


@dataclass(frozen=True)
class ObservableOp:
    """A Hermitian observable, static (``matrix``) or time-dependent (``sampler``).

    ``sampler`` maps an array of times ``(n,)`` to matrices ``(n, d, d)``.
    """

    name: str
    matrix: Optional[np.ndarray] = None
    sampler: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if (self.matrix is None) == (self.sampler is None):
            raise ValueError("give exactly one of matrix or sampler")
        if self.matrix is not None:
            object.__setattr__(self, "matrix", check_hermitian(np.asarray(self.matrix, dtype=complex),
                                                               what=f"observable {self.name}"))

    def sample(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self.matrix is not None:
            return np.broadcast_to(self.matrix, (len(times),) + self.matrix.shape)
        return check_hermitian(np.asarray(self.sampler(times), dtype=complex), what=f"observable {self.name}")

    def at(self, t):
        return self.sample([t])[0]


PAULI_OBSERVABLES = {
    "sigma_x": ObservableOp("sigma_x", SIGMA_X),
    "sigma_y": ObservableOp("sigma_y", SIGMA_Y),
    "sigma_z": ObservableOp("sigma_z", SIGMA_Z),
}


def _weights(decomp, ledger, steps):
    # a_j exp(i gamma_j) exp(-i t <E_j>)
    return decomp.coefficients * np.exp(1j * (ledger.geometric[steps] + ledger.dynamical_argument[steps]))


def _matrix_elements(traj, obs, steps):
    # m[s, k, j] = <v_k(t_s)| O(t_s) |v_j(t_s)>
    v = traj.vectors[steps]
    o = obs.sample(traj.times[steps])
    return np.einsum("sik,sil,slj->skj", v.conj(), o, v)


def interference_terms(decomp, ledger, traj, obs, step) -> np.ndarray:
    """Matrix of all interference terms at one sample; entry ``[j, k]`` is term (j, k)."""
    if len(decomp.coefficients) != traj.dimension or obs.at(0.0).shape[0] != traj.dimension:
        raise ValueError("decomposition, trajectory and observable must share the dimension")
    w = _weights(decomp, ledger, step)
    m = _matrix_elements(traj, obs, [step])[0]
    return w[:, None] * w.conj()[None, :] * m.T


def interference_term(decomp, ledger, traj, obs, j, k, step) -> complex:
    """a_j a_k* exp(i(gamma_j - gamma_k)) exp(-i t(<E_j> - <E_k>)) <v_k|O|v_j>."""
    return complex(interference_terms(decomp, ledger, traj, obs, step)[j, k])


def expectation_value(state, obs: ObservableOp, t=0.0, imag_atol=IMAG_ATOL) -> float:
    psi = np.asarray(state, dtype=complex)
    value = np.vdot(psi, obs.at(t) @ psi)
    if abs(value.imag) > imag_atol:
        raise ValueError(f"<psi|O|psi> has imaginary part {value.imag:.3e}; is O Hermitian?")
    return float(value.real)


def _expectations(decomp, ledger, traj, obs, steps):
    w = _weights(decomp, ledger, steps)
    m = _matrix_elements(traj, obs, steps)
    term_sum = np.einsum("sk,skj,sj->s", w.conj(), m, w)
    psi = np.einsum("sij,sj->si", traj.vectors[steps], w)
    o = obs.sample(traj.times[steps])
    direct = np.einsum("si,sij,sj->s", psi.conj(), o, psi)
    return direct, term_sum


@dataclass(frozen=True)
class GaugeReport:
    """Observable and phase bookkeeping in two instantaneous bases.

    ``discrepancy`` compares the two bases; ``consistency`` compares the direct
    expectation with the interference-term sum inside each basis;
    ``phase_law_residual`` checks the rephased phase differences against the
    shift -(alpha_j(t) - alpha_j(0)) + (alpha_k(t) - alpha_k(0)).
    """

    observable: str
    steps: np.ndarray
    direct: np.ndarray
    term_sum: np.ndarray
    direct_gauged: np.ndarray
    term_sum_gauged: np.ndarray
    discrepancy: float
    consistency: float
    imaginary_residual: float
    phase_law_residual: float
    phase_shift_residual: float

    @property
    def worst(self) -> float:
        return max(self.discrepancy, self.consistency, self.imaginary_residual,
                   self.phase_law_residual, self.phase_shift_residual)


def gauge_invariance_report(
    decomp: InitialDecomposition,
    traj: SpectralTrajectory,
    ledger: PhaseLedger,
    obs: ObservableOp,
    alpha: GaugeFunction,
    steps,
    gauged_ledger: Optional[PhaseLedger] = None,
) -> GaugeReport:
    """Recompute every interference term in the basis rephased by ``alpha``.

    Coefficients become a_j exp(-i alpha_j(0)); geometric phases are recomputed
    from the rephased trajectory (pass ``gauged_ledger`` to reuse one).
    """
    steps = np.atleast_1d(np.asarray(steps, dtype=int))
    g_traj = apply_gauge(traj, alpha)
    g_ledger = gauged_ledger if gauged_ledger is not None else build_ledger(g_traj)
    g_decomp = decomp.rephased(alpha.initial)

    direct, term_sum = _expectations(decomp, ledger, traj, obs, steps)
    g_direct, g_term_sum = _expectations(g_decomp, g_ledger, g_traj, obs, steps)

    discrepancy = max(np.max(np.abs(direct - g_direct)), np.max(np.abs(term_sum - g_term_sum)))
    consistency = max(np.max(np.abs(direct - term_sum)), np.max(np.abs(g_direct - g_term_sum)))
    imag = np.max(np.abs(np.concatenate([direct, term_sum, g_direct, g_term_sum]).imag))

    d_alpha = alpha.increment(steps)
    shift = g_ledger.geometric[steps] - ledger.geometric[steps]
    phase_shift_residual = np.max(np.abs(shift + d_alpha))
    # all pairwise differences at once: (gamma~_j - gamma~_k) - (gamma_j - gamma_k) = -(da_j - da_k)
    pair = (shift[:, :, None] - shift[:, None, :]) + (d_alpha[:, :, None] - d_alpha[:, None, :])
    phase_law_residual = np.max(np.abs(pair))

    return GaugeReport(
        observable=obs.name,
        steps=steps,
        direct=direct.real,
        term_sum=term_sum.real,
        direct_gauged=g_direct.real,
        term_sum_gauged=g_term_sum.real,
        discrepancy=float(discrepancy),
        consistency=float(consistency),
        imaginary_residual=float(imag),
        phase_law_residual=float(phase_law_residual),
        phase_shift_residual=float(phase_shift_residual),
    )
