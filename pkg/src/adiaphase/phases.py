"""Geometric and dynamical phases along a spectral trajectory, and basis rephasing.

Geometric phases use the discrete Berry connection: the phase accumulated
between samples ``t_l`` and ``t_{l+1}`` is ``-arg <v_j(t_l)|v_j(t_{l+1})>``.
That sum changes by exactly ``-(beta_j(t_k) - beta_j(0))`` when every frame is
rephased by ``exp(i beta_j(t_k))``, so basis changes telescope without error.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .fieldpath import TimeGrid
from .spectral import SpectralTrajectory


def constant_gauge(value=0.0):
    return lambda t: np.full_like(np.asarray(t, dtype=float), float(value))


def linear_gauge(rate, offset=0.0):
    return lambda t: offset + rate * np.asarray(t, dtype=float)


def sinusoidal_gauge(amplitude, frequency, phase=0.0):
    return lambda t: amplitude * np.sin(frequency * np.asarray(t, dtype=float) + phase)


@dataclass(frozen=True)
class GaugeFunction:
    """Per-level real phases alpha_n(t_k) defining |Phi_n> = exp(i alpha_n) |phi_n>."""

    grid: TimeGrid
    values: np.ndarray  # (N+1, d), radians

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != len(self.grid):
            raise ValueError(f"gauge values must have shape ({len(self.grid)}, d), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("gauge values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def dimension(self) -> int:
        return self.values.shape[1]

    @property
    def initial(self) -> np.ndarray:
        return self.values[0]

    def increment(self, step=None) -> np.ndarray:
        """alpha_n(t_k) - alpha_n(0) for every level (all samples if ``step`` is None)."""
        if step is None:
            return self.values - self.values[0]
        return self.values[step] - self.values[0]

    @classmethod
    def zero(cls, grid, d):
        return cls(grid, np.zeros((len(grid), d)))

    @classmethod
    def from_callables(cls, grid, functions):
        t = grid.times
        return cls(grid, np.stack([np.broadcast_to(f(t), t.shape) for f in functions], axis=1))

    @classmethod
    def random_fourier(cls, grid, d, rng, modes=3, amplitude=np.pi):
        """Smooth periodic gauge: offset plus ``modes`` Fourier harmonics of the grid span.

        Mode ``m`` has coefficients uniform in ``[-amplitude/m, amplitude/m]``,
        and the offset is uniform in ``[-pi, pi)``. The period equals the grid
        duration, so ``alpha(T) = alpha(0)``.
        """
        t = grid.times / grid.duration
        m = np.arange(1, modes + 1)
        bound = amplitude / m
        a = rng.uniform(-1, 1, size=(d, modes)) * bound
        b = rng.uniform(-1, 1, size=(d, modes)) * bound
        offset = rng.uniform(-np.pi, np.pi, size=d)
        arg = 2 * np.pi * t[:, None] * m[None, :]
        values = offset + np.cos(arg) @ a.T + np.sin(arg) @ b.T
        return cls(grid, values)


@dataclass(frozen=True)
class PhaseLedger:
    grid: TimeGrid
    geometric: np.ndarray  # gamma_j(t_k), (N+1, d)
    average_energy: np.ndarray  # <E_j(t_k)>, (N+1, d)
    dynamical_argument: np.ndarray  # -t_k <E_j(t_k)>, (N+1, d)

    @property
    def times(self):
        return self.grid.times

    def dynamical_phase_factor(self, level, step):
        return dynamical_phase_factor(self, level, step)

    def phase_difference(self, j, k, step):
        return phase_difference(self, j, k, step)


def geometric_phase(traj: SpectralTrajectory) -> np.ndarray:
    """gamma_j(t_k) for every level and sample, ``(N+1, d)``; not reduced mod 2 pi."""
    return _kernels.link_phase_sum(traj.vectors)


def integrated_energy(traj: SpectralTrajectory) -> np.ndarray:
    """Trapezoidal running integral of E_j from 0 to t_k."""
    return _kernels.cumulative_trapezoid(traj.energies, traj.grid.step)


def average_energy(traj: SpectralTrajectory) -> np.ndarray:
    """(1/t_k) * integral_0^t_k E_j dt, with the t=0 row set to E_j(0)."""
    integral = integrated_energy(traj)
    out = np.empty_like(integral)
    out[0] = traj.energies[0]
    out[1:] = integral[1:] / traj.times[1:, None]
    return out


def build_ledger(traj: SpectralTrajectory) -> PhaseLedger:
    integral = integrated_energy(traj)
    avg = np.empty_like(integral)
    avg[0] = traj.energies[0]
    avg[1:] = integral[1:] / traj.times[1:, None]
    return PhaseLedger(traj.grid, geometric_phase(traj), avg, -integral)


def dynamical_phase_factor(ledger: PhaseLedger, level: int, step: int) -> complex:
    """exp(-i t_k <E_j(t_k)>)."""
    return complex(np.exp(1j * ledger.dynamical_argument[step, level]))


def apply_gauge(traj: SpectralTrajectory, alpha: GaugeFunction) -> SpectralTrajectory:
    """Multiply eigenvector n at sample k by exp(i alpha_n(t_k)); energies untouched."""
    if alpha.grid != traj.grid:
        raise ValueError("gauge function is sampled on a different grid than the trajectory")
    if alpha.dimension != traj.dimension:
        raise ValueError(f"gauge has {alpha.dimension} levels, trajectory has {traj.dimension}")
    return traj.with_vectors(traj.vectors * np.exp(1j * alpha.values)[:, None, :])


def gauge_transformed_phase(gamma, alpha_initial, alpha_final):
    """Geometric phase in the rephased basis: gamma - (alpha(t) - alpha(0))."""
    return gamma - (alpha_final - alpha_initial)


def phase_difference(ledger: PhaseLedger, j: int, k: int, step: int) -> float:
    """gamma_j(t) - gamma_k(t) for two distinct levels."""
    if j == k:
        raise ValueError("phase difference needs two distinct levels")
    return float(ledger.geometric[step, j] - ledger.geometric[step, k])


def relative_gauge(traj: SpectralTrajectory, vectors, atol=1e-8) -> GaugeFunction:
    """The gauge alpha with ``vectors = exp(i alpha) traj.vectors``, unwrapped along t.

    ``vectors`` must span the same eigenlines as the trajectory at every sample.
    """
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.shape != traj.vectors.shape:
        raise ValueError(f"expected vectors of shape {traj.vectors.shape}, got {vectors.shape}")
    overlaps = np.einsum("kij,kij->kj", traj.vectors.conj(), vectors)
    defect = np.max(np.abs(np.abs(overlaps) - 1.0))
    if defect > atol:
        raise ValueError(f"target vectors are not a rephasing of the trajectory (defect {defect:.3e})")
    return GaugeFunction(traj.grid, np.unwrap(np.angle(overlaps), axis=0))
