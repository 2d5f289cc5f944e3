"""Instantaneous eigensystems along a time grid, with a smooth eigenvector gauge."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .fieldpath import TimeGrid
from .hamiltonian import HamiltonianFamily, check_hermitian

DEGENERACY_RTOL = 1e-8
OVERLAP_THRESHOLD = 0.5


class SpectralError(RuntimeError):
    """A physics precondition of the spectral pipeline failed at time ``t``."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NonDegenerateViolation(SpectralError):
    pass


class GaugeContinuationError(SpectralError):
    """Consecutive eigenvectors barely overlap: refine the grid or a level crossing."""


@dataclass(frozen=True)
class SpectralFrame:
    t: float
    energies: np.ndarray  # (d,), ascending
    vectors: np.ndarray  # (d, d), eigenvectors in columns

    @property
    def min_gap(self) -> float:
        if len(self.energies) < 2:
            return np.inf
        return float(np.min(np.diff(self.energies)))


@dataclass(frozen=True)
class SpectralTrajectory:
    grid: TimeGrid
    energies: np.ndarray  # (N+1, d)
    vectors: np.ndarray  # (N+1, d, d)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def dimension(self) -> int:
        return self.energies.shape[1]

    def __len__(self):
        return self.energies.shape[0]

    def frame(self, k: int) -> SpectralFrame:
        return SpectralFrame(float(self.times[k]), self.energies[k], self.vectors[k])

    def with_vectors(self, vectors) -> "SpectralTrajectory":
        return SpectralTrajectory(self.grid, self.energies, vectors)


def eigensystem(hamiltonian):
    """Ascending eigenvalues and orthonormal eigenvectors (columns), raw phases.

    Works on a single matrix or a stack of matrices.
    """
    h = check_hermitian(np.asarray(hamiltonian, dtype=complex), what="Hamiltonian")
    try:
        return np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigendecomposition failed to converge: {exc}") from exc


def reference_gauge(vectors) -> np.ndarray:
    """Make the largest-magnitude component of each column real and positive.

    Ties go to the lowest index. Accepts ``(d, d)`` or a stack ``(n, d, d)``.
    """
    v = np.asarray(vectors, dtype=complex)
    idx = np.argmax(np.abs(v), axis=-2)
    pivots = np.take_along_axis(v, idx[..., None, :], axis=-2)
    fixed = v * (pivots.conj() / np.abs(pivots))
    # pin the pivot exactly on the positive real axis
    np.put_along_axis(fixed, idx[..., None, :], np.abs(pivots).astype(complex), axis=-2)
    return fixed


def continue_gauge(prev: SpectralFrame, raw: SpectralFrame, threshold=OVERLAP_THRESHOLD) -> SpectralFrame:
    """Rephase ``raw`` so each <prev_j|new_j> is real and positive."""
    if prev.vectors.shape != raw.vectors.shape:
        raise ValueError("frames differ in dimension")
    overlaps = np.einsum("ij,ij->j", prev.vectors.conj(), raw.vectors)
    mags = np.abs(overlaps)
    if np.any(mags < threshold):
        j = int(np.argmin(mags))
        raise GaugeContinuationError(
            f"level {j} overlap {mags[j]:.3g} < {threshold} between t={prev.t:g} and "
            f"t={raw.t:g}; refine the grid or check for a level crossing",
            t=raw.t,
        )
    return SpectralFrame(raw.t, raw.energies, raw.vectors * (overlaps.conj() / mags))


def spectral_trajectory(
    fam: HamiltonianFamily,
    grid: TimeGrid,
    degeneracy_rtol=DEGENERACY_RTOL,
    overlap_threshold=OVERLAP_THRESHOLD,
) -> SpectralTrajectory:
    """Diagonalise ``fam`` on every grid sample and parallel-transport the phases.

    Frame 0 is put in :func:`reference_gauge`; every later frame is rephased so
    its overlap with the previous one is real and positive.
    """
    if grid.duration > fam.duration * (1 + 1e-12):
        raise ValueError(f"grid end {grid.duration} exceeds family duration {fam.duration}")
    times = grid.times
    energies, vectors = eigensystem(fam.sample(times))

    if energies.shape[1] > 1:
        gaps = np.min(np.diff(energies, axis=1), axis=1)
        radius = np.max(np.abs(energies), axis=1)
        bad = np.flatnonzero(gaps < degeneracy_rtol * np.maximum(1.0, radius))
        if bad.size:
            k = int(bad[0])
            raise NonDegenerateViolation(
                f"spectrum degenerate at t={float(times[k])!r} (gap {gaps[k]:.3e})", t=float(times[k])
            )

    vectors[0] = reference_gauge(vectors[0])
    fixed, min_overlap, worst = _kernels.parallel_transport(vectors)
    if min_overlap < overlap_threshold:
        raise GaugeContinuationError(
            f"eigenvector overlap {min_overlap:.3g} < {overlap_threshold} between "
            f"t={float(times[worst])!r} and t={float(times[worst + 1])!r}; refine the grid or check for a level crossing",
            t=float(times[worst + 1]),
        )
    return SpectralTrajectory(grid, energies, fixed)
