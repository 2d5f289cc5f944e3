"""Instantaneous Hermitian operators H(R(t)) built from field paths."""

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fieldpath import FieldPath

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])

HERMITIAN_ATOL = 1e-13


class NotHermitianError(ValueError):
    pass


def hermiticity_defect(matrix) -> float:
    """Largest ``|M_ij - conj(M_ji)|`` over all entries (and stack members)."""
    m = np.asarray(matrix)
    return float(np.max(np.abs(m - np.swapaxes(m, -1, -2).conj()), initial=0.0))


def check_hermitian(matrix, atol=HERMITIAN_ATOL, what="operator"):
    m = np.asarray(matrix)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise NotHermitianError(f"{what} must be square, got shape {m.shape}")
    defect = hermiticity_defect(m)
    if defect > atol:
        raise NotHermitianError(f"{what} is not Hermitian (defect {defect:.3e} > {atol:.0e})")
    return m


@dataclass(frozen=True)
class SpinModelParams:
    """Coupling ``mu = g * mu_B`` of the spin-1/2 Zeeman Hamiltonian."""

    mu: float = 1.0

    def __post_init__(self):
        if self.mu == 0:
            raise ValueError("coupling mu must be nonzero")


def spin_half_hamiltonian(params: SpinModelParams, b_field) -> np.ndarray:
    """(mu / 2) B.sigma in the {up, down} basis of sigma_z.

    Accepts a single field ``(3,)`` or a stack ``(n, 3)``; eigenvalues are
    -mu|B|/2 (lower level for mu > 0) and +mu|B|/2.
    """
    b = np.asarray(b_field, dtype=float)
    return 0.5 * params.mu * np.tensordot(b, PAULI, axes=([-1], [0]))


@dataclass(frozen=True)
class MatrixTermsBuilder:
    """H(X) = H_0 + sum_c X_c M_c for constant Hermitian matrices."""

    terms: Sequence  # sequence of (component index, matrix)
    offset: np.ndarray = None

    def __post_init__(self):
        if not self.terms and self.offset is None:
            raise ValueError("matrix family needs at least one term")
        dims = {np.asarray(m).shape for _, m in self.terms}
        if self.offset is not None:
            dims.add(np.asarray(self.offset).shape)
        if len(dims) != 1:
            raise ValueError(f"term matrices disagree in shape: {sorted(dims)}")
        for c, m in self.terms:
            check_hermitian(m, what=f"term matrix for component {c}")
            if int(c) != c or c < 0:
                raise ValueError(f"invalid field component index {c!r}")
        if self.offset is not None:
            check_hermitian(self.offset, what="offset matrix")

    @property
    def dimension(self) -> int:
        m = self.offset if self.offset is not None else self.terms[0][1]
        return np.asarray(m).shape[0]

    @property
    def components(self) -> int:
        return 1 + max((int(c) for c, _ in self.terms), default=-1)

    def __call__(self, fields):
        fields = np.asarray(fields, dtype=float)
        d = self.dimension
        out = np.zeros(fields.shape[:-1] + (d, d), dtype=complex)
        if self.offset is not None:
            out += np.asarray(self.offset, dtype=complex)
        for c, m in self.terms:
            out += fields[..., int(c), None, None] * np.asarray(m, dtype=complex)
        return out


@dataclass(frozen=True)
class HamiltonianFamily:
    """A field path composed with a field -> Hermitian matrix builder.

    ``builder`` maps an ``(n, m)`` array of field vectors to ``(n, d, d)``.
    """

    path: FieldPath
    builder: Callable[[np.ndarray], np.ndarray]
    dimension: int
    check: bool = field(default=True, compare=False)

    @property
    def duration(self) -> float:
        return self.path.duration

    def sample(self, times) -> np.ndarray:
        fields = self.path.sample(times)
        h = np.asarray(self.builder(fields), dtype=complex)
        if h.shape != (len(fields), self.dimension, self.dimension):
            raise ValueError(
                f"builder returned shape {h.shape}, expected {(len(fields), self.dimension, self.dimension)}"
            )
        if self.check:
            check_hermitian(h, what="Hamiltonian")
        return h

    def at(self, t: float) -> np.ndarray:
        return self.sample([t])[0]


def family_at(fam: HamiltonianFamily, t: float) -> np.ndarray:
    return fam.at(t)


def spin_family(params: SpinModelParams, path: FieldPath) -> HamiltonianFamily:
    if path.dimension != 3:
        raise ValueError("spin-1/2 model needs a 3-component field")
    return HamiltonianFamily(path, lambda b: spin_half_hamiltonian(params, b), 2)


def matrix_family(builder: MatrixTermsBuilder, path: FieldPath) -> HamiltonianFamily:
    if builder.components > path.dimension:
        raise ValueError(
            f"terms reference component {builder.components - 1} but the path has {path.dimension}"
        )
    return HamiltonianFamily(path, builder, builder.dimension)


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (a + a.conj().T)
