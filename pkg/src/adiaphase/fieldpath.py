"""Classical driving-field trajectories R(t) and uniform time grids.

Units: hbar = 1 everywhere. A spin Hamiltonian written as (mu hbar / 2) B.sigma
in physical units is (mu / 2) B.sigma here, so energies, frequencies and
inverse times share one unit.
"""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class TimeGrid:
    """Uniform samples ``t_k = k T / N`` for ``k = 0..N``."""

    duration: float
    steps: int

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"step count must be a positive integer, got {self.steps!r}")
        if not np.isfinite(self.duration) or self.duration <= 0:
            raise ValueError(f"grid duration must be positive and finite, got {self.duration!r}")

    @property
    def step(self) -> float:
        return self.duration / self.steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.step

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.steps) + 0.5) * self.step

    def __len__(self):
        return self.steps + 1


@dataclass(frozen=True)
class FieldPath:
    """A field trajectory t -> (X_1, ..., X_m) on [0, duration].

    ``sampler`` must accept a 1-D array of times and return an array of shape
    ``(len(times), dimension)``. Use :meth:`from_function` to wrap a scalar
    function instead.
    """

    dimension: int
    duration: float
    sampler: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("field dimension must be >= 1")
        if not self.duration > 0:
            raise ValueError("path duration must be positive")

    @classmethod
    def from_function(cls, fn, dimension, duration):
        def sampler(times):
            return np.array([np.asarray(fn(t), dtype=float).reshape(dimension) for t in times])

        return cls(dimension, float(duration), sampler)

    def _check_times(self, times):
        # tolerate rounding in k*T/N at the right endpoint
        slack = 1e-12 * max(1.0, self.duration)
        if np.any(times < -slack) or np.any(times > self.duration + slack):
            bad = times[(times < -slack) | (times > self.duration + slack)][0]
            raise ValueError(f"t={bad!r} outside path interval [0, {self.duration}]")

    def sample(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        self._check_times(times)
        values = np.asarray(self.sampler(times), dtype=float).reshape(len(times), self.dimension)
        if not np.all(np.isfinite(values)):
            raise ValueError("field sampler returned non-finite values")
        return values

    def __call__(self, t: float) -> np.ndarray:
        return self.sample([t])[0]


@dataclass(frozen=True)
class PrecessingFieldParams:
    """Field of constant modulus precessing about z at fixed polar angle."""

    B: float
    theta: float
    omega: float

    def __post_init__(self):
        if not self.B > 0:
            raise ValueError("field modulus B must be positive")
        if not 0.0 <= self.theta <= np.pi:
            raise ValueError("polar angle theta must lie in [0, pi]")
        if self.omega < 0:
            raise ValueError("precession frequency omega must be >= 0")


def precessing_field(params: PrecessingFieldParams, t):
    """(B sin(theta) cos(omega t), B sin(theta) sin(omega t), B cos(theta)).

    ``t`` may be a scalar (returns shape ``(3,)``) or an array (``(n, 3)``).
    """
    t = np.asarray(t, dtype=float)
    phi = params.omega * t
    s = params.B * np.sin(params.theta)
    z = np.full_like(phi, params.B * np.cos(params.theta))
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=-1)


def precessing_path(params: PrecessingFieldParams, duration: float) -> FieldPath:
    return FieldPath(3, float(duration), lambda times: precessing_field(params, times))


def piecewise_linear_path(knots: Sequence) -> FieldPath:
    """Linear interpolation through ``[(t_0, x_0), (t_1, x_1), ...]`` with ``t_0 = 0``."""
    if len(knots) < 2:
        raise ValueError("piecewise path needs at least two knots")
    times = np.array([float(k[0]) for k in knots])
    try:
        values = np.array([np.atleast_1d(np.asarray(k[1], dtype=float)) for k in knots])
    except ValueError as exc:
        raise ValueError("knot vectors must all have the same dimension") from exc
    if values.ndim != 2:
        raise ValueError("knot vectors must all have the same dimension")
    if times[0] != 0.0:
        raise ValueError("first knot must be at t=0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("knot times must be strictly increasing")
    if not np.all(np.isfinite(values)):
        raise ValueError("knot values must be finite")

    def sampler(t):
        return np.stack([np.interp(t, times, values[:, c]) for c in range(values.shape[1])], axis=-1)

    return FieldPath(values.shape[1], float(times[-1]), sampler)
