"""Closed forms for a spin-1/2 in a precessing field (hbar = 1, mu > 0, omega >= 0)."""

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fieldpath import PrecessingFieldParams
from .hamiltonian import SIGMA_X, SIGMA_Y, SIGMA_Z
from .phases import constant_gauge

AXIS_EPS = 1e-12


class GaugeArbitraryWarning(UserWarning):
    """Field on the z axis: the closed-form eigenvector is a limit with a fixed azimuth."""


@dataclass(frozen=True)
class SpinGauge:
    """Level phases: f(t) on the lower eigenvector, g(t) on the upper one.

    Both callables take arrays of times and must be continuous.
    """

    f: Callable = field(default_factory=constant_gauge)
    g: Callable = field(default_factory=constant_gauge)

    def values(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.f(t), t.shape), np.broadcast_to(self.g(t), t.shape)

    def check_continuity(self, times, max_increment=0.5):
        """Sampled continuity: no jump larger than ``max_increment`` between neighbours."""
        f, g = self.values(times)
        worst = max(np.max(np.abs(np.diff(f)), initial=0.0), np.max(np.abs(np.diff(g)), initial=0.0))
        if worst > max_increment:
            raise ValueError(f"gauge increment {worst:.3g} exceeds {max_increment} on this grid")


def analytic_basis(fields, f_values, g_values) -> np.ndarray:
    """Stack of closed-form eigenvector pairs, shape ``(n, 2, 2)``, lower level in column 0.

    lower = e^{if} sqrt((B - Bz)/2B) [up - (Bx + iBy)/(B - Bz) down]
    upper = e^{ig} sqrt((B + Bz)/2B) [up + (Bx + iBy)/(B + Bz) down]

    On the +z axis the lower vector is replaced by its azimuth-0 limit
    -e^{if}|down>; on the -z axis the upper one by e^{ig}|down>.
    """
    b = np.atleast_2d(np.asarray(fields, dtype=float))
    f = np.broadcast_to(np.asarray(f_values, dtype=float), b.shape[:1])
    g = np.broadcast_to(np.asarray(g_values, dtype=float), b.shape[:1])
    mod = np.linalg.norm(b, axis=1)
    if np.any(mod == 0):
        raise ValueError("closed-form eigenvectors need a nonzero field")
    bz = b[:, 2]
    bxy = b[:, 0] + 1j * b[:, 1]
    # B -+ Bz without cancellation: (Bx^2 + By^2) / (B +- Bz) on the far hemisphere
    rho2 = b[:, 0] ** 2 + b[:, 1] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        minus = np.where(bz > 0, rho2 / (mod + bz), mod - bz)
        plus = np.where(bz < 0, rho2 / (mod - bz), mod + bz)
    north = minus < AXIS_EPS * mod
    south = plus < AXIS_EPS * mod
    if np.any(north | south):
        warnings.warn("field along the z axis; eigenvector phase is a fixed-azimuth limit",
                      GaugeArbitraryWarning, stacklevel=2)

    out = np.zeros((len(b), 2, 2), dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        lower_up = np.sqrt(minus / (2 * mod))
        lower_down = -bxy / minus * lower_up
        upper_up = np.sqrt(plus / (2 * mod))
        upper_down = bxy / plus * upper_up
    lower_up = np.where(north, 0.0, lower_up)
    lower_down = np.where(north, -1.0, lower_down)
    upper_up = np.where(south, 0.0, upper_up)
    upper_down = np.where(south, 1.0, upper_down)

    ef, eg = np.exp(1j * f), np.exp(1j * g)
    out[:, 0, 0] = ef * lower_up
    out[:, 1, 0] = ef * lower_down
    out[:, 0, 1] = eg * upper_up
    out[:, 1, 1] = eg * upper_down
    return out


def analytic_eigenvectors(b_field, gauge: SpinGauge = SpinGauge(), t=0.0):
    """(lower, upper) normalised eigenvectors of (mu/2) B.sigma at time ``t``."""
    f, g = gauge.values(t)
    basis = analytic_basis(np.asarray(b_field, dtype=float)[None], f, g)[0]
    return basis[:, 0], basis[:, 1]


def analytic_phases(params: PrecessingFieldParams, gauge: SpinGauge, t):
    """Closed-form geometric phases (lower, upper) in the gauge ``(f, g)``.

    lower: -(f(t) - f(0)) - cos^2(theta/2) omega t
    upper: -(g(t) - g(0)) - sin^2(theta/2) omega t
    """
    t = np.asarray(t, dtype=float)
    f_t, g_t = gauge.values(t)
    f_0, g_0 = gauge.values(0.0)
    wt = params.omega * t
    lower = -(f_t - f_0) - np.cos(params.theta / 2) ** 2 * wt
    upper = -(g_t - g_0) - np.sin(params.theta / 2) ** 2 * wt
    return lower, upper


def rotating_frame_exact(params: PrecessingFieldParams, mu: float, psi0, t):
    """Exact state under the precessing-field Hamiltonian at time(s) ``t``.

    The Hamiltonian satisfies H(t) = U(t) H(0) U(t)^dagger with
    U(t) = exp(-i omega t sigma_z / 2). In the frame rotating with the field
    the Hamiltonian is static, H_rot = H(0) - (omega/2) sigma_z, so
    psi(t) = U(t) exp(-i t H_rot) psi0.

    Scalar ``t`` gives shape ``(2,)``; an array of times gives ``(n, 2)``.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    half = 0.5 * mu * params.B
    # H_rot = n . sigma; exp(-i t n.sigma) = cos(|n| t) - i sin(|n| t) nhat.sigma
    n = np.array([half * np.sin(params.theta), 0.0, half * np.cos(params.theta) - 0.5 * params.omega])
    r = np.linalg.norm(n)
    if r > 0:
        ns = (n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z) / r
        rotated = np.cos(r * times)[:, None] * psi0 - 1j * np.sin(r * times)[:, None] * (ns @ psi0)
    else:
        rotated = np.broadcast_to(psi0, (len(times), 2)).copy()
    frame = np.exp(-0.5j * params.omega * times[:, None] * np.array([1.0, -1.0]))
    out = frame * rotated
    return out[0] if scalar else out
