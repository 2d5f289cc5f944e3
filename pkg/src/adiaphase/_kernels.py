"""Hot inner loops along the time grid.

Every kernel exists twice: a pure-numpy version and a numba ``@njit``
version with the same signature. The module-level names dispatch to the
numba versions when numba is importable and ``ADIAPHASE_DISABLE_NUMBA`` is
not set to a truthy value; otherwise to numpy.

Array conventions: eigenvector stacks have shape ``(n_samples, d, d)`` with
eigenvectors in the columns; per-level series have shape ``(n_samples, d)``.
"""

import os

import numpy as np

_TRUTHY = {"1", "true", "yes", "on"}


def _numba_requested():
    return os.environ.get("ADIAPHASE_DISABLE_NUMBA", "").strip().lower() not in _TRUTHY


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def parallel_transport_numpy(vectors):
    """Rephase each column so consecutive overlaps are real and positive.

    Returns ``(fixed, min_abs_overlap, argmin_step)`` where ``argmin_step`` is
    the index ``k`` of the worst link ``(k, k+1)``.
    """
    n, d, _ = vectors.shape
    if n < 2:
        return vectors.copy(), 1.0, 0
    # overlaps[k, j] = <raw_j(t_k) | raw_j(t_{k+1})>
    overlaps = np.einsum("kij,kij->kj", vectors[:-1].conj(), vectors[1:])
    mags = np.abs(overlaps)
    flat = int(np.argmin(mags))
    worst_step = flat // d
    # fixed_k = raw_k exp(-i theta_k), theta_k = sum of raw link angles;
    # a second pass removes the rounding picked up by the long cumsum
    fixed = vectors
    for _ in range(2):
        theta = np.zeros((n, d))
        np.cumsum(np.angle(overlaps), axis=0, out=theta[1:])
        fixed = fixed * np.exp(-1j * theta)[:, None, :]
        overlaps = np.einsum("kij,kij->kj", fixed[:-1].conj(), fixed[1:])
    return fixed, float(mags.min()), worst_step


def link_phase_sum_numpy(vectors):
    """Cumulative ``-sum arg<v_j(t_l)|v_j(t_{l+1})>`` with each angle in (-pi, pi]."""
    n, d, _ = vectors.shape
    out = np.zeros((n, d))
    if n < 2:
        return out
    overlaps = np.einsum("kij,kij->kj", vectors[:-1].conj(), vectors[1:])
    angles = np.angle(overlaps)
    angles[angles == -np.pi] = np.pi
    np.cumsum(-angles, axis=0, out=out[1:])
    return out


def cumulative_trapezoid_numpy(values, h):
    """Running trapezoidal integral along axis 0; first row is zero."""
    out = np.zeros_like(values, dtype=np.float64)
    if values.shape[0] > 1:
        np.cumsum(0.5 * h * (values[1:] + values[:-1]), axis=0, out=out[1:])
    return out


def propagate_numpy(u_hi, u_lo, psi0):
    """psi_{k+1} = (U_hi + U_lo)_k psi_k carried in extended precision.

    ``u_hi`` / ``u_lo`` are the leading and residual double parts of each step
    matrix, shape ``(n_steps, d, d)``. Returns ``(n_steps + 1, d)`` rounded to
    complex128. Where longdouble is plain double this is an ordinary loop.
    """
    n_steps, d, _ = u_hi.shape
    out = np.empty((n_steps + 1, d), dtype=np.complex128)
    u = u_hi.astype(np.clongdouble) + u_lo.astype(np.clongdouble)
    psi = psi0.astype(np.clongdouble)
    out[0] = psi0
    for k in range(n_steps):
        psi = u[k] @ psi
        out[k + 1] = psi
    return out


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None

HAVE_NUMBA = njit is not None

if HAVE_NUMBA:

    @njit(cache=True)
    def parallel_transport_numba(vectors):
        n, d, _ = vectors.shape
        fixed = vectors.copy()
        min_mag = 1.0
        worst = 0
        for k in range(1, n):
            for j in range(d):
                ov = 0j
                for i in range(d):
                    ov += np.conj(fixed[k - 1, i, j]) * vectors[k, i, j]
                mag = abs(ov)
                if mag < min_mag:
                    min_mag = mag
                    worst = k - 1
                if mag > 0.0:
                    rot = np.conj(ov) / mag
                    for i in range(d):
                        fixed[k, i, j] = vectors[k, i, j] * rot
        return fixed, min_mag, worst

    @njit(cache=True)
    def link_phase_sum_numba(vectors):
        n, d, _ = vectors.shape
        out = np.zeros((n, d))
        for k in range(1, n):
            for j in range(d):
                ov = 0j
                for i in range(d):
                    ov += np.conj(vectors[k - 1, i, j]) * vectors[k, i, j]
                a = np.arctan2(ov.imag, ov.real)
                if a == -np.pi:
                    a = np.pi
                out[k, j] = out[k - 1, j] - a
        return out

    @njit(cache=True)
    def cumulative_trapezoid_numba(values, h):
        n, d = values.shape
        out = np.zeros((n, d))
        for k in range(1, n):
            for j in range(d):
                out[k, j] = out[k - 1, j] + 0.5 * h * (values[k, j] + values[k - 1, j])
        return out

    @njit(cache=True, inline="always")
    def _two_sum(a, b):
        s = a + b
        bb = s - a
        return s, (a - (s - bb)) + (b - bb)

    @njit(cache=True, inline="always")
    def _two_prod(a, b):
        # Dekker split; exact product a*b = p + e
        p = a * b
        c = 134217729.0 * a
        ah = c - (c - a)
        al = a - ah
        c = 134217729.0 * b
        bh = c - (c - b)
        bl = b - bh
        return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl

    @njit(cache=True)
    def propagate_numba(u_hi, u_lo, psi0):
        # state kept as double-double (hi + lo) per real component
        n_steps, d, _ = u_hi.shape
        out = np.empty((n_steps + 1, d), dtype=np.complex128)
        re_hi = psi0.real.copy()
        im_hi = psi0.imag.copy()
        re_lo = np.zeros(d)
        im_lo = np.zeros(d)
        nre_hi = np.empty(d)
        nre_lo = np.empty(d)
        nim_hi = np.empty(d)
        nim_lo = np.empty(d)
        for i in range(d):
            out[0, i] = psi0[i]
        for k in range(n_steps):
            for i in range(d):
                sr = 0.0
                er = 0.0
                si = 0.0
                ei = 0.0
                for m in range(d):
                    a = u_hi[k, i, m].real
                    b = u_hi[k, i, m].imag
                    c = re_hi[m]
                    e = im_hi[m]
                    # real: a c - b e ; imag: a e + b c, each product and sum exact
                    p, q = _two_prod(a, c)
                    sr, t = _two_sum(sr, p)
                    er += q + t
                    p, q = _two_prod(-b, e)
                    sr, t = _two_sum(sr, p)
                    er += q + t
                    p, q = _two_prod(a, e)
                    si, t = _two_sum(si, p)
                    ei += q + t
                    p, q = _two_prod(b, c)
                    si, t = _two_sum(si, p)
                    ei += q + t
                    # first-order corrections: U_hi * psi_lo + U_lo * psi_hi
                    al = u_lo[k, i, m].real
                    bl = u_lo[k, i, m].imag
                    er += a * re_lo[m] - b * im_lo[m] + al * c - bl * e
                    ei += a * im_lo[m] + b * re_lo[m] + al * e + bl * c
                nre_hi[i], nre_lo[i] = _two_sum(sr, er)
                nim_hi[i], nim_lo[i] = _two_sum(si, ei)
            for i in range(d):
                re_hi[i] = nre_hi[i]
                re_lo[i] = nre_lo[i]
                im_hi[i] = nim_hi[i]
                im_lo[i] = nim_lo[i]
                out[k + 1, i] = complex(re_hi[i], im_hi[i])
        return out

else:  # pragma: no cover
    parallel_transport_numba = None
    link_phase_sum_numba = None
    cumulative_trapezoid_numba = None
    propagate_numba = None


BACKENDS = {
    "numpy": {
        "parallel_transport": parallel_transport_numpy,
        "link_phase_sum": link_phase_sum_numpy,
        "cumulative_trapezoid": cumulative_trapezoid_numpy,
        "propagate": propagate_numpy,
    },
}
if HAVE_NUMBA:
    BACKENDS["numba"] = {
        "parallel_transport": parallel_transport_numba,
        "link_phase_sum": link_phase_sum_numba,
        "cumulative_trapezoid": cumulative_trapezoid_numba,
        "propagate": propagate_numba,
    }

BACKEND = "numba" if HAVE_NUMBA and _numba_requested() else "numpy"


def parallel_transport(vectors):
    fixed, min_mag, worst = BACKENDS[BACKEND]["parallel_transport"](
        np.ascontiguousarray(vectors, dtype=np.complex128)
    )
    return fixed, float(min_mag), int(worst)


def link_phase_sum(vectors):
    return BACKENDS[BACKEND]["link_phase_sum"](
        np.ascontiguousarray(vectors, dtype=np.complex128)
    )


def cumulative_trapezoid(values, h):
    return BACKENDS[BACKEND]["cumulative_trapezoid"](
        np.ascontiguousarray(values, dtype=np.float64), float(h)
    )


def propagate(u_hi, u_lo, psi0):
    return BACKENDS[BACKEND]["propagate"](
        np.ascontiguousarray(u_hi, dtype=np.complex128),
        np.ascontiguousarray(u_lo, dtype=np.complex128),
        np.ascontiguousarray(psi0, dtype=np.complex128),
    )


def warmup():
    """Trigger JIT compilation on tiny inputs (no-op on the numpy backend)."""
    if BACKEND != "numba":
        return
    v = np.eye(2, dtype=np.complex128)[None].repeat(3, axis=0)
    parallel_transport(v)
    link_phase_sum(v)
    cumulative_trapezoid(np.zeros((3, 2)), 0.1)
    propagate(v[:2], np.zeros_like(v[:2]), np.array([1.0, 0.0], dtype=complex))
