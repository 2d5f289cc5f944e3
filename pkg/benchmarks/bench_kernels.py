"""Time the numba and numpy kernel backends on the same inputs.

    python benchmarks/bench_kernels.py [--steps N] [--dim D] [--repeat R]

Prints one row per kernel with the best-of-R wall time per backend and the
speed-up. Inputs are a precessing-field trajectory (d = 2) or a random
Hermitian family (d > 2).
"""

import argparse
import time

import numpy as np

from adiaphase import _kernels
from adiaphase.evolution import step_unitaries
from adiaphase.fieldpath import FieldPath, PrecessingFieldParams, TimeGrid, precessing_path
from adiaphase.hamiltonian import MatrixTermsBuilder, SpinModelParams, matrix_family, random_hermitian, spin_family
from adiaphase.spectral import reference_gauge


def _inputs(steps, dim, rng):
    if dim == 2:
        duration = 2 * np.pi / 0.01
        fam = spin_family(SpinModelParams(1.0), precessing_path(PrecessingFieldParams(1.0, np.pi / 3, 0.01), duration))
        grid = TimeGrid(duration, steps)
    else:
        builder = MatrixTermsBuilder([(c, random_hermitian(rng, dim, 0.5)) for c in range(2)],
                                     offset=np.diag(np.arange(dim, dtype=float) * 2.0))
        fam = matrix_family(builder, FieldPath.from_function(lambda t: (np.cos(t), np.sin(t)), 2, 10.0))
        grid = TimeGrid(10.0, steps)
    evals, evecs = np.linalg.eigh(fam.sample(grid.times))
    vectors = reference_gauge(evecs * np.exp(1j * rng.uniform(0, 2 * np.pi, size=(len(grid), 1, dim))))
    mid_e, mid_v = np.linalg.eigh(fam.sample(grid.midpoints))
    hi, lo = step_unitaries(mid_e, mid_v, grid.step)
    psi0 = np.zeros(dim, dtype=complex)
    psi0[0] = 1.0
    return {
        "parallel_transport": (vectors,),
        "link_phase_sum": (vectors,),
        "cumulative_trapezoid": (evals, grid.step),
        "propagate": (hi, lo, psi0),
    }


def _best(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=100_000)
    parser.add_argument("--dim", type=int, default=2)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    _kernels.warmup()
    inputs = _inputs(args.steps, args.dim, np.random.default_rng(0))
    print(f"steps={args.steps} dim={args.dim} best of {args.repeat}")
    print(f"{'kernel':<22}{'numpy [ms]':>12}{'numba [ms]':>12}{'speed-up':>10}")
    for name, call_args in inputs.items():
        t_np = _best(_kernels.BACKENDS["numpy"][name], call_args, args.repeat)
        t_nb = _best(_kernels.BACKENDS["numba"][name], call_args, args.repeat)
        print(f"{name:<22}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
