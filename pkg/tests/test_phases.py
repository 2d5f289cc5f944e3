import numpy as np
import pytest
from scipy.integrate import quad

from adiaphase.fieldpath import FieldPath, TimeGrid, piecewise_linear_path
from adiaphase.hamiltonian import SIGMA_X, SIGMA_Z, MatrixTermsBuilder, matrix_family, random_hermitian
from adiaphase.phases import (
    GaugeFunction,
    apply_gauge,
    average_energy,
    build_ledger,
    constant_gauge,
    dynamical_phase_factor,
    gauge_transformed_phase,
    geometric_phase,
    linear_gauge,
    phase_difference,
    relative_gauge,
    sinusoidal_gauge,
)
from adiaphase.spectral import spectral_trajectory

from .conftest import constant_basis_phases, spin_setup


def _spin_traj(theta, omega, duration, steps):
    params, fam, grid = spin_setup(theta, omega, duration, steps)
    traj = spectral_trajectory(fam, grid)
    return params, traj, build_ledger(traj)


def _four_level_family(rng, duration=4.0):
    builder = MatrixTermsBuilder([(c, random_hermitian(rng, 4, 0.5)) for c in range(2)],
                                 offset=np.diag([-3.0, -1.0, 1.0, 3.0]))
    path = FieldPath.from_function(lambda t: (np.cos(t), np.sin(1.3 * t)), 2, duration)
    return matrix_family(builder, path)


def _four_level(rng, duration=4.0, steps=800):
    return spectral_trajectory(_four_level_family(rng, duration), TimeGrid(duration, steps))


def test_constant_hamiltonian_has_zero_geometric_phase(backend):
    path = piecewise_linear_path([(0, (1.0,)), (2, (1.0,))])
    traj = spectral_trajectory(matrix_family(MatrixTermsBuilder([(0, SIGMA_X + 0.3 * SIGMA_Z)]), path),
                               TimeGrid(2.0, 100))
    np.testing.assert_allclose(geometric_phase(traj), 0.0, atol=1e-15)


def test_pipeline_gauge_is_parallel_transport(backend):
    _, traj, ledger = _spin_traj(np.pi / 3, 0.01, 100.0, 2000)
    assert np.max(np.abs(ledger.geometric)) < 1e-12


@pytest.mark.parametrize("theta", [np.pi / 6, np.pi / 2, 2.0])
def test_spin_phases_in_constant_basis(backend, theta):
    omega, duration = 0.01, 100 * np.pi
    params, traj, ledger = _spin_traj(theta, omega, duration, 10_000)
    gamma = constant_basis_phases(params, traj, ledger)
    wt = omega * traj.times
    assert np.max(np.abs(gamma[:, 0] + np.cos(theta / 2) ** 2 * wt)) < 1e-6
    assert np.max(np.abs(gamma[:, 1] + np.sin(theta / 2) ** 2 * wt)) < 1e-6


def test_half_period_equator_phase_difference_vanishes():
    # theta = pi/2, omega t = pi: -pi cos^2(pi/4) + pi sin^2(pi/4) = 0
    params, traj, ledger = _spin_traj(np.pi / 2, 0.01, 100 * np.pi, 4000)
    gamma = constant_basis_phases(params, traj, ledger)
    assert gamma[-1, 0] - gamma[-1, 1] == pytest.approx(0.0, abs=1e-9)


def test_convergence_is_second_order():
    theta, omega, duration = np.pi / 3, 0.3, 50.0
    errors = []
    for steps in (1000, 2000, 4000):
        params, traj, ledger = _spin_traj(theta, omega, duration, steps)
        gamma = constant_basis_phases(params, traj, ledger)
        errors.append(abs(gamma[-1, 0] + np.cos(theta / 2) ** 2 * omega * duration))
    ratios = np.array(errors[:-1]) / np.array(errors[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5)), ratios


def test_average_energy_constant_spectrum():
    _, traj, ledger = _spin_traj(np.pi / 4, 0.1, 10.0, 200)
    np.testing.assert_allclose(ledger.average_energy, np.tile([-0.5, 0.5], (201, 1)), atol=1e-14)
    np.testing.assert_allclose(average_energy(traj), ledger.average_energy)


def test_average_energy_linear_ramp(backend):
    # E(t) = +-(1 + c t), c = 0.7 -> <E> = +-(1 + c t / 2); trapezoid is exact on a ramp
    path = piecewise_linear_path([(0, (1.0,)), (3, (3.1,))])
    traj = spectral_trajectory(matrix_family(MatrixTermsBuilder([(0, SIGMA_Z)]), path), TimeGrid(3.0, 30))
    avg = average_energy(traj)
    np.testing.assert_allclose(avg[:, 1], 1 + 0.35 * traj.times, rtol=1e-13)
    np.testing.assert_allclose(avg[:, 0], -1 - 0.35 * traj.times, rtol=1e-13)


def test_average_energy_against_quadrature(rng):
    fam = _four_level_family(rng)

    def level(t, j):
        return np.linalg.eigvalsh(fam.at(t))[j]

    exact = np.array([quad(level, 0, 4.0, args=(j,), epsabs=1e-13, limit=200)[0] for j in range(4)]) / 4.0
    errs = []
    for steps in (200, 400):
        avg = average_energy(spectral_trajectory(fam, TimeGrid(4.0, steps)))[-1]
        errs.append(np.max(np.abs(avg - exact)))
    assert errs[1] < 1e-3
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_dynamical_factor():
    _, traj, ledger = _spin_traj(np.pi / 3, 0.1, 10.0, 100)
    t = traj.times[37]
    assert dynamical_phase_factor(ledger, 0, 37) == pytest.approx(np.exp(0.5j * t), abs=1e-14)
    assert ledger.dynamical_phase_factor(1, 37) == pytest.approx(np.exp(-0.5j * t), abs=1e-14)
    assert dynamical_phase_factor(ledger, 0, 0) == 1.0
    mods = [abs(dynamical_phase_factor(ledger, j, k)) for j in range(2) for k in range(0, 101, 10)]
    np.testing.assert_allclose(mods, 1.0, atol=1e-15)


def test_zero_average_energy_gives_unit_factor():
    path = piecewise_linear_path([(0, (1.0,)), (1, (1.0,))])
    traj = spectral_trajectory(matrix_family(MatrixTermsBuilder([(0, SIGMA_X)], offset=np.eye(2)), path),
                               TimeGrid(1.0, 10))
    ledger = build_ledger(traj)
    assert dynamical_phase_factor(ledger, 0, 10) == 1.0


def test_apply_gauge_zero_is_identity():
    _, traj, _ = _spin_traj(1.0, 0.1, 10.0, 50)
    same = apply_gauge(traj, GaugeFunction.zero(traj.grid, 2))
    np.testing.assert_array_equal(same.vectors, traj.vectors)
    np.testing.assert_array_equal(same.energies, traj.energies)


def test_apply_gauge_constant_rephases_coefficients():
    from adiaphase.evolution import decompose_initial

    _, traj, _ = _spin_traj(1.0, 0.1, 10.0, 50)
    c = np.array([0.4, -1.1])
    g_traj = apply_gauge(traj, GaugeFunction.from_callables(traj.grid, [constant_gauge(x) for x in c]))
    psi0 = np.array([0.6, 0.8j])
    a = decompose_initial(psi0, traj.frame(0)).coefficients
    a_new = decompose_initial(psi0, g_traj.frame(0)).coefficients
    np.testing.assert_allclose(a_new, a * np.exp(-1j * c), atol=1e-15)
    np.testing.assert_allclose(geometric_phase(g_traj), geometric_phase(traj), atol=1e-14)


def test_apply_gauge_grid_mismatch():
    _, traj, _ = _spin_traj(1.0, 0.1, 10.0, 50)
    with pytest.raises(ValueError):
        apply_gauge(traj, GaugeFunction.zero(TimeGrid(10.0, 51), 2))
    with pytest.raises(ValueError):
        apply_gauge(traj, GaugeFunction.zero(traj.grid, 3))


def test_gauge_transformed_phase_examples():
    assert gauge_transformed_phase(-np.pi / 2, 0.0, np.pi / 4) == pytest.approx(-3 * np.pi / 4)
    assert gauge_transformed_phase(1.25, 0.3, 0.3) == 1.25


@pytest.mark.parametrize("family", ["spin", "four"])
def test_gauge_law_for_random_gauges(backend, rng, family):
    traj = _spin_traj(np.pi / 3, 0.05, 60.0, 3000)[1] if family == "spin" else _four_level(rng)
    gamma = geometric_phase(traj)
    for _ in range(5):
        alpha = GaugeFunction.random_fourier(traj.grid, traj.dimension, rng)
        g_gamma = geometric_phase(apply_gauge(traj, alpha))
        expected = gauge_transformed_phase(gamma, alpha.initial, alpha.values)
        assert np.max(np.abs(g_gamma - expected)) < 1e-10
        g_ledger = build_ledger(apply_gauge(traj, alpha))
        ledger = build_ledger(traj)
        for j in range(traj.dimension):
            for k in range(traj.dimension):
                if j == k:
                    continue
                step = int(rng.integers(len(traj.grid)))
                shift = g_ledger.phase_difference(j, k, step) - phase_difference(ledger, j, k, step)
                law = -alpha.increment(step)[j] + alpha.increment(step)[k]
                assert shift == pytest.approx(law, abs=1e-10)
        # energies are untouched so the dynamical-phase difference is identical
        np.testing.assert_array_equal(g_ledger.dynamical_argument, ledger.dynamical_argument)


def test_builtin_gauge_families():
    grid = TimeGrid(2.0, 4)
    alpha = GaugeFunction.from_callables(grid, [linear_gauge(2.0, 1.0), sinusoidal_gauge(1.0, np.pi / 2)])
    np.testing.assert_allclose(alpha.values[:, 0], 1 + 2 * grid.times)
    np.testing.assert_allclose(alpha.values[:, 1], np.sin(np.pi / 2 * grid.times), atol=1e-15)
    np.testing.assert_allclose(alpha.increment(4), [4.0, 0.0], atol=1e-15)


def test_random_fourier_gauge_is_periodic_and_seeded():
    grid = TimeGrid(3.0, 300)
    a = GaugeFunction.random_fourier(grid, 3, np.random.default_rng(1))
    b = GaugeFunction.random_fourier(grid, 3, np.random.default_rng(1))
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_allclose(a.values[-1], a.values[0], atol=1e-12)
    assert np.max(np.abs(np.diff(a.values, axis=0))) < 0.5


def test_gauge_function_validation():
    grid = TimeGrid(1.0, 3)
    with pytest.raises(ValueError):
        GaugeFunction(grid, np.zeros((3, 2)))
    with pytest.raises(ValueError):
        GaugeFunction(grid, np.full((4, 2), np.nan))


def test_phase_difference_requires_distinct_levels():
    _, _, ledger = _spin_traj(1.0, 0.1, 10.0, 20)
    with pytest.raises(ValueError):
        phase_difference(ledger, 1, 1, 3)


def test_relative_gauge_recovers_applied_gauge(rng):
    _, traj, _ = _spin_traj(1.0, 0.1, 10.0, 500)
    alpha = GaugeFunction.from_callables(traj.grid, [linear_gauge(3.0), sinusoidal_gauge(2.0, 1.0)])
    rec = relative_gauge(traj, apply_gauge(traj, alpha).vectors)
    np.testing.assert_allclose(rec.increment(), alpha.increment(), atol=1e-12)
    with pytest.raises(ValueError):
        relative_gauge(traj, np.roll(traj.vectors, 1, axis=2))


@pytest.mark.parametrize("theta", [np.pi / 6, np.pi / 3, np.pi / 2, 2 * np.pi / 3])
def test_cyclic_phase_is_solid_angle(theta, rng):
    omega = 0.01
    params, traj, ledger = _spin_traj(theta, omega, 2 * np.pi / omega, 10_000)
    target = np.mod(-np.pi * (1 + np.cos(theta)), 2 * np.pi)

    def wrapped_distance(x):
        return abs(np.angle(np.exp(1j * (x - target))))

    assert wrapped_distance(constant_basis_phases(params, traj, ledger)[-1, 0]) < 1e-6
    for _ in range(3):
        alpha = GaugeFunction.random_fourier(traj.grid, 2, rng)
        g_gamma = geometric_phase(apply_gauge(traj, alpha))
        g_traj = apply_gauge(traj, alpha)
        assert wrapped_distance(constant_basis_phases(params, g_traj, build_ledger(g_traj))[-1, 0]) < 1e-6
        # single-valued gauge: the loop phase itself is unchanged
        assert abs(g_gamma[-1, 0] - geometric_phase(traj)[-1, 0]) < 1e-10
