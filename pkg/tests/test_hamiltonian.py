import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adiaphase.fieldpath import FieldPath, PrecessingFieldParams, piecewise_linear_path, precessing_path
from adiaphase.hamiltonian import (
    SIGMA_X,
    SIGMA_Z,
    HamiltonianFamily,
    MatrixTermsBuilder,
    NotHermitianError,
    SpinModelParams,
    family_at,
    hermiticity_defect,
    matrix_family,
    random_hermitian,
    spin_family,
    spin_half_hamiltonian,
)

# zero or |x| in [1e-6, 50]; subnormal squares would defeat the eigenvalue oracle
component = st.one_of(st.just(0.0), st.floats(1e-6, 50), st.floats(-50, -1e-6))
fields = st.tuples(component, component, component)


def test_spin_z_field_is_diagonal_with_lower_level_first_in_ascending_order():
    h = spin_half_hamiltonian(SpinModelParams(1.0), [0, 0, 3.0])
    np.testing.assert_allclose(h, np.diag([1.5, -1.5]))
    np.testing.assert_allclose(np.linalg.eigvalsh(h), [-1.5, 1.5])


def test_spin_zero_field():
    np.testing.assert_array_equal(spin_half_hamiltonian(SpinModelParams(1.0), [0, 0, 0]), np.zeros((2, 2)))


def test_spin_x_field_is_pauli_x():
    h = spin_half_hamiltonian(SpinModelParams(2.0), [1, 0, 0])
    np.testing.assert_allclose(h, [[0, 1], [1, 0]])
    np.testing.assert_allclose(np.linalg.eigvalsh(h), [-1, 1])


@given(fields, st.floats(0.1, 5))
def test_spin_hamiltonian_traceless_with_eigenvalues_pm_half_mu_b(b, mu):
    h = spin_half_hamiltonian(SpinModelParams(mu), b)
    assert abs(np.trace(h)) < 1e-14
    assert hermiticity_defect(h) == 0.0
    mod = np.linalg.norm(b)
    evals = np.linalg.eigvalsh(h)
    expected = np.array([-mu * mod / 2, mu * mod / 2])
    np.testing.assert_allclose(evals, expected, rtol=1e-12, atol=1e-15 * mu * mod)


def test_spin_params_reject_zero_coupling():
    with pytest.raises(ValueError):
        SpinModelParams(0.0)


@pytest.mark.parametrize("t", [0.0, 1.3, 4.0])
def test_family_on_axis_is_static(t):
    fam = spin_family(SpinModelParams(1.0), precessing_path(PrecessingFieldParams(1.0, 0.0, 1.0), 5.0))
    np.testing.assert_allclose(family_at(fam, t), np.diag([0.5, -0.5]), atol=1e-16)


def test_family_linear_ramp():
    path = piecewise_linear_path([(0, (0,)), (1, (1,))])
    fam = matrix_family(MatrixTermsBuilder([(0, SIGMA_Z)]), path)
    np.testing.assert_allclose(family_at(fam, 0.25), np.diag([0.25, -0.25]))


def test_family_outside_duration_raises():
    path = piecewise_linear_path([(0, (0,)), (1, (1,))])
    fam = matrix_family(MatrixTermsBuilder([(0, SIGMA_Z)]), path)
    with pytest.raises(ValueError):
        family_at(fam, 1.5)


def test_random_hermitian_family_hermitian_at_random_times(rng):
    d, m = 4, 3
    builder = MatrixTermsBuilder([(c, random_hermitian(rng, d)) for c in range(m)], offset=random_hermitian(rng, d))
    path = FieldPath.from_function(lambda t: (np.sin(t), np.cos(2 * t), t), m, 10.0)
    fam = matrix_family(builder, path)
    hs = fam.sample(rng.uniform(0, 10, size=100))
    assert hs.shape == (100, d, d)
    assert hermiticity_defect(hs) < 1e-13


def test_non_hermitian_builder_detected():
    bad = np.array([[0, 1], [0, 0]], dtype=complex)
    path = piecewise_linear_path([(0, (0,)), (1, (1,))])
    fam = HamiltonianFamily(path, lambda f: f[:, 0, None, None] * bad, 2)
    with pytest.raises(NotHermitianError):
        fam.at(0.5)
    with pytest.raises(NotHermitianError):
        MatrixTermsBuilder([(0, bad)])


def test_matrix_builder_rejects_shape_mismatch_and_missing_components():
    with pytest.raises(ValueError):
        MatrixTermsBuilder([(0, SIGMA_Z), (1, np.eye(3))])
    path = piecewise_linear_path([(0, (0,)), (1, (1,))])
    with pytest.raises(ValueError):
        matrix_family(MatrixTermsBuilder([(0, SIGMA_Z), (1, SIGMA_X)]), path)


def test_spin_family_requires_three_components():
    with pytest.raises(ValueError):
        spin_family(SpinModelParams(1.0), piecewise_linear_path([(0, (0,)), (1, (1,))]))
