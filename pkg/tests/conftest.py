import numpy as np
import pytest

from adiaphase import _kernels
from adiaphase.fieldpath import PrecessingFieldParams, TimeGrid, precessing_path
from adiaphase.hamiltonian import SpinModelParams, spin_family

_kernels.warmup()

BACKENDS = sorted(_kernels.BACKENDS)


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per kernel backend."""
    monkeypatch.setattr(_kernels, "BACKEND", request.param)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def spin_setup(theta, omega, duration, steps, B=1.0, mu=1.0):
    params = PrecessingFieldParams(B, theta, omega)
    fam = spin_family(SpinModelParams(mu), precessing_path(params, duration))
    return params, fam, TimeGrid(duration, steps)


def constant_basis_phases(params, traj, ledger):
    """Pipeline geometric phases carried over to the closed-form basis with f = g = 0."""
    from adiaphase.analytic_spin import analytic_basis
    from adiaphase.fieldpath import precessing_field
    from adiaphase.phases import relative_gauge

    basis = analytic_basis(precessing_field(params, traj.times), 0.0, 0.0)
    alpha = relative_gauge(traj, basis)
    return ledger.geometric - alpha.increment()


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(line)
