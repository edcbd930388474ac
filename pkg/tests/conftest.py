import numpy as np
import pytest

from fracdelay import FunctionSpec, ProblemSpec, Term

A_GEN = np.array([[0.0, 1.0], [-1.0, 0.0]])
OMEGA_GEN = np.array([[0.3, 0.1], [0.0, 0.2]])


def generic_problem(mu=2.0, nu=1.0, T=None):
    """Nonpermutable 2x2 system with polynomial history and sinusoidal forcing."""
    if T is None:
        T = 3.0 if mu == 2.0 else 6.0
    phi = FunctionSpec(2, (
        Term("monomial", (1.0, -0.5), 0.0),
        Term("monomial", (0.5, 0.3), 1.0),
        Term("monomial", (0.2, 0.0), 2.0),
    ), (-1.0, 0.0))
    f = FunctionSpec(2, (
        Term("sine", (1.0, 0.0), 2.0),
        Term("cosine", (0.0, 0.5), 1.0, 0.3),
    ), (0.0, T))
    return ProblemSpec(mu, nu, 1.0, A_GEN, OMEGA_GEN, phi, f, [1.0, -0.5], [0.5, 0.3], T)


def zero_problem(mu=1.5, nu=1.0, d=2, T=2.0, h=1.0):
    z = np.zeros((d, d))
    return ProblemSpec(mu, nu, h, z, z, FunctionSpec.zero(d, (-h, 0.0)), FunctionSpec.zero(d, (0.0, T)),
                       np.zeros(d), np.zeros(d), T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
