import numpy as np
import pytest

from galilax import kernels
from galilax.configuration import MassSystem, PhaseState, build_jacobi_basis, center
from galilax.forces import Potential


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    mod = kernels.backends()[request.param]
    for name in ("reduced_wc_power", "z_rhs_power", "k_rhs_power"):
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


def kepler_state(e=0.0, a=1.0, masses=(1.0, 1.0), d=2, G=1.0):
    """Two bodies at pericentre of a Kepler orbit with eccentricity e, semi-major axis a.

    Returns (sys, state, period, energy) from the textbook two-body formulas.
    """
    m1, m2 = masses
    M = m1 + m2
    mu = G * M
    rp = a * (1.0 - e)
    vp = np.sqrt(mu * (1.0 + e) / rp)  # vis-viva at pericentre
    rel_q = np.zeros(d)
    rel_q[0] = rp
    rel_v = np.zeros(d)
    rel_v[1] = vp
    q = np.column_stack([-m2 / M * rel_q, m1 / M * rel_q])
    red = m1 * m2 / M
    p = np.column_stack([-red * rel_v, red * rel_v])
    sys = MassSystem(np.array(masses, dtype=float), d)
    period = 2 * np.pi * np.sqrt(a ** 3 / mu)
    energy = -G * m1 * m2 / (2 * a)
    return sys, PhaseState(q, p), period, energy


@pytest.fixture
def circular():
    sys, st, period, H = kepler_state(0.0)
    basis = build_jacobi_basis(sys)
    return center(sys, st, basis), basis, Potential.newtonian(), period, H


def random_system(rng, n, d, low=0.5, high=2.0):
    return MassSystem(rng.uniform(low, high, n), d)
