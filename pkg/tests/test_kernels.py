import os
import subprocess
import sys

import numpy as np
import pytest

from galilax import _pykernels, kernels
from galilax.configuration import MassSystem, build_jacobi_basis
from galilax.forces import Potential, _full_from_dW, pair_deltas, squared_distances_from_b
from galilax.reduction import gram

BACKENDS = kernels.backends()
needs_cython = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")


def _setup(rng, n, d):
    masses = rng.uniform(0.5, 2.0, n)
    B = build_jacobi_basis(MassSystem(masses, d))
    iu = np.triu_indices(n, 1)
    coef = masses[iu[0]] * masses[iu[1]]
    Z = rng.normal(size=(d, 2 * (n - 1)))
    minv = 1.0 / B.reduced_masses
    return B, pair_deltas(B), np.ascontiguousarray(coef), Z, minv


@needs_cython
@pytest.mark.parametrize("n,d", [(2, 1), (3, 2), (4, 3), (6, 3)])
@pytest.mark.parametrize("alpha,eps2", [(1.0, 0.0), (2.0, 0.0), (0.5, 0.01)])
def test_backend_parity(rng, n, d, alpha, eps2):
    c = BACKENDS["cython"]
    B, deltas, coef, Z, minv = _setup(rng, n, d)
    m = n - 1
    b = Z[:, :m].T @ Z[:, :m]
    args = (deltas, coef, alpha, eps2)
    Ap, bp = _pykernels.reduced_wc_power(b, *args, True)
    Ac, bc = c.reduced_wc_power(np.ascontiguousarray(b), *args, True)
    assert bp == bc == -1
    np.testing.assert_allclose(Ac, Ap, rtol=1e-12, atol=1e-14 * np.abs(Ap).max())
    zp, _ = _pykernels.z_rhs_power(Z, *args, minv, True)
    zc, _ = c.z_rhs_power(np.ascontiguousarray(Z), *args, minv, True)
    np.testing.assert_allclose(zc, zp, rtol=1e-12, atol=1e-13 * np.abs(zp).max())
    K = gram(Z).K
    kp, _ = _pykernels.k_rhs_power(K, *args, minv, True)
    kc, _ = c.k_rhs_power(np.ascontiguousarray(K), *args, minv, True)
    np.testing.assert_allclose(kc, kp, rtol=1e-12, atol=1e-13 * np.abs(kp).max())


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_reduced_matches_full_sum(rng, name):
    """Kernel output against the pairwise full-space matrix congruenced into Jacobi space."""
    mod = BACKENDS[name]
    B, deltas, coef, Z, _ = _setup(rng, 5, 3)
    b = np.ascontiguousarray(Z[:, :4].T @ Z[:, :4])
    At, _ = mod.reduced_wc_power(b, deltas, coef, 1.0, 0.0, True)
    r2 = squared_distances_from_b(b, B)
    _, dW = Potential.newtonian().evaluate(r2, B.masses)
    expect = B.Tm @ _full_from_dW(dW) @ B.Tm.T
    np.testing.assert_allclose(At, expect, rtol=1e-11, atol=1e-13)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_collision_index_reported(name):
    mod = BACKENDS[name]
    B = build_jacobi_basis(MassSystem(np.ones(3), 2))
    iu = np.triu_indices(3, 1)
    # bodies 0 and 1 coincide: first Jacobi vector zero
    Z = np.array([[0.0, 1.0, 0.1, 0.0], [0.0, 0.5, 0.0, 0.2]])
    b = np.ascontiguousarray(Z[:, :2].T @ Z[:, :2])
    coef = np.ones(3)
    _, bad = mod.reduced_wc_power(b, pair_deltas(B), coef, 1.0, 0.0, True)
    assert (iu[0][bad], iu[1][bad]) == (0, 1)
    # softening suppresses the check
    _, bad = mod.reduced_wc_power(b, pair_deltas(B), coef, 1.0, 1e-4, True)
    assert bad == -1


def test_pure_python_env_switch():
    code = "import galilax.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, GALILAX_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "python"
    assert kernels.BACKEND in BACKENDS
