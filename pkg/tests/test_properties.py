"""Randomized properties driven by hypothesis (seeds drawn by hypothesis, numerics by numpy)."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from galilax.ac_bridge import split_blocks
from galilax.configuration import MassSystem, PhaseState, build_jacobi_basis, center, reconstruct
from galilax.normal_form import bounds_ok, invariants_from_Z, xu_decompose
from galilax.reduction import angular_momentum, gram, spectral_traces, symplectic_form
from galilax.suites import random_orthogonal, random_symplectic

SETTINGS = settings(max_examples=60, deadline=None)
shapes = st.tuples(st.integers(1, 4), st.integers(2, 5), st.integers(0, 2 ** 32 - 1))


@SETTINGS
@given(shapes, st.integers(0, 3))
def test_rank_bounds_hold(shape, rank_cut):
    d, n, seed = shape
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(d, 2 * (n - 1)))
    # also exercise rank-deficient inputs
    if rank_cut and rank_cut < d:
        Z[d - rank_cut:] = rng.normal(size=(rank_cut, d - rank_cut)) @ Z[:d - rank_cut]
    s = invariants_from_Z(Z)
    assert bounds_ok(s.p, s.q, d, n - 1)


@SETTINGS
@given(shapes)
def test_traces_agree(shape):
    d, n, seed = shape
    Z = np.random.default_rng(seed).normal(size=(d, 2 * (n - 1)))
    trL, trK = spectral_traces(Z, 6)
    for k in range(6):
        assert abs(trL[k] - trK[k]) <= 1e-9 * max(1.0, abs(trK[k]))


@SETTINGS
@given(shapes)
def test_invariants_are_group_invariant(shape):
    d, n, seed = shape
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(d, 2 * (n - 1)))
    Z2 = random_orthogonal(rng, d) @ Z @ random_symplectic(rng, n - 1)
    assert invariants_from_Z(Z2).close_to(invariants_from_Z(Z), rtol=1e-7)
    L, L2 = angular_momentum(Z).norm, angular_momentum(Z2).norm
    assert abs(L - L2) <= 1e-9 * max(1.0, L)


@SETTINGS
@given(shapes)
def test_xu_reconstructs(shape):
    d, n, seed = shape
    Z = np.random.default_rng(seed).normal(size=(d, 2 * (n - 1)))
    f = xu_decompose(Z)
    J = symplectic_form(n - 1)
    assert np.linalg.norm(f.T.T @ J @ f.T - J) <= 1e-8
    s = invariants_from_Z(Z)
    assert (f.p, f.q) == s.pq


@SETTINGS
@given(shapes, st.booleans())
def test_centering_round_trip(shape, normalized):
    d, n, seed = shape
    rng = np.random.default_rng(seed)
    sys = MassSystem(rng.uniform(0.1, 10.0, n), d)
    B = build_jacobi_basis(sys, normalized)
    q, p = rng.normal(size=(d, n)), rng.normal(size=(d, n))
    back = reconstruct(sys, B, center(sys, PhaseState(q, p), B))
    # reconstruction returns the centered representative
    com = (q * sys.masses).sum(axis=1, keepdims=True) / sys.masses.sum()
    np.testing.assert_allclose(back.q, q - com, atol=1e-11)
    ptot = p.sum(axis=1, keepdims=True)
    np.testing.assert_allclose(back.p, p - ptot * sys.masses / sys.masses.sum(), atol=1e-11)


@SETTINGS
@given(st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_block_split_round_trip(m, seed):
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(3, 2 * m))
    G = gram(Z).G
    np.testing.assert_allclose(split_blocks(G).assemble(), G, atol=1e-13 * max(1.0, np.abs(G).max()))
