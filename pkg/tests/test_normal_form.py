import numpy as np
import pytest

from galilax.errors import InvalidInputError, ToleranceInconsistencyError
from galilax.normal_form import (InvariantSignature, antisymmetric_canonical, bounds_ok,
                                 invariants_from_gram, invariants_from_K, invariants_from_L,
                                 invariants_from_Z, normal_form_matrix, permuted_diagonal,
                                 symplectic_inverse, xu_decompose)
from galilax.reduction import angular_momentum, symplectic_form
from galilax.suites import plant_xu, random_orthogonal, random_symplectic


def _block_L(pairs, d):
    L = np.zeros((d, d))
    for j, s in enumerate(pairs):
        L[2 * j, 2 * j + 1], L[2 * j + 1, 2 * j] = s, -s
    return L


def test_signature_validation():
    s = InvariantSignature(2, 0, (1.0, 3.0), 2)
    assert s.omega_sq == (3.0, 1.0) and s.motion_rank == 4
    for bad in [(1, 0, ()), (1, 0, (-1.0,)), (-1, 0, ()), (2, 1, (1.0, 2.0), 2)]:
        with pytest.raises(InvalidInputError):
            InvariantSignature(*bad)


def test_invariants_from_L_examples():
    assert invariants_from_L(np.zeros((3, 3))) == (0, ())
    L = np.zeros((3, 3))
    L[0, 1], L[1, 0] = 5.0, -5.0
    p, om = invariants_from_L(L)
    assert p == 1 and om == pytest.approx((5.0,), rel=1e-14)
    p, om = invariants_from_L(_block_L([1.0, 3.0], 4))
    assert p == 2 and om == pytest.approx((3.0, 1.0), rel=1e-14)


def test_invariants_from_L_rejects_odd_rank():
    # a non-antisymmetric input with rank 1 triggers the consistency check
    with pytest.raises(ToleranceInconsistencyError):
        invariants_from_L(np.diag([1.0, 0.0, 0.0]))


def test_antisymmetric_canonical(rng):
    A = rng.normal(size=(5, 5))
    A = A - A.T
    U, s = antisymmetric_canonical(A)
    assert s.size == 2 and np.all(np.diff(s) <= 0)
    np.testing.assert_allclose(U.T @ U, np.eye(5), atol=1e-13)
    B = U.T @ A @ U
    for j in range(2):
        assert B[2 * j, 2 * j + 1] == pytest.approx(s[j], rel=1e-12)
    np.testing.assert_allclose(np.abs(B[:, 4]), 0, atol=1e-12)


def _spatial(rng, d=3, m=2):
    return rng.normal(size=(d, 2 * m))


def _planar(rng, m=2):
    Z = np.zeros((3, 2 * m))
    Z[:2] = rng.normal(size=(2, 2 * m))
    return random_orthogonal(rng, 3) @ Z


def _collinear(rng, m=2):
    return np.outer(rng.normal(size=3), rng.normal(size=2 * m))


@pytest.mark.parametrize("m", [2, 3, 4])
def test_classification_families(rng, m):
    for _ in range(10):
        Z = _spatial(rng, 3, m)
        s = invariants_from_Z(Z)
        assert s.pq == (1, 1)
        assert s.omega_sq[0] == pytest.approx(np.linalg.norm(angular_momentum(Z).L, 2), rel=1e-10)
        assert invariants_from_Z(_planar(rng, m)).pq == (1, 0)
        c = invariants_from_Z(_collinear(rng, m))
        assert c.pq == (0, 1) and c.omega_sq == ()
    assert invariants_from_Z(np.zeros((3, 2 * m))).pq == (0, 0)


def test_invariance_under_group_actions(rng):
    for _ in range(20):
        Z = rng.normal(size=(4, 6))
        s = invariants_from_Z(Z)
        Z2 = random_orthogonal(rng, 4) @ Z @ random_symplectic(rng, 3)
        assert invariants_from_Z(Z2).close_to(s, rtol=1e-8)


def test_p_zero_iff_L_zero(rng):
    for _ in range(10):
        Z = _collinear(rng)
        assert invariants_from_Z(Z).p == 0
        assert angular_momentum(Z).norm <= 1e-10 * np.linalg.norm(Z) ** 2


def test_rank_bounds_helper():
    assert bounds_ok(1, 1, 3, 2)
    assert not bounds_ok(2, 0, 3, 2)   # 2p > d
    assert not bounds_ok(1, 2, 3, 2)   # p + q > m


def test_normal_form_matrix():
    G = normal_form_matrix(InvariantSignature(1, 1, (2.5,)), 3).G
    np.testing.assert_array_equal(np.diag(G), [2.5, 0, 0, 2.5, 1, 0])
    assert np.count_nonzero(G - np.diag(np.diag(G))) == 0
    assert np.all(normal_form_matrix(InvariantSignature(0, 0), 2).G == 0)
    with pytest.raises(InvalidInputError):
        normal_form_matrix(InvariantSignature(1, 2, (1.0,)), 2)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_normal_form_round_trip(rng, m):
    for _ in range(10):
        p = int(rng.integers(0, m + 1))
        q = int(rng.integers(0, m - p + 1))
        sig = InvariantSignature(p, q, tuple(rng.uniform(0.3, 3.0, p)), m)
        G = normal_form_matrix(sig, m)
        assert invariants_from_K(G.K).close_to(sig, rtol=1e-10)
        assert invariants_from_gram(G).close_to(sig, rtol=1e-10)
        trK2 = np.trace(G.K @ G.K)
        assert trK2 == pytest.approx(-2 * sum(w ** 2 for w in sig.omega_sq), abs=1e-12)


def test_permuted_diagonal_pattern():
    D = permuted_diagonal(6, 4, 2, 1, [3.0, 2.0])
    expect = np.zeros((6, 8))
    expect[0, 0], expect[1, 1] = 3.0, 2.0
    expect[2, 2] = 1.0
    expect[3, 4], expect[4, 5] = 3.0, 2.0
    np.testing.assert_array_equal(D, expect)
    with pytest.raises(InvalidInputError):
        permuted_diagonal(3, 2, 2, 0, [1.0, 1.0])


def _check_xu(Z, f, tol=1e-8):
    J = symplectic_form(Z.shape[1] // 2)
    assert np.abs(f.Q.T @ f.Q - np.eye(Z.shape[0])).max() <= 1e-10
    assert np.linalg.norm(f.T.T @ J @ f.T - J) <= tol
    assert np.linalg.norm(Z - f.Q @ f.D @ symplectic_inverse(f.T)) <= tol * max(np.linalg.norm(Z), 1)
    d, m = Z.shape[0], Z.shape[1] // 2
    np.testing.assert_array_equal(f.D, permuted_diagonal(d, m, f.p, f.q, f.sigma))


def test_xu_on_normal_shape():
    D = permuted_diagonal(3, 2, 1, 1, [1.5])
    f = xu_decompose(D)
    _check_xu(D, f)
    assert (f.p, f.q) == (1, 1) and f.sigma == pytest.approx([1.5])


@pytest.mark.parametrize("d,n", [(d, n) for d in (1, 2, 3, 4) for n in (2, 3, 4, 5)])
def test_xu_plant_and_recover(rng, d, n):
    for _ in range(5):
        Z, p, q, sigma = plant_xu(rng, d, n)
        f = xu_decompose(Z)
        _check_xu(Z, f)
        assert (f.p, f.q) == (p, q)
        np.testing.assert_allclose(f.sigma, sigma, rtol=1e-8)
        assert f.omega_sq == pytest.approx([s * s for s in sigma], rel=1e-8)


def test_xu_random_rank3(rng):
    for _ in range(10):
        Z = rng.normal(size=(3, 6))
        f = xu_decompose(Z)
        _check_xu(Z, f)
        s = invariants_from_Z(Z)
        assert (f.p, f.q) == s.pq
        assert f.omega_sq == pytest.approx(s.omega_sq, rel=1e-8)


def test_xu_zero():
    f = xu_decompose(np.zeros((2, 4)))
    assert (f.p, f.q) == (0, 0)
    _check_xu(np.zeros((2, 4)), f)


def test_margin_reported(rng):
    s = invariants_from_Z(rng.normal(size=(3, 4)))
    assert s.margin > 3
    eps = np.zeros((3, 4))
    eps[0] = rng.normal(size=4)
    eps[1] = 1e-9 * rng.normal(size=4)  # singular value one decade above threshold
    assert invariants_from_Z(eps).margin < 2
