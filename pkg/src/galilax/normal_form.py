"""Numerical and spectral invariants, normal forms and the Xu factorization.

A centered state Z (d x 2m) is factored as Z = Q D T^{-1} with Q orthogonal,
T symplectic and D the permuted diagonal

    rows 0..p-1        Sigma in x-columns 0..p-1
    rows p..p+q-1      identity in x-columns p..p+q-1
    rows p+q..2p+q-1   Sigma in y-columns 0..p-1
    remaining rows     zero

with Sigma = diag(omega_j), so that D J D^t carries the blocks omega_j^2 of L
and D^t D is the normal form with nilpotent part 1/2 sum x_j^2.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur

from galilax.errors import (ConsistencyError, DecompositionError, InvalidInputError,
                            ToleranceInconsistencyError)
from galilax.reduction import (RANK_TOL, GramElement, _as_Z, angular_momentum,
                               gram_from_K, symplectic_form)


@dataclass(frozen=True)
class InvariantSignature:
    p: int
    q: int
    omega_sq: tuple = ()
    m: int = 0
    # distance of the nearest singular value to the rank threshold, in units of it
    margin: float = field(default=np.inf, compare=False)

    def __post_init__(self):
        om = tuple(sorted((float(w) for w in self.omega_sq), reverse=True))
        object.__setattr__(self, "omega_sq", om)
        if self.p < 0 or self.q < 0:
            raise InvalidInputError("p and q must be non-negative")
        if len(om) != self.p:
            raise InvalidInputError(f"need {self.p} spectral invariants, got {len(om)}")
        if any(w <= 0 for w in om):
            raise InvalidInputError("spectral invariants must be positive")
        if self.m and self.p + self.q > self.m:
            raise InvalidInputError(f"p + q = {self.p + self.q} exceeds m = {self.m}")

    @property
    def motion_rank(self) -> int:
        return 2 * self.p + self.q

    @property
    def pq(self):
        return (self.p, self.q)

    def close_to(self, other, rtol=1e-8) -> bool:
        return (self.pq == other.pq
                and np.allclose(self.omega_sq, other.omega_sq, rtol=rtol, atol=0))

    def __str__(self):
        om = ", ".join(f"{w:.12g}" for w in self.omega_sq)
        return f"(p,q) = ({self.p},{self.q}); omega^2 = [{om}]"


# -- canonical form of antisymmetric matrices ------------------------------

def antisymmetric_canonical(A, tol=RANK_TOL, scale=None):
    """Orthogonal U and s_1 >= ... >= s_k > 0 with U^t A U block diagonal.

    Columns (2j, 2j+1) of U span the j-th invariant plane and satisfy
    u_{2j}^t A u_{2j+1} = s_j; the remaining columns span the numerical kernel.
    The real Schur form of a normal matrix is block diagonal, so its 2x2 blocks
    are read off directly and reordered by decreasing s.
    """
    A = np.asarray(A, dtype=float)
    A = 0.5 * (A - A.T)
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0)), np.zeros(0)
    T, U = schur(A, output="real")
    if scale is None:
        scale = np.abs(np.linalg.svd(A, compute_uv=False)).max(initial=0.0)
    thresh = tol * scale
    planes, kernel = [], []
    i = 0
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > 0.0:
            s = 0.5 * (T[i, i + 1] - T[i + 1, i])
            cols = (i, i + 1) if s > 0 else (i + 1, i)
            if abs(s) > thresh:
                planes.append((abs(s), cols))
            else:
                kernel.extend(cols)
            i += 2
        else:
            kernel.append(i)
            i += 1
    planes.sort(key=lambda t: -t[0])
    order = [c for _, cols in planes for c in cols] + kernel
    return U[:, order], np.array([s for s, _ in planes])


# -- invariants ------------------------------------------------------------

def invariants_from_L(L, tol=RANK_TOL, scale=None):
    """(p, omega^2) from an antisymmetric L.

    ``scale`` is the reference magnitude for the rank threshold; it defaults to
    the largest singular value of L itself.
    """
    L = np.asarray(L.L if hasattr(L, "L") else L, dtype=float)
    s = np.linalg.svd(L, compute_uv=False)
    if scale is None:
        scale = s.max(initial=0.0)
    if scale == 0.0:
        return 0, ()
    keep = s > tol * scale
    r = int(keep.sum())
    if r % 2:
        raise ToleranceInconsistencyError(
            f"antisymmetric L has odd numerical rank {r} at tol {tol:g}")
    return r // 2, tuple(float(v) for v in s[:r:2])


def _margin(values, thresh):
    if thresh <= 0 or not len(values):
        return np.inf
    return float(np.min(np.abs(np.log10(np.maximum(values, 1e-300) / thresh))))


def bounds_ok(p, q, d, m) -> bool:
    return (p + q <= m and 2 * p <= d and q <= min(d - 2 * p, m - p)
            and 2 * p + q <= min(d, 2 * m))


def invariants_from_Z(Z, tol=RANK_TOL) -> InvariantSignature:
    Z = _as_Z(Z)
    d, m = Z.shape[0], Z.shape[1] // 2
    sz = np.linalg.svd(Z, compute_uv=False)
    smax = sz.max(initial=0.0)
    if smax == 0.0:
        return InvariantSignature(0, 0, (), m)
    rank = int(np.sum(sz > tol * smax))
    L = angular_momentum(Z).L
    sl = np.linalg.svd(L, compute_uv=False)
    p, om = invariants_from_L(L, tol, scale=smax ** 2)
    q = rank - 2 * p
    if q < 0 or not bounds_ok(p, q, d, m):
        raise ToleranceInconsistencyError(
            f"rank(Z) = {rank} and rank(L) = {2 * p} violate the rank bounds for d={d}, m={m}")
    margin = min(_margin(sz, tol * smax), _margin(sl[sl > 0], tol * smax ** 2))
    return InvariantSignature(p, q, om, m, margin=margin)


def factor_gram(G, tol=RANK_TOL):
    """Some Z with Z^t Z = G for a positive semidefinite G (rows = rank)."""
    G = np.asarray(G, dtype=float)
    ev, V = np.linalg.eigh(0.5 * (G + G.T))
    scale = np.abs(ev).max(initial=0.0)
    if ev.size and ev.min() < -tol * max(scale, 1e-300) and scale > 0:
        raise ConsistencyError(f"G has a negative eigenvalue {ev.min():.3e}")
    keep = ev > tol * scale if scale > 0 else np.zeros(ev.size, bool)
    return (V[:, keep] * np.sqrt(ev[keep])).T


def invariants_from_gram(G, tol=RANK_TOL) -> InvariantSignature:
    if isinstance(G, GramElement):
        G = G.G
    Zf = factor_gram(G, tol)
    m = np.asarray(G).shape[0] // 2
    if Zf.shape[0] == 0:
        return InvariantSignature(0, 0, (), m)
    sig = invariants_from_Z(Zf, tol)
    return sig


def invariants_from_K(K, tol=RANK_TOL) -> InvariantSignature:
    """Invariants of K = J G for G in the psd cone, via any factor G = Z^t Z."""
    if isinstance(K, GramElement):
        K = K.K
    return invariants_from_gram(gram_from_K(K), tol)


def normal_form_matrix(sig: InvariantSignature, m: int) -> GramElement:
    """Hessian of 1/2 sum omega_j^2 (x_j^2 + y_j^2) + 1/2 sum y_j^2."""
    if sig.p + sig.q > m:
        raise InvalidInputError(f"p + q = {sig.p + sig.q} exceeds m = {m}")
    g = np.zeros(2 * m)
    for j, w in enumerate(sig.omega_sq):
        g[j] = g[m + j] = w
    g[m + sig.p: m + sig.p + sig.q] = 1.0
    return GramElement(np.diag(g))


# -- Xu factorization ------------------------------------------------------

@dataclass(frozen=True)
class XuFactorization:
    Q: np.ndarray
    D: np.ndarray
    T: np.ndarray
    p: int
    q: int
    sigma: np.ndarray  # omega_j, descending

    @property
    def omega_sq(self):
        return tuple(float(s) ** 2 for s in self.sigma)

    def reconstruct(self) -> np.ndarray:
        return self.Q @ self.D @ symplectic_inverse(self.T)


def symplectic_inverse(T) -> np.ndarray:
    """T^{-1} = -J T^t J for T in Sp(2m)."""
    J = symplectic_form(T.shape[0] // 2)
    return -J @ T.T @ J


def permuted_diagonal(d, m, p, q, sigma) -> np.ndarray:
    if 2 * p + q > d or p + q > m:
        raise InvalidInputError(f"(p,q) = ({p},{q}) does not fit d={d}, m={m}")
    D = np.zeros((d, 2 * m))
    for j in range(p):
        D[j, j] = sigma[j]
        D[p + q + j, m + j] = sigma[j]
    for k in range(q):
        D[p + k, p + k] = 1.0
    return D


def _omega(a, b, J):
    return a @ J @ b


def _complete_symplectic(xi, eta, m, J):
    """Extend rows xi (isotropic, first len(eta) paired with eta) to a symplectic basis.

    Returns S whose first m rows are the x-type vectors and last m the y-type,
    with S J S^t = J.
    """
    p, k = len(eta), len(xi)
    xi = [np.array(v) for v in xi]
    eta = [np.array(v) for v in eta]

    def project_out(v, pairs):
        # remove the component in the span of symplectic pairs (e, f), omega(e, f) = 1
        for e, f in pairs:
            v = v - _omega(v, f, J) * e + _omega(v, e, J) * f
        return v

    pairs = list(zip(xi[:p], eta))
    free = np.array(xi[p:]).reshape(-1, 2 * m)
    if len(free):
        # dual vectors: Xi J H^t = I, then symplectically orthogonalize against V1 and among themselves
        H = np.linalg.solve(free @ free.T, free @ J)
        H = np.array([project_out(h, pairs) for h in H])
        Om = H @ J @ H.T
        H = H - 0.5 * Om @ free
        for e, f in zip(free, H):
            pairs.append((e, f))
    # symplectic complement of everything found so far
    rest = m - k
    if rest:
        basis = np.array([project_out(e, pairs) for e in np.eye(2 * m)])
        u, s, vt = np.linalg.svd(basis)
        B = vt[: 2 * rest]
        Ub, sb = antisymmetric_canonical(B @ J @ B.T)
        if sb.size != rest:
            raise DecompositionError("complement is not symplectic")
        W = Ub.T @ B
        for j in range(rest):
            pairs.append((W[2 * j] / np.sqrt(sb[j]), W[2 * j + 1] / np.sqrt(sb[j])))
    # row order: semisimple, nilpotent, free pairs
    S = np.zeros((2 * m, 2 * m))
    for j, (e, f) in enumerate(pairs):
        S[j] = e
        S[m + j] = f
    return S


def xu_decompose(Z, tol=RANK_TOL, residual_tol=1e-8) -> XuFactorization:
    """Constructive Z = Q D T^{-1}; see the module docstring for D."""
    Z = _as_Z(Z)
    d, m = Z.shape[0], Z.shape[1] // 2
    J = symplectic_form(m)
    sz = np.linalg.svd(Z, compute_uv=False)
    smax = sz.max(initial=0.0)
    if smax == 0.0:
        return XuFactorization(np.eye(d), np.zeros_like(Z), np.eye(2 * m), 0, 0, np.zeros(0))
    L = Z @ J @ Z.T
    U, s = antisymmetric_canonical(L, tol, scale=smax ** 2)
    p = s.size
    sigma = np.sqrt(s)
    u_cols = U[:, 0:2 * p:2]
    v_cols = U[:, 1:2 * p:2]
    kern = U[:, 2 * p:]
    # rotate the kernel of L so its rows of Q^t Z are independent first, zero after
    Wk = kern.T @ Z
    if Wk.shape[0]:
        uk, sk, _ = np.linalg.svd(Wk)
        kern = kern @ uk
        q = int(np.sum(sk > tol * smax))
    else:
        q = 0
    if not bounds_ok(p, q, d, m):
        raise DecompositionError(f"(p,q) = ({p},{q}) violates the rank bounds")
    Q = np.hstack([u_cols, kern[:, :q], v_cols, kern[:, q:]])
    W = Q.T @ Z
    xi = [W[j] / sigma[j] for j in range(p)] + [W[p + k] for k in range(q)]
    eta = [W[p + q + j] / sigma[j] for j in range(p)]
    S = _complete_symplectic(xi, eta, m, J)
    T = symplectic_inverse(S)
    D = permuted_diagonal(d, m, p, q, sigma)
    res = np.linalg.norm(Z - Q @ D @ S) / smax
    sym = np.linalg.norm(T.T @ J @ T - J)
    if res > residual_tol or sym > residual_tol:
        raise DecompositionError(
            f"Xu factorization residual {res:.3e}, symplectic defect {sym:.3e}", residual=res)
    return XuFactorization(Q, D, T, p, q, sigma)
