"""Block form of the reduced equations and the mass-weighted ("hat") variant.

G is split as (b, c + r; c - r, d) with b, c, d symmetric and r antisymmetric.
Our Atil is the symmetric Wintner–Conley matrix of :mod:`galilax.forces`;
Albouy and Chenciner's matrix corresponds to -2 A M^{-1} in these conventions,
and :func:`albouy_chenciner_matrix` is the only place that conversion is made.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from galilax.configuration import JacobiBasis, MassSystem, PhaseState
from galilax.dynamics import lax_velocity
from galilax.errors import InvalidInputError
from galilax.forces import Potential, wintner_conley_full, wintner_conley_reduced
from galilax.reduction import _as_Z, symplectic_form


@dataclass(frozen=True)
class BlockGram:
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    r: np.ndarray

    def assemble(self) -> np.ndarray:
        return np.block([[self.b, self.c + self.r], [self.c - self.r, self.d]])


def split_blocks(G) -> BlockGram:
    G = np.asarray(G.G if hasattr(G, "G") else G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] % 2:
        raise InvalidInputError(f"G must be square of even size, got {G.shape}")
    m = G.shape[0] // 2
    off = G[:m, m:]
    return BlockGram(G[:m, :m].copy(), 0.5 * (off + off.T), G[m:, m:].copy(),
                     0.5 * (off - off.T))


def nrel_rhs(G, Atil, Mtilde) -> np.ndarray:
    """Gdot in block form, obtained from Xdot = Y Mtilde^{-1}, Ydot = -X Atil."""
    bl = split_blocks(G)
    Atil = np.asarray(getattr(Atil, "matrix", Atil), dtype=float)
    Mi = np.asarray(Mtilde, dtype=float)
    Mi = np.diag(1.0 / (np.diag(Mi) if Mi.ndim == 2 else Mi))
    cp, cm = bl.c + bl.r, bl.c - bl.r
    top_left = cp @ Mi + Mi @ cm
    top_right = Mi @ bl.d - bl.b @ Atil
    bottom_left = bl.d @ Mi - Atil @ bl.b
    bottom_right = -Atil @ cp - cm @ Atil
    return np.block([[top_left, top_right], [bottom_left, bottom_right]])


def lax_gram_rate(G, basis: JacobiBasis, pot: Potential) -> np.ndarray:
    """Gdot = -J [P, K] from the Lax form, K = J G."""
    G = np.asarray(G.G if hasattr(G, "G") else G, dtype=float)
    J = symplectic_form(G.shape[0] // 2)
    return -J @ lax_velocity(J @ G, basis, pot)


def r_block_rate(b, Atil) -> np.ndarray:
    """rdot for Mtilde = I: the antisymmetric part of (d - b Atil), i.e. [Atil, b] / 2."""
    b = np.asarray(b, dtype=float)
    Atil = np.asarray(Atil, dtype=float)
    return 0.5 * (Atil @ b - b @ Atil)


@dataclass(frozen=True)
class EquivalenceReport:
    residual: float          # max |Lax rate - block rate|
    top_left_residual: float  # max |top-left block - 2c| (identity reduced masses only)
    threshold: float = 1e-10

    @property
    def passed(self) -> bool:
        return self.residual <= self.threshold and self.top_left_residual <= self.threshold


def verify_equivalence(Z, basis: JacobiBasis, pot: Potential, threshold=1e-10) -> EquivalenceReport:
    if not basis.normalized:
        raise InvalidInputError("the equivalence check expects normalized Jacobi vectors")
    Z = _as_Z(Z)
    G = Z.T @ Z
    m = G.shape[0] // 2
    At = wintner_conley_reduced(basis, G[:m, :m], pot).matrix
    lax = lax_gram_rate(G, basis, pot)
    blk = nrel_rhs(G, At, basis.reduced_masses)
    scale = max(1.0, np.abs(lax).max())
    res = float(np.abs(lax - blk).max()) / scale
    tl = float(np.abs(blk[:m, :m] - 2.0 * split_blocks(G).c).max())
    return EquivalenceReport(res, tl, threshold)


# -- hat construction ------------------------------------------------------

@dataclass(frozen=True)
class HatState:
    q_hat: np.ndarray
    p_hat: np.ndarray
    A_hat: np.ndarray
    w: np.ndarray

    @property
    def Z_hat(self) -> np.ndarray:
        return np.hstack([self.q_hat, self.p_hat])

    @property
    def G_hat(self) -> np.ndarray:
        Z = self.Z_hat
        return Z.T @ Z

    @property
    def K_hat(self) -> np.ndarray:
        return symplectic_form(self.w.size) @ self.G_hat

    @property
    def P_hat(self) -> np.ndarray:
        n = self.w.size
        S = np.zeros((2 * n, 2 * n))
        S[:n, :n] = np.eye(n)
        S[n:, n:] = self.A_hat
        return symplectic_form(n) @ S

    @property
    def kernel_vector(self) -> np.ndarray:
        return np.concatenate([self.w, self.w])

    def lax_rate(self) -> np.ndarray:
        P, K = self.P_hat, self.K_hat
        return P @ K - K @ P


def hat_transform(sys: MassSystem, state: PhaseState, pot: Potential, tol=1e-10) -> HatState:
    """q_hat = q M^{1/2}, p_hat = p M^{-1/2}, A_hat = M^{-1/2} A M^{-1/2}."""
    state.check(sys)
    m = sys.masses
    com = np.abs(state.q @ m).max() / sys.total_mass
    ptot = np.abs(state.p.sum(axis=1)).max()
    qs = max(np.abs(state.q).max(), 1.0)
    ps = max(np.abs(state.p).max(), 1.0)
    if com > tol * qs or ptot > tol * ps:
        raise InvalidInputError("hat_transform needs a centered state (zero centre of mass and momentum)")
    sq = np.sqrt(m)
    A = wintner_conley_full(sys, state.q, pot).matrix
    return HatState(state.q * sq, state.p / sq, A / np.outer(sq, sq), sq)


def albouy_chenciner_matrix(sys: MassSystem, q, pot: Potential) -> np.ndarray:
    """Their (generally non-symmetric) Wintner–Conley matrix, -2 A M^{-1} here."""
    A = wintner_conley_full(sys, q, pot).matrix
    return -2.0 * A / sys.masses[None, :]
