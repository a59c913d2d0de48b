"""Distance potentials, Wintner–Conley matrices and the Lax generator.

Sign conventions: ``U`` is the negative of the potential energy, the full
matrix satisfies ``grad U(q) = -q A`` and the reduced one
``grad U(X) = -X Atil(b)``; for an attractive force ``Atil`` is positive.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from galilax import kernels
from galilax.configuration import CenteredState, JacobiBasis, MassSystem
from galilax.errors import InvalidInputError, SingularityError
from galilax.reduction import symplectic_form


@dataclass(frozen=True)
class Potential:
    """U = W(r2) for a table r2 of squared mutual distances.

    ``homogeneous`` is W = coupling * sum m_a m_b (r2 + eps^2)^(-exponent/2);
    ``newtonian`` is the exponent-1 case with coupling G.  A ``custom``
    potential supplies ``func(r2, masses) -> (W, dW/dr2)`` where both tables
    are n x n and only the strict upper triangle of ``dW/dr2`` is read.
    """
    kind: str
    coupling: float = 1.0
    exponent: float = 1.0
    softening: float = 0.0
    func: Optional[Callable] = None
    singular: bool = True

    @classmethod
    def newtonian(cls, G=1.0, softening=0.0):
        return cls("newtonian", float(G), 1.0, float(softening), None, True)

    @classmethod
    def homogeneous(cls, exponent, coupling=1.0, softening=0.0):
        return cls("homogeneous", float(coupling), float(exponent), float(softening),
                   None, float(exponent) > 0)

    @classmethod
    def custom(cls, func, singular=False):
        return cls("custom", func=func, singular=bool(singular))

    @property
    def is_power_law(self) -> bool:
        """True when the compiled kernels apply (exponent 0 is constant, handled generically)."""
        return self.kind in ("newtonian", "homogeneous") and self.exponent != 0.0

    @property
    def eps2(self) -> float:
        return self.softening ** 2

    def evaluate(self, r2, masses):
        """Return (W, dW/dr2) on the full n x n table."""
        r2 = np.asarray(r2, dtype=float)
        if self.kind == "custom":
            W, dW = self.func(r2, np.asarray(masses))
            return float(W), np.asarray(dW, dtype=float)
        mm = np.outer(masses, masses) * self.coupling
        iu = np.triu_indices(len(masses), 1)
        s = r2 + self.eps2
        dW = np.zeros_like(r2)
        a = self.exponent
        if a == 0.0:
            return float(mm[iu].sum()), dW
        W = float(np.sum(mm[iu] * s[iu] ** (-0.5 * a)))
        dW[iu] = -0.5 * a * mm[iu] * s[iu] ** (-0.5 * a - 1.0)
        return W, dW


@dataclass(frozen=True)
class WintnerConley:
    matrix: np.ndarray
    gauge: str  # "full" or "reduced"


@dataclass(frozen=True)
class LaxGenerator:
    P: np.ndarray


def squared_distances(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    diff = q[:, :, None] - q[:, None, :]
    return np.einsum("kab,kab->ab", diff, diff)


def pair_deltas(basis: JacobiBasis) -> np.ndarray:
    """Row k: Tm[:, a] - Tm[:, b] for the k-th pair a < b (upper-triangle order)."""
    iu = np.triu_indices(basis.n, 1)
    return np.ascontiguousarray((basis.Tm[:, iu[0]] - basis.Tm[:, iu[1]]).T)


def squared_distances_from_b(b, basis: JacobiBasis) -> np.ndarray:
    """r_ab^2 as a linear function of the small Gram matrix b."""
    Tm = basis.Tm
    B = Tm.T @ np.asarray(b, dtype=float) @ Tm  # B_ab = q_a . q_b
    dg = np.diag(B)
    return dg[:, None] + dg[None, :] - 2.0 * B


def _check_collisions(r2, pot: Potential):
    if not pot.singular or pot.eps2 > 0:
        return
    n = r2.shape[0]
    iu = np.triu_indices(n, 1)
    vals = r2[iu]
    scale = vals.max()
    hit = np.flatnonzero(vals <= 1e-24 * scale) if scale > 0 else np.arange(vals.size)
    if hit.size:
        k = hit[0]
        raise SingularityError((iu[0][k], iu[1][k]))


def small_gram(Z) -> np.ndarray:
    Z = Z.Z if isinstance(Z, CenteredState) else np.asarray(Z, dtype=float)
    X = Z[:, : Z.shape[1] // 2]
    return X.T @ X


def _full_from_dW(dW) -> np.ndarray:
    n = dW.shape[0]
    iu = np.triu_indices(n, 1)
    A = np.zeros((n, n))
    A[iu] = 2.0 * dW[iu]
    A = A + A.T
    A[np.diag_indices(n)] = -A.sum(axis=1)
    return A


def wintner_conley_full(sys: MassSystem, q, pot: Potential) -> WintnerConley:
    """Full symmetric A with zero row sums and grad U(q) = -q A."""
    q = np.asarray(q, dtype=float)
    if q.shape != (sys.d, sys.n):
        raise InvalidInputError(f"q has shape {q.shape}, expected {(sys.d, sys.n)}")
    r2 = squared_distances(q)
    _check_collisions(r2, pot)
    _, dW = pot.evaluate(r2, sys.masses)
    return WintnerConley(_full_from_dW(dW), "full")


def wintner_conley_reduced(basis: JacobiBasis, b, pot: Potential) -> WintnerConley:
    """Reduced Atil(b), read off from the small Gram matrix alone."""
    b = np.asarray(b, dtype=float)
    masses = basis.masses
    if pot.is_power_law:
        iu = np.triu_indices(basis.n, 1)
        coef = pot.coupling * masses[iu[0]] * masses[iu[1]]
        At, bad = kernels.reduced_wc_power(b, pair_deltas(basis), coef, pot.exponent,
                                           pot.eps2, pot.singular)
        if bad >= 0:
            raise SingularityError((iu[0][bad], iu[1][bad]))
        return WintnerConley(np.asarray(At), "reduced")
    r2 = squared_distances_from_b(b, basis)
    _check_collisions(r2, pot)
    _, dW = pot.evaluate(r2, masses)
    A = _full_from_dW(dW)
    return WintnerConley(basis.Tm @ A @ basis.Tm.T, "reduced")


def assemble_P(Atil, Mtilde) -> LaxGenerator:
    """P = J S with S = diag(Mtilde^{-1}, Atil), i.e. P = (0 Atil; -Mtilde^{-1} 0)."""
    if isinstance(Atil, WintnerConley):
        Atil = Atil.matrix
    Atil = np.asarray(Atil, dtype=float)
    Mtilde = np.asarray(Mtilde, dtype=float)
    if Mtilde.ndim < 2:  # vector of reduced masses
        Mtilde = np.diag(np.atleast_1d(Mtilde))
    scale = max(1.0, np.abs(Atil).max()) if Atil.size else 1.0
    if np.abs(Atil - Atil.T).max(initial=0.0) > 1e-12 * scale:
        raise InvalidInputError("Wintner–Conley matrix is not symmetric")
    dm = np.diag(Mtilde)
    if np.any(dm <= 0) or np.abs(Mtilde - np.diag(dm)).max(initial=0.0) > 0:
        raise InvalidInputError("reduced mass matrix must be diagonal positive")
    m = Atil.shape[0]
    S = np.zeros((2 * m, 2 * m))
    S[:m, :m] = np.diag(1.0 / dm)
    S[m:, m:] = 0.5 * (Atil + Atil.T)
    return LaxGenerator(symplectic_form(m) @ S)


def potential_value(basis: JacobiBasis, b, pot: Potential) -> float:
    r2 = squared_distances_from_b(b, basis)
    _check_collisions(r2, pot)
    W, _ = pot.evaluate(r2, basis.masses)
    return W


def energy(Z, basis: JacobiBasis, pot: Potential) -> float:
    """H = 1/2 tr(Y Mtilde^{-1} Y^t) - W(b)."""
    Z = Z.Z if isinstance(Z, CenteredState) else np.asarray(Z, dtype=float)
    m = Z.shape[1] // 2
    X, Y = Z[:, :m], Z[:, m:]
    kin = 0.5 * float(np.sum(Y ** 2 / basis.reduced_masses))
    return kin - potential_value(basis, X.T @ X, pot)


def energy_from_gram(G, basis: JacobiBasis, pot: Potential) -> float:
    """Same Hamiltonian read off G: kinetic part is 1/2 tr(Mtilde^{-1} d)."""
    G = np.asarray(G, dtype=float)
    m = G.shape[0] // 2
    kin = 0.5 * float(np.sum(np.diag(G[m:, m:]) / basis.reduced_masses))
    return kin - potential_value(basis, G[:m, :m], pot)
