"""Masses, Jacobi bases and the translation/boost reduction.

Positions and momenta are stored as ``d x n`` arrays whose columns are the
bodies.  The centered state ``Z = (X, Y)`` is a ``d x (2n-2)`` array holding
Jacobi position vectors followed by their conjugate momenta.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from galilax.errors import InvalidInputError


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MassSystem:
    masses: np.ndarray
    d: int = 3

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.masses, dtype=float))
        if m.ndim != 1 or m.size < 2:
            raise InvalidInputError("need at least two bodies")
        if not np.all(np.isfinite(m)) or np.any(m <= 0):
            raise InvalidInputError(f"masses must be strictly positive, got {m.tolist()}")
        if int(self.d) < 1:
            raise InvalidInputError(f"spatial dimension must be >= 1, got {self.d}")
        object.__setattr__(self, "masses", _frozen(m))
        object.__setattr__(self, "d", int(self.d))

    @property
    def n(self) -> int:
        return self.masses.size

    @property
    def m(self) -> int:
        """Half-size of the reduced algebra, n - 1."""
        return self.n - 1

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def M(self) -> np.ndarray:
        return np.diag(self.masses)


@dataclass(frozen=True)
class PhaseState:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.atleast_2d(np.asarray(self.q, dtype=float))
        p = np.atleast_2d(np.asarray(self.p, dtype=float))
        if q.shape != p.shape:
            raise InvalidInputError(f"positions {q.shape} and momenta {p.shape} differ in shape")
        object.__setattr__(self, "q", _frozen(q))
        object.__setattr__(self, "p", _frozen(p))

    def check(self, sys: MassSystem):
        if self.q.shape != (sys.d, sys.n):
            raise InvalidInputError(
                f"state has shape {self.q.shape}, expected {(sys.d, sys.n)}")


@dataclass(frozen=True)
class JacobiBasis:
    """Rows of ``T`` are the label-space vectors E_1..E_n.

    ``reduced_masses`` holds the first n-1 diagonal entries of T M T^t.
    """
    T: np.ndarray
    reduced_masses: np.ndarray
    normalized: bool
    masses: np.ndarray = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return self.T.shape[0]

    @property
    def m(self) -> int:
        return self.n - 1

    @property
    def Tm(self) -> np.ndarray:
        """The n-1 Jacobi rows (everything but the translation row)."""
        return self.T[:-1]

    @property
    def Mtilde(self) -> np.ndarray:
        return np.diag(self.reduced_masses)

    @property
    def Mtilde_inv(self) -> np.ndarray:
        return np.diag(1.0 / self.reduced_masses)


@dataclass(frozen=True)
class CenteredState:
    Z: np.ndarray

    def __post_init__(self):
        Z = np.atleast_2d(np.asarray(self.Z, dtype=float))
        if Z.shape[1] % 2 or Z.shape[1] < 2:
            raise InvalidInputError(f"Z needs an even, positive column count, got {Z.shape}")
        object.__setattr__(self, "Z", _frozen(Z))

    @property
    def d(self) -> int:
        return self.Z.shape[0]

    @property
    def m(self) -> int:
        return self.Z.shape[1] // 2

    @property
    def X(self) -> np.ndarray:
        return self.Z[:, : self.m]

    @property
    def Y(self) -> np.ndarray:
        return self.Z[:, self.m:]

    @classmethod
    def from_blocks(cls, X, Y):
        return cls(np.hstack([np.atleast_2d(X), np.atleast_2d(Y)]))


def mass_inner(u, v, masses) -> float:
    """Mass-metric inner product on label space."""
    return float(np.sum(np.asarray(masses) * np.asarray(u) * np.asarray(v)))


def build_jacobi_basis(sys: MassSystem, normalized: bool = True) -> JacobiBasis:
    """Sequential Jacobi basis.

    Row k (k < n-1) is chosen so that the k-th Jacobi vector is the centre of
    mass of bodies 0..k minus the position of body k+1.  The last row is
    (1, ..., 1), scaled to unit mass-norm when ``normalized``.
    """
    m = sys.masses
    n = sys.n
    cum = np.cumsum(m)
    T = np.zeros((n, n))
    for k in range(n - 1):
        T[k, : k + 1] = m[k + 1] / cum[k + 1]
        T[k, k + 1] = -cum[k] / cum[k + 1]
    T[n - 1] = 1.0
    mu = np.einsum("ia,a,ia->i", T, m, T)
    if normalized:
        T = T / np.sqrt(mu)[:, None]
        mu = np.ones(n)
    return JacobiBasis(T=_frozen(T), reduced_masses=_frozen(mu[:-1]),
                       normalized=bool(normalized), masses=sys.masses)


def remove_center(sys: MassSystem, state: PhaseState) -> PhaseState:
    """Boost to zero total momentum and translate the centre of mass to 0."""
    state.check(sys)
    m = sys.masses
    com = state.q @ m / sys.total_mass
    ptot = state.p.sum(axis=1)
    q = state.q - com[:, None]
    p = state.p - np.outer(ptot, m) / sys.total_mass
    return PhaseState(q, p)


def center(sys: MassSystem, state: PhaseState, basis: JacobiBasis) -> CenteredState:
    if basis.n != sys.n:
        raise InvalidInputError(f"basis is for {basis.n} bodies, system has {sys.n}")
    c = remove_center(sys, state)
    # q = Q T and T M T^t = diag(mu)  =>  Q = q M T^t diag(1/mu)
    X = (c.q * sys.masses) @ basis.Tm.T / basis.reduced_masses
    Y = c.p @ basis.Tm.T
    return CenteredState.from_blocks(X, Y)


def reconstruct(sys: MassSystem, basis: JacobiBasis, Z: CenteredState) -> PhaseState:
    if Z.m != sys.m or Z.d != sys.d:
        raise InvalidInputError(
            f"Z has shape {Z.Z.shape}, expected {(sys.d, 2 * sys.m)}")
    q = Z.X @ basis.Tm
    p = (Z.Y / basis.reduced_masses) @ basis.Tm * sys.masses
    return PhaseState(q, p)


def kinetic_energy(sys: MassSystem, state: PhaseState) -> float:
    return 0.5 * float(np.sum(state.p ** 2 / sys.masses))


def centered_kinetic_energy(Z: CenteredState, basis: JacobiBasis) -> float:
    return 0.5 * float(np.sum(Z.Y ** 2 / basis.reduced_masses))
