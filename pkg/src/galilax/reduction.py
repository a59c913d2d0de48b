"""The two momentum maps of the dual pair: Gram matrix and angular momentum.

The symplectic form ``J = (0 I; -I 0)`` is defined here once and imported by
every other module.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from galilax.configuration import CenteredState
from galilax.errors import InvalidInputError

RANK_TOL = 1e-10


@lru_cache(maxsize=64)
def _J(m: int) -> np.ndarray:
    J = np.zeros((2 * m, 2 * m))
    J[:m, m:] = np.eye(m)
    J[m:, :m] = -np.eye(m)
    J.setflags(write=False)
    return J


def symplectic_form(m: int) -> np.ndarray:
    """Standard ``2m x 2m`` symplectic matrix (read-only, cached)."""
    return _J(int(m))


def _as_Z(Z) -> np.ndarray:
    if isinstance(Z, CenteredState):
        return Z.Z
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if Z.shape[1] % 2:
        raise InvalidInputError(f"Z needs an even column count, got shape {Z.shape}")
    return Z


def numerical_rank(A, tol=RANK_TOL, scale=None) -> int:
    s = np.linalg.svd(np.atleast_2d(A), compute_uv=False)
    if scale is None:
        scale = s[0] if s.size else 0.0
    if scale == 0.0:
        return 0
    return int(np.sum(s > tol * scale))


@dataclass(frozen=True)
class GramElement:
    G: np.ndarray

    def __post_init__(self):
        G = np.asarray(self.G, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] % 2:
            raise InvalidInputError(f"G must be square of even size, got {G.shape}")
        if not np.allclose(G, G.T, rtol=0, atol=1e-12 * max(1.0, np.abs(G).max())):
            raise InvalidInputError("G is not symmetric")
        G = 0.5 * (G + G.T)
        G.setflags(write=False)
        object.__setattr__(self, "G", G)
        K = symplectic_form(G.shape[0] // 2) @ G
        K.setflags(write=False)
        object.__setattr__(self, "K", K)

    @property
    def m(self) -> int:
        return self.G.shape[0] // 2

    @classmethod
    def from_K(cls, K):
        K = np.asarray(K, dtype=float)
        return cls(gram_from_K(K))


def gram_from_K(K) -> np.ndarray:
    """Invert K = JG using J^{-1} = -J."""
    K = np.asarray(K, dtype=float)
    return -symplectic_form(K.shape[0] // 2) @ K


@dataclass(frozen=True)
class AngularMomentum:
    L: np.ndarray

    @property
    def norm(self) -> float:
        """Classical magnitude ||L||_F / sqrt(2); equals |X x Y| in three dimensions."""
        return float(np.linalg.norm(self.L) / np.sqrt(2.0))


def gram(Z) -> GramElement:
    Z = _as_Z(Z)
    return GramElement(Z.T @ Z)


def angular_momentum(Z) -> AngularMomentum:
    Z = _as_Z(Z)
    L = Z @ symplectic_form(Z.shape[1] // 2) @ Z.T
    return AngularMomentum(0.5 * (L - L.T))


def angular_momentum_wedges(Z) -> np.ndarray:
    """sum_i X_i Y_i^t - Y_i X_i^t, computed column by column."""
    Z = _as_Z(Z)
    m = Z.shape[1] // 2
    L = np.zeros((Z.shape[0], Z.shape[0]))
    for i in range(m):
        L += np.outer(Z[:, i], Z[:, m + i]) - np.outer(Z[:, m + i], Z[:, i])
    return L


def spectral_traces(Z, k_max: int):
    """Return (tr L^k, tr K^k) for k = 1..k_max."""
    Z = _as_Z(Z)
    L = angular_momentum(Z).L
    K = gram(Z).K
    trL, trK = [], []
    Lk = np.eye(L.shape[0])
    Kk = np.eye(K.shape[0])
    for _ in range(k_max):
        Lk = Lk @ L
        Kk = Kk @ K
        trL.append(float(np.trace(Lk)))
        trK.append(float(np.trace(Kk)))
    return trL, trK


@dataclass(frozen=True)
class ConeVerdict:
    status: str  # "inside", "boundary" or "outside"
    rank: int
    min_eigenvalue: float

    @property
    def inside(self) -> bool:
        return self.status == "inside"


def cone_membership(G, d: int, tol: float = RANK_TOL) -> ConeVerdict:
    """Classify G against the psd matrices of rank <= d.

    ``inside`` means rank exactly d, ``boundary`` a lower-rank stratum,
    ``outside`` a negative eigenvalue or rank above d.
    """
    if isinstance(G, GramElement):
        G = G.G
    G = np.asarray(G, dtype=float)
    ev = np.linalg.eigvalsh(0.5 * (G + G.T))
    scale = np.abs(ev).max() if ev.size else 0.0
    lo = float(ev.min()) if ev.size else 0.0
    if scale == 0.0:
        return ConeVerdict("boundary", 0, lo)
    rank = int(np.sum(ev > tol * scale))
    if lo < -tol * scale or rank > d:
        return ConeVerdict("outside", rank, lo)
    return ConeVerdict("inside" if rank == d else "boundary", rank, lo)
