"""Integration of the centered equations Zdot = -Z P and of the Lax pair Kdot = [P, K].

Both right-hand sides rebuild ``b``, ``Atil(b)`` and ``P`` at every stage.  For
power-law potentials they run through :mod:`galilax.kernels`; any other
potential goes through the generic Python path in :mod:`galilax.forces`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from galilax import kernels
from galilax.configuration import CenteredState, JacobiBasis
from galilax.errors import (ConsistencyError, IntegrationError, InvalidInputError,
                            SingularityError)
from galilax.forces import (Potential, assemble_P, energy, energy_from_gram,
                            pair_deltas, wintner_conley_reduced)
from galilax.reduction import GramElement, angular_momentum, symplectic_form

log = logging.getLogger(__name__)

METHODS = ("rk4_fixed", "rk45_adaptive")
MODES = ("Z", "K", "both")
PSD_TOL = 1e-8


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45_adaptive"
    step: float = 1e-3
    tol: float = 1e-10
    max_steps: int = 10_000_000
    initial_step: Optional[float] = None

    def __post_init__(self):
        aliases = {"rk4": "rk4_fixed", "rk45": "rk45_adaptive"}
        object.__setattr__(self, "method", aliases.get(self.method, self.method))
        if self.method not in METHODS:
            raise InvalidInputError(f"unknown integration method {self.method!r}")
        if not (self.step > 0 and self.tol > 0 and self.max_steps > 0):
            raise InvalidInputError("step, tol and max_steps must be positive")


class StepResult(NamedTuple):
    state: np.ndarray
    h: float          # step actually taken
    h_next: float     # suggested next step (equal to h for fixed-step RK4)


@dataclass
class Trajectory:
    times: np.ndarray
    Z: Optional[np.ndarray] = None   # (N, d, 2m) samples when integrated
    K: Optional[np.ndarray] = None   # (N, 2m, 2m) samples when integrated
    diagnostics: dict = field(default_factory=dict)
    mode: str = "Z"

    @property
    def states(self):
        if self.mode == "K":
            return [GramElement.from_K(K) for K in self.K]
        return [CenteredState(Z) for Z in self.Z]

    def __len__(self):
        return len(self.times)


# -- right-hand sides ------------------------------------------------------

class _Field:
    """Vector fields of one (basis, potential) pair on flattened states."""

    def __init__(self, basis: JacobiBasis, pot: Potential):
        self.basis = basis
        self.pot = pot
        self.m = basis.m
        self.minv = np.ascontiguousarray(1.0 / basis.reduced_masses)
        iu = np.triu_indices(basis.n, 1)
        self.pairs = iu
        self.deltas = pair_deltas(basis)
        self.coef = np.ascontiguousarray(pot.coupling * basis.masses[iu[0]] * basis.masses[iu[1]])
        self.J = symplectic_form(self.m)

    def _raise(self, bad):
        raise SingularityError((self.pairs[0][bad], self.pairs[1][bad]))

    def z(self, Z):
        if self.pot.is_power_law:
            out, bad = kernels.z_rhs_power(Z, self.deltas, self.coef, self.pot.exponent,
                                           self.pot.eps2, self.minv, self.pot.singular)
            if bad >= 0:
                self._raise(bad)
            return out
        X = Z[:, :self.m]
        P = self.P_of_b(X.T @ X)
        return -Z @ P

    def k(self, K):
        if self.pot.is_power_law:
            out, bad = kernels.k_rhs_power(K, self.deltas, self.coef, self.pot.exponent,
                                           self.pot.eps2, self.minv, self.pot.singular)
            if bad >= 0:
                self._raise(bad)
            return out
        m = self.m
        b = -K[m:, :m]
        P = self.P_of_b(0.5 * (b + b.T))
        return P @ K - K @ P

    def P_of_b(self, b):
        At = wintner_conley_reduced(self.basis, b, self.pot).matrix
        return assemble_P(At, self.basis.reduced_masses).P


def lax_generator(Z, basis: JacobiBasis, pot: Potential) -> np.ndarray:
    """P(b) at the state Z."""
    Z = Z.Z if isinstance(Z, CenteredState) else np.asarray(Z, dtype=float)
    X = Z[:, : Z.shape[1] // 2]
    return _Field(basis, pot).P_of_b(X.T @ X)


def z_velocity(Z, basis, pot) -> np.ndarray:
    Z = Z.Z if isinstance(Z, CenteredState) else np.asarray(Z, dtype=float)
    return _Field(basis, pot).z(Z)


def lax_velocity(K, basis, pot) -> np.ndarray:
    """[P, K] with P rebuilt from the b block of G = -J K."""
    return _Field(basis, pot).k(np.asarray(K, dtype=float))


# -- Runge–Kutta cores -----------------------------------------------------

def _rk4(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# Dormand–Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])
_E = _B5 - _B4


def _dp45(f, y, h, k1):
    ks = [k1]
    for i in range(1, 7):
        yi = y.copy()
        for j, a in enumerate(_A[i]):
            if a:
                yi += (h * a) * ks[j]
        ks.append(f(yi))
    y5 = y.copy()
    for j in range(6):
        if _B5[j]:
            y5 += (h * _B5[j]) * ks[j]
    err = np.zeros_like(y)
    for j in range(7):
        if _E[j]:
            err += (h * _E[j]) * ks[j]
    return y5, err, ks[6]


class _Stepper:
    """Drives one flattened ODE with sample-time landing."""

    def __init__(self, f, cfg: IntegratorConfig, check=None):
        self.f = f
        self.cfg = cfg
        self.check = check
        self.h = cfg.initial_step or (cfg.step if cfg.method == "rk4_fixed" else None)
        self.k1 = None
        self.nsteps = 0

    def _initial_h(self, y, t_span):
        f0 = self.f(y)
        self.k1 = f0
        scale = self.cfg.tol + self.cfg.tol * np.abs(y)
        d0 = np.max(np.abs(y) / scale)
        d1 = np.max(np.abs(f0) / scale)
        h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        return min(h, abs(t_span))

    def advance(self, y, t, t_target):
        cfg = self.cfg
        while t < t_target:
            if self.nsteps >= cfg.max_steps:
                raise IntegrationError("maximum number of steps exceeded", time=t)
            remaining = t_target - t
            try:
                if cfg.method == "rk4_fixed":
                    h = min(self.h, remaining)
                    if remaining - h < 1e-12 * max(1.0, abs(t_target)):
                        h = remaining
                    y = _rk4(self.f, y, h)
                else:
                    y, h = self._adaptive(y, t, remaining)
            except SingularityError as exc:
                raise SingularityError(exc.pair, time=t) from None
            t = t_target if t + h >= t_target or t_target - (t + h) < 1e-14 * max(1.0, abs(t)) else t + h
            self.nsteps += 1
            if self.check is not None:
                self.check(y, t)
        return y, t

    def _adaptive(self, y, t, remaining):
        tol = self.cfg.tol
        if self.h is None:
            self.h = self._initial_h(y, remaining)
        if self.k1 is None:
            self.k1 = self.f(y)
        while True:
            h = min(self.h, remaining)
            if h < 1e-14 * max(1.0, abs(t)):
                raise IntegrationError("step size underflow", time=t)
            y_new, err, k_last = _dp45(self.f, y, h, self.k1)
            scale = tol + tol * np.maximum(np.abs(y), np.abs(y_new))
            en = float(np.max(np.abs(err) / scale)) if err.size else 0.0
            if en <= 1.0:
                fac = 5.0 if en == 0.0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
                # a step clipped to land on a sample time does not shrink the suggestion
                if h == self.h:
                    self.h = h * fac
                self.k1 = k_last
                return y_new, h
            self.h = h * max(0.2, 0.9 * en ** -0.2)


# -- public stepping API ---------------------------------------------------

def _as_Z(Z):
    return Z.Z if isinstance(Z, CenteredState) else np.asarray(Z, dtype=float)


def _psd_check(m):
    def check(K, t):
        b = -K[m:, :m]
        b = 0.5 * (b + b.T)
        ev = np.linalg.eigvalsh(b)
        tr = max(float(np.trace(b)), 0.0)
        if ev[0] < -PSD_TOL * tr:
            raise ConsistencyError(
                f"recovered b is not positive semidefinite at t = {t:.12g} "
                f"(min eigenvalue {ev[0]:.3e}, trace {tr:.3e})")
    return check


def step_Z(Z, basis: JacobiBasis, pot: Potential, cfg: IntegratorConfig, h=None) -> StepResult:
    """One RK4 step of size h (default cfg.step) or one accepted adaptive step."""
    Z = _as_Z(Z)
    fld = _Field(basis, pot)
    shape = Z.shape
    f = lambda y: fld.z(y.reshape(shape)).ravel()  # noqa: E731
    st = _Stepper(f, cfg)
    if h is not None:
        st.h = h
    y0 = Z.ravel().copy()
    try:
        if cfg.method == "rk4_fixed":
            y = _rk4(f, y0, st.h)
            return StepResult(y.reshape(shape), st.h, st.h)
        y, taken = st._adaptive(y0, 0.0, np.inf)
    except SingularityError as exc:
        raise SingularityError(exc.pair, time=0.0) from None
    return StepResult(y.reshape(shape), taken, st.h)


def step_K(K, cfg: IntegratorConfig, pot: Potential, basis: JacobiBasis, h=None) -> StepResult:
    if isinstance(K, GramElement):
        K = K.K
    K = np.asarray(K, dtype=float)
    m = K.shape[0] // 2
    fld = _Field(basis, pot)
    _psd_check(m)(K, 0.0)
    f = lambda y: fld.k(y.reshape(K.shape)).ravel()  # noqa: E731
    st = _Stepper(f, cfg)
    if h is not None:
        st.h = h
    y0 = K.ravel().copy()
    try:
        if cfg.method == "rk4_fixed":
            y = _rk4(f, y0, st.h)
            return StepResult(y.reshape(K.shape), st.h, st.h)
        y, taken = st._adaptive(y0, 0.0, np.inf)
    except SingularityError as exc:
        raise SingularityError(exc.pair, time=0.0) from None
    return StepResult(y.reshape(K.shape), taken, st.h)


def casimirs(K, m_max: int):
    """tr K^{2l} for l = 1..m_max."""
    if isinstance(K, GramElement):
        K = K.K
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] % 2:
        raise InvalidInputError(f"K must be square of even size, got {K.shape}")
    if not 0 <= m_max <= K.shape[0] // 2:
        raise InvalidInputError(f"m_max must lie in [0, {K.shape[0] // 2}]")
    K2 = K @ K
    out, P = [], np.eye(K.shape[0])
    for _ in range(m_max):
        P = P @ K2
        out.append(float(np.trace(P)))
    return out


def dynamical_time(Z, basis: JacobiBasis, pot: Potential) -> float:
    """size^{3/2} / sqrt(coupling * total mass); reporting only."""
    from galilax.forces import squared_distances_from_b, small_gram
    r2 = squared_distances_from_b(small_gram(_as_Z(Z)), basis)
    size = float(np.sqrt(r2.max()))
    return size ** 1.5 / np.sqrt(pot.coupling * basis.masses.sum())


# -- orchestration ---------------------------------------------------------

def sample_times(t_end: float, samples: int) -> np.ndarray:
    if t_end < 0:
        raise InvalidInputError("t_end must be non-negative")
    if t_end == 0 or samples <= 1:
        return np.array([0.0]) if t_end == 0 else np.array([0.0, float(t_end)])
    return np.linspace(0.0, float(t_end), int(samples))


def _diagnostics_Z(Z, basis, pot, m):
    K = symplectic_form(m) @ (Z.T @ Z)
    return energy(Z, basis, pot), angular_momentum(Z).norm, casimirs(K, m), K


def _diagnostics_K(K, basis, pot, m):
    G = -symplectic_form(m) @ K
    cas = casimirs(K, m)
    Lnorm = float(np.sqrt(max(-cas[0], 0.0) / 2.0)) if m else 0.0
    return energy_from_gram(G, basis, pot), Lnorm, cas


def simulate(initial, t_end: float, cfg: IntegratorConfig, mode: str = "Z",
             basis: JacobiBasis = None, pot: Potential = None, samples: int = 101) -> Trajectory:
    """Integrate from ``initial`` and record samples with diagnostics.

    ``initial`` is a CenteredState (any mode) or a GramElement (mode "K").
    In mode "both" Z and K are advanced as one block system with shared steps
    and the residual ||K - J G(Z)||_F is recorded.
    """
    if mode not in MODES:
        raise InvalidInputError(f"mode must be one of {MODES}")
    if basis is None or pot is None:
        raise InvalidInputError("simulate needs a Jacobi basis and a potential")
    if isinstance(initial, GramElement):
        if mode != "K":
            raise InvalidInputError("a Gram element can only seed mode 'K'")
        Z0, K0 = None, np.array(initial.K)
    else:
        Z0 = np.array(_as_Z(initial))
        K0 = symplectic_form(Z0.shape[1] // 2) @ (Z0.T @ Z0)
    m = basis.m
    if K0.shape[0] != 2 * m:
        raise InvalidInputError(f"state size {K0.shape[0]} does not match {basis.n} bodies")
    times = sample_times(t_end, samples)
    fld = _Field(basis, pot)

    if mode == "Z":
        shape = Z0.shape
        f = lambda y: fld.z(y.reshape(shape)).ravel()  # noqa: E731
        y0, check = Z0.ravel(), None
    elif mode == "K":
        shape = K0.shape
        f = lambda y: fld.k(y.reshape(shape)).ravel()  # noqa: E731
        y0 = K0.ravel()
        check = lambda y, t: _psd_check(m)(y.reshape(shape), t)  # noqa: E731
    else:
        nz = Z0.size
        zs, ks = Z0.shape, K0.shape

        def f(y):
            return np.concatenate([fld.z(y[:nz].reshape(zs)).ravel(),
                                   fld.k(y[nz:].reshape(ks)).ravel()])
        y0 = np.concatenate([Z0.ravel(), K0.ravel()])
        check = lambda y, t: _psd_check(m)(y[nz:].reshape(ks), t)  # noqa: E731

    stepper = _Stepper(f, cfg, check)
    ys = [y0.copy()]
    y, t = y0.copy(), 0.0
    for target in times[1:]:
        y, t = stepper.advance(y, t, float(target))
        ys.append(y.copy())
    log.debug("simulate: %d steps, %d samples", stepper.nsteps, len(times))

    traj = Trajectory(times=times, mode=mode)
    diag = {"energy": [], "L_norm": [], "casimirs": []}
    if mode == "Z":
        traj.Z = np.array([v.reshape(Z0.shape) for v in ys])
        for Z in traj.Z:
            H, Ln, cas, _ = _diagnostics_Z(Z, basis, pot, m)
            diag["energy"].append(H); diag["L_norm"].append(Ln); diag["casimirs"].append(cas)
    elif mode == "K":
        traj.K = np.array([v.reshape(K0.shape) for v in ys])
        for K in traj.K:
            H, Ln, cas = _diagnostics_K(K, basis, pot, m)
            diag["energy"].append(H); diag["L_norm"].append(Ln); diag["casimirs"].append(cas)
    else:
        nz = Z0.size
        traj.Z = np.array([v[:nz].reshape(Z0.shape) for v in ys])
        traj.K = np.array([v[nz:].reshape(K0.shape) for v in ys])
        diag["residual"] = []
        for Z, K in zip(traj.Z, traj.K):
            H, Ln, _, KZ = _diagnostics_Z(Z, basis, pot, m)
            diag["energy"].append(H); diag["L_norm"].append(Ln)
            diag["casimirs"].append(casimirs(K, m))
            diag["residual"].append(float(np.linalg.norm(K - KZ)))
    traj.diagnostics = {k: np.asarray(v) for k, v in diag.items()}
    traj.diagnostics["steps"] = stepper.nsteps
    return traj
