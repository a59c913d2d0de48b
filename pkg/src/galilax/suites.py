"""Seeded property suites behind ``galilax verify``.

Every trial draws from its own child of ``SeedSequence(seed)``, so the verdict
and the printed numbers do not depend on how trials are spread over workers.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from galilax.ac_bridge import hat_transform, verify_equivalence
from galilax.configuration import (MassSystem, build_jacobi_basis, reconstruct,
                                   CenteredState)
from galilax.dynamics import IntegratorConfig, casimirs, dynamical_time, simulate
from galilax.errors import DecompositionError, GalilaxError, InvalidInputError
from galilax.forces import Potential, small_gram, squared_distances_from_b
from galilax.normal_form import (bounds_ok, invariants_from_Z, permuted_diagonal,
                                 symplectic_inverse, xu_decompose)
from galilax.reduction import gram, spectral_traces, symplectic_form

log = logging.getLogger(__name__)

SPECTRAL_SHAPES = [(d, n) for d in (2, 3, 4) for n in (2, 3, 4, 5)]
MAX_REJECTIONS = 1000


@dataclass
class TrialResult:
    ok: bool
    metric: float
    rejected: int = 0
    note: str = ""


@dataclass
class SuiteResult:
    name: str
    trials: int
    failures: int
    worst: float
    threshold: float
    rejected: int = 0
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{self.name}: {verdict} trials={self.trials} failures={self.failures} "
                f"worst={self.worst:.3e} threshold={self.threshold:.1e} rejected={self.rejected}")


# -- random inputs ---------------------------------------------------------

def random_orthogonal(rng, d) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Q * np.sign(np.diag(R))


def random_symplectic(rng, m, scale=0.4, factors=3) -> np.ndarray:
    J = symplectic_form(m)
    T = np.eye(2 * m)
    for _ in range(factors):
        S = rng.standard_normal((2 * m, 2 * m)) * scale
        T = T @ expm(J @ (0.5 * (S + S.T)))
    return T


def random_masses(rng, n, low=0.5, high=2.0) -> np.ndarray:
    return rng.uniform(low, high, n)


def min_pair_distance(Z, basis) -> float:
    r2 = squared_distances_from_b(small_gram(Z), basis)
    iu = np.triu_indices(basis.n, 1)
    return float(np.sqrt(max(r2[iu].min(), 0.0)))


def random_admissible(rng, d, n, masses=None, min_dist=0.2):
    """(Z, basis, rejections) with all mutual distances above ``min_dist``."""
    masses = random_masses(rng, n) if masses is None else masses
    basis = build_jacobi_basis(MassSystem(masses, d))
    for rej in range(MAX_REJECTIONS):
        Z = rng.standard_normal((d, 2 * (n - 1)))
        if min_pair_distance(Z, basis) > min_dist:
            return Z, basis, rej
    raise InvalidInputError(f"no admissible state after {MAX_REJECTIONS} draws (d={d}, n={n})")


def plant_xu(rng, d, n):
    """Random Z = Q D T^{-1} with known (p, q, sigma)."""
    m = n - 1
    pmax = min(d // 2, m)
    p = int(rng.integers(0, pmax + 1))
    q = int(rng.integers(0, min(d - 2 * p, m - p) + 1))
    sigma = np.sort(rng.uniform(0.5, 2.0, p))[::-1]
    Q = random_orthogonal(rng, d)
    T = random_symplectic(rng, m)
    D = permuted_diagonal(d, m, p, q, sigma)
    return Q @ D @ symplectic_inverse(T), p, q, sigma


# -- trials ----------------------------------------------------------------

def spectral_trial(rng, index, tol=1e-9, k_max=6) -> TrialResult:
    d, n = SPECTRAL_SHAPES[index % len(SPECTRAL_SHAPES)]
    Z = rng.standard_normal((d, 2 * (n - 1)))
    trL, trK = spectral_traces(Z, k_max)
    worst = 0.0
    for k, (a, b) in enumerate(zip(trL, trK), start=1):
        err = abs(a - b) / max(1.0, abs(b))
        if k % 2:
            err = max(err, abs(a), abs(b))
        worst = max(worst, err)
    return TrialResult(worst <= tol, worst)


def casimir_trial(rng, index, tol=1e-8) -> TrialResult:
    """Casimirs match the spectral invariants and stay put along a short K flow."""
    n = 3 + index % 2
    d = 2 + index % 3
    Z, basis, rej = random_admissible(rng, d, n, min_dist=0.5)
    K = gram(Z).K
    m = n - 1
    sig = invariants_from_Z(Z)
    cas = casimirs(K, m)
    worst = 0.0
    for ell, c in enumerate(cas, start=1):
        ref = 2.0 * (-1) ** ell * sum(w ** (2 * ell) for w in sig.omega_sq)
        worst = max(worst, abs(c - ref) / max(1.0, abs(ref)))
    pot = Potential.newtonian()
    t_end = 0.05 * dynamical_time(Z, basis, pot)
    traj = simulate(CenteredState(Z), t_end, IntegratorConfig("rk45", tol=1e-12), "K",
                    basis, pot, samples=3)
    c0 = np.asarray(traj.diagnostics["casimirs"][0])
    c1 = np.asarray(traj.diagnostics["casimirs"][-1])
    drift = float(np.max(np.abs(c1 - c0) / np.maximum(1.0, np.abs(c0))))
    worst = max(worst, drift)
    return TrialResult(worst <= tol, worst, rej)


def ac_trial(rng, index, tol=1e-10) -> TrialResult:
    n = 2 + index % 4
    d = 1 + index % 4
    Z, basis, rej = random_admissible(rng, d, n)
    rep = verify_equivalence(Z, basis, Potential.newtonian(), threshold=tol)
    sys = MassSystem(basis.masses, d)
    H = hat_transform(sys, reconstruct(sys, basis, CenteredState(Z)), Potential.newtonian(),
                      tol=1e-9)
    kern = float(np.linalg.norm(H.G_hat @ H.kernel_vector))
    worst = max(rep.residual, rep.top_left_residual, kern)
    return TrialResult(rep.passed and kern <= tol, worst, rej)


def xu_trial(rng, index, tol=1e-8) -> TrialResult:
    d = 1 + index % 4
    n = 2 + (index // 4) % 4
    Z, p, q, sigma = plant_xu(rng, d, n)
    try:
        f = xu_decompose(Z)
    except DecompositionError as exc:
        return TrialResult(False, np.inf, note=str(exc))
    J = symplectic_form(n - 1)
    res = np.linalg.norm(Z - f.reconstruct()) / max(np.linalg.norm(Z), 1e-300)
    sym = np.linalg.norm(f.T.T @ J @ f.T - J)
    same = (f.p, f.q) == (p, q) and np.allclose(f.sigma, sigma, rtol=1e-8, atol=0)
    worst = max(res, sym)
    note = "" if same else f"planted {(p, q)} recovered {(f.p, f.q)}"
    return TrialResult(same and worst <= tol and bounds_ok(f.p, f.q, d, n - 1), worst, note=note)


SUITES = {
    "spectral": (spectral_trial, 1e-9),
    "casimir": (casimir_trial, 1e-8),
    "ac-equivalence": (ac_trial, 1e-10),
    "xu-roundtrip": (xu_trial, 1e-8),
}


def _run_one(args):
    name, seed_seq, index, tol = args
    trial = SUITES[name][0]
    rng = np.random.default_rng(seed_seq)
    try:
        return trial(rng, index, tol)
    except GalilaxError as exc:
        return TrialResult(False, np.inf, note=f"{type(exc).__name__}: {exc}")


def run_suite(name: str, seed: int = 0, trials: int = 100, workers: int = 1,
              tol=None) -> SuiteResult:
    """Run ``trials`` seeded trials; ``tol`` overrides the suite threshold."""
    if name not in SUITES:
        raise InvalidInputError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    if trials < 1:
        raise InvalidInputError("trials must be positive")
    tol = SUITES[name][1] if tol is None else float(tol)
    children = np.random.SeedSequence(seed).spawn(trials)
    jobs = [(name, s, i, tol) for i, s in enumerate(children)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    notes = [f"trial {i}: {r.note}" for i, r in enumerate(results) if r.note]
    rejected = sum(r.rejected for r in results)
    if rejected:
        log.info("%s: rejected %d draws (collision or rank filter)", name, rejected)
    return SuiteResult(name, trials, sum(not r.ok for r in results),
                       max(r.metric for r in results), tol, rejected, notes)
