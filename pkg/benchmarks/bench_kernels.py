"""Compare the numpy and compiled kernel backends.

    python benchmarks/bench_kernels.py [--repeat 2000] [--n 3 5 10]

Times single right-hand-side evaluations for the Z and K flows and one full
integration per backend, and checks that both backends agree.
"""
import argparse
import time
import timeit

import numpy as np

from galilax import kernels
from galilax.configuration import CenteredState, MassSystem, build_jacobi_basis
from galilax.dynamics import IntegratorConfig, simulate
from galilax.forces import Potential, pair_deltas
from galilax.reduction import gram


def _inputs(n, d=3, seed=0):
    rng = np.random.default_rng(seed)
    masses = rng.uniform(0.5, 2.0, n)
    B = build_jacobi_basis(MassSystem(masses, d))
    iu = np.triu_indices(n, 1)
    coef = np.ascontiguousarray(masses[iu[0]] * masses[iu[1]])
    Z = np.ascontiguousarray(rng.standard_normal((d, 2 * (n - 1))))
    K = np.ascontiguousarray(gram(Z).K)
    return B, pair_deltas(B), coef, Z, K, np.ascontiguousarray(1.0 / B.reduced_masses)


def bench_rhs(mod, n, repeat):
    _, deltas, coef, Z, K, minv = _inputs(n)
    tz = min(timeit.repeat(lambda: mod.z_rhs_power(Z, deltas, coef, 1.0, 0.0, minv, True),
                           number=repeat, repeat=3)) / repeat
    tk = min(timeit.repeat(lambda: mod.k_rhs_power(K, deltas, coef, 1.0, 0.0, minv, True),
                           number=repeat, repeat=3)) / repeat
    return tz, tk


def bench_simulate(mod, n):
    B, _, _, Z, _, _ = _inputs(n, seed=1)
    saved = {k: getattr(kernels, k) for k in ("reduced_wc_power", "z_rhs_power", "k_rhs_power")}
    try:
        for k in saved:
            setattr(kernels, k, getattr(mod, k))
        t0 = time.perf_counter()
        tr = simulate(CenteredState(Z * 3.0), 2.0, IntegratorConfig("rk4", step=1e-3), "Z", B,
                      Potential.newtonian(), samples=2)
        return time.perf_counter() - t0, tr.Z[-1]
    finally:
        for k, v in saved.items():
            setattr(kernels, k, v)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--n", type=int, nargs="+", default=[3, 5, 10])
    args = ap.parse_args(argv)

    found = kernels.backends()
    print(f"backends: {', '.join(found)} (default {kernels.BACKEND})")
    if "cython" not in found:
        print("compiled extension not built; only the numpy backend is timed")
    print(f"{'n':>3} {'backend':>8} {'Z rhs [us]':>11} {'K rhs [us]':>11} {'rk4 2000 steps [s]':>19}")
    for n in args.n:
        finals = {}
        for name, mod in found.items():
            tz, tk = bench_rhs(mod, n, args.repeat)
            ts, finals[name] = bench_simulate(mod, n)
            print(f"{n:>3} {name:>8} {tz * 1e6:>11.2f} {tk * 1e6:>11.2f} {ts:>19.3f}")
        if len(finals) == 2:
            diff = np.abs(finals["python"] - finals["cython"]).max()
            print(f"    max |Z_python - Z_cython| after integration: {diff:.2e}")


if __name__ == "__main__":
    main()
