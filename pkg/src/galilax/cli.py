"""Command-line front end.

    galilax simulate  --config run.yaml [--mode Z|K|both] [--tol T] [--out DIR]
    galilax invariants --config state.yaml [--tol T] [--out DIR]
    galilax classify  --m 3 --p 1 --q 1 --omega 2.5
    galilax tables    [3] [4] [--out DIR]
    galilax verify    {spectral,casimir,ac-equivalence,xu-roundtrip,all} [--seed S] [--trials N]

Exit codes: 0 ok, 1 verification failure, 2 input error, 3 integration failure.
GALILAX_LOG sets the log level (DEBUG, INFO, WARNING, ...; default WARNING).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from galilax import __version__
from galilax.configuration import build_jacobi_basis, center
from galilax.dynamics import IntegratorConfig, simulate
from galilax.errors import (ConsistencyError, GalilaxError, IntegrationError,
                            InvalidInputError, SingularityError, ToleranceInconsistencyError,
                            UnsupportedCaseError)
from galilax.normal_form import InvariantSignature, invariants_from_Z
from galilax.orbit_catalog import closure_strata, format_table, orbit_dimension
from galilax.reduction import RANK_TOL, angular_momentum, gram
from galilax.runconfig import load_config
from galilax.suites import SUITES, run_suite

log = logging.getLogger("galilax")

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_INTEGRATION = 0, 1, 2, 3
REPORT_SCHEMA = 1


def _setup_logging():
    raw = os.environ.get("GALILAX_LOG", "WARNING").strip().upper()
    level = int(raw) if raw.isdigit() else logging.getLevelName(raw)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _out_dir(args):
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# -- simulate --------------------------------------------------------------

def cmd_simulate(args) -> int:
    rc = load_config(args.config)
    mode = args.mode or rc.mode
    log.info("simulate %s: n=%d d=%d mode=%s", args.config, rc.system.n, rc.system.d, mode)
    cfg = rc.integrator
    if args.tol is not None:
        cfg = IntegratorConfig(cfg.method, cfg.step, args.tol, cfg.max_steps, cfg.initial_step)
    basis = build_jacobi_basis(rc.system)
    Z0 = center(rc.system, rc.state, basis)
    traj = simulate(Z0, rc.t_end, cfg, mode, basis, rc.potential, samples=rc.samples)
    dg = traj.diagnostics
    m = basis.m
    cas = np.asarray(dg["casimirs"]).reshape(len(traj.times), m)

    header = ["t", "energy", "L_norm"] + [f"casimir_{2 * (i + 1)}" for i in range(m)]
    cols = [traj.times, dg["energy"], dg["L_norm"]] + [cas[:, i] for i in range(m)]
    if "residual" in dg:
        header.append("residual")
        cols.append(dg["residual"])
    if traj.Z is not None:
        d = traj.Z.shape[1]
        header += [f"Z_{i}_{j}" for i in range(d) for j in range(2 * m)]
        cols += list(traj.Z.reshape(len(traj.times), -1).T)
    else:
        header += [f"K_{i}_{j}" for i in range(2 * m) for j in range(2 * m)]
        cols += list(traj.K.reshape(len(traj.times), -1).T)
    rows = np.column_stack(cols)

    def rel_drift(v, scale=0.0):
        # falls back to an absolute drift in units of ``scale`` when v[0] is negligible
        v = np.asarray(v, dtype=float)
        ref = abs(v[0]) if abs(v[0]) > 1e-12 * scale else scale
        return float(np.max(np.abs(v - v[0])) / max(ref, 1e-300))

    K0 = traj.K[0] if traj.K is not None else None
    if K0 is None:
        K0 = gram(traj.Z[0]).K
    k0 = float(np.linalg.norm(K0))

    report = {
        "schema": f"galilax.simulate/{REPORT_SCHEMA}",
        "n": rc.system.n, "d": rc.system.d, "mode": mode, "seed": args.seed,
        "method": cfg.method, "tol": cfg.tol, "t_end": rc.t_end,
        "samples": len(traj.times), "steps": int(dg["steps"]),
        "energy_drift": rel_drift(dg["energy"]),
        "L_norm_drift": rel_drift(dg["L_norm"]) if dg["L_norm"][0] > 0 else 0.0,
        "casimir_drift": [rel_drift(cas[:, i], k0 ** (2 * i + 2)) for i in range(m)],
    }
    if "residual" in dg:
        report["max_residual"] = float(np.max(dg["residual"]))

    out = _out_dir(args)
    if out is not None:
        with open(out / "trajectory.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([repr(float(x)) for x in r])
        _write_json(out / "simulate.json", report)
    print(f"simulate: mode={mode} samples={report['samples']} steps={report['steps']}")
    print(f"  energy drift  {report['energy_drift']:.3e}")
    print(f"  |L| drift     {report['L_norm_drift']:.3e}")
    for i, c in enumerate(report["casimir_drift"]):
        print(f"  tr K^{2 * (i + 1)} drift {c:.3e}")
    if "max_residual" in report:
        print(f"  max |K - JG(Z)| {report['max_residual']:.3e}")
    return EXIT_OK


# -- invariants ------------------------------------------------------------

def cmd_invariants(args) -> int:
    path = args.config or args.state
    if path is None:
        raise InvalidInputError("invariants needs --config PATH (or a state file)")
    rc = load_config(path)
    basis = build_jacobi_basis(rc.system)
    Z = center(rc.system, rc.state, basis).Z
    tol = RANK_TOL if args.tol is None else args.tol
    sig = invariants_from_Z(Z, tol)
    report = {
        "schema": f"galilax.invariants/{REPORT_SCHEMA}",
        "p": sig.p, "q": sig.q, "omega_sq": list(sig.omega_sq),
        "motion_rank": sig.motion_rank,
        "rank_margin_decades": sig.margin if np.isfinite(sig.margin) else None,
        "L_norm": angular_momentum(Z).norm, "tol": tol,
    }
    out = _out_dir(args)
    if out is not None:
        _write_json(out / "invariants.json", report)
    print(f"(p,q) = ({sig.p},{sig.q})")
    print("omega^2 = [" + ", ".join(f"{w:.12g}" for w in sig.omega_sq) + "]")
    print(f"motion rank = {sig.motion_rank}")
    print(f"rank margin = {sig.margin:.3g} decades")
    return EXIT_OK


# -- classify --------------------------------------------------------------

def cmd_classify(args) -> int:
    omega = tuple(args.omega or ())
    sig = InvariantSignature(args.p, args.q, omega, args.m)
    od = orbit_dimension(sig, args.m)
    if od.isotropy_name == "unclassified":
        raise UnsupportedCaseError(
            f"isotropy of {sig} has numeric dimension {od.numeric_isotropy_dim} not covered by the catalog")
    strata = ", ".join(f"({s.p},{s.q})" for s in closure_strata(sig))
    print(f"signature: {sig}")
    print(f"dim O = {od.dimension}")
    print(f"isotropy = {od.isotropy_name} (dim {od.isotropy_dim})")
    print(f"closure strata = {strata}")
    print(f"closed = {str(od.closed).lower()}")
    print(f"generic = {str(od.generic).lower()}")
    out = _out_dir(args)
    if out is not None:
        _write_json(out / "classify.json", {
            "schema": f"galilax.classify/{REPORT_SCHEMA}", "m": args.m, "p": sig.p, "q": sig.q,
            "omega_sq": list(sig.omega_sq), "dimension": od.dimension,
            "isotropy": od.isotropy_name, "isotropy_dim": od.isotropy_dim,
            "closure_strata": [[s.p, s.q] for s in closure_strata(sig)],
            "closed": od.closed, "generic": od.generic})
    return EXIT_OK


# -- tables ----------------------------------------------------------------

def cmd_tables(args) -> int:
    ns = args.n or [3, 4]
    bad = [n for n in ns if n not in (3, 4)]
    if bad:
        raise InvalidInputError(f"tables exist for n = 3 and n = 4 only, not {bad}")
    out = _out_dir(args)
    for i, n in enumerate(ns):
        log.info("tables: n=%d", n)
        text = format_table(n)
        if out is not None:
            (out / f"tables_n{n}.txt").write_text(text)
        if i:
            sys.stdout.write("\n")
        sys.stdout.write(text)
    return EXIT_OK


# -- verify ----------------------------------------------------------------

def cmd_verify(args) -> int:
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    log.info("verify %s: seed=%d trials=%d workers=%d", ",".join(names), args.seed, args.trials,
             args.workers)
    results = [run_suite(nm, seed=args.seed, trials=args.trials, workers=args.workers,
                         tol=args.tol) for nm in names]
    for r in results:
        print(r.line())
        for note in r.notes[:5]:
            print(f"  {note}")
    out = _out_dir(args)
    if out is not None:
        _write_json(out / "verify.json", {
            "schema": f"galilax.verify/{REPORT_SCHEMA}", "seed": args.seed, "trials": args.trials,
            "suites": [{"name": r.name, "passed": r.passed, "failures": r.failures,
                        "worst": r.worst, "threshold": r.threshold, "rejected": r.rejected}
                       for r in results]})
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


# -- parser ----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="galilax", description="Galilean reduction of the n-body problem.")
    ap.add_argument("--version", action="version", version=f"galilax {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def common(p, config=False, mode=False, seed=False):
        if config:
            p.add_argument("--config", metavar="PATH", help="YAML run configuration")
        if mode:
            p.add_argument("--mode", choices=["Z", "K", "both"], default=None)
        if seed:
            p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", metavar="DIR", default=None, help="directory for output files")
        p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("simulate", help="integrate a configuration")
    common(p, config=True, mode=True, seed=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("invariants", help="numerical invariants of a state")
    common(p, config=True)
    p.add_argument("state", nargs="?", default=None, help="state file (same format as --config)")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("classify", help="orbit data for a signature")
    p.add_argument("--m", type=int, required=True, help="n - 1")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--omega", type=float, nargs="*", default=None,
                   help="spectral invariants omega_j^2 (p values)")
    p.add_argument("--out", metavar="DIR", default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("tables", help="orbit tables for n = 3 and n = 4")
    p.add_argument("n", type=int, nargs="*", help="3 and/or 4 (default both)")
    p.add_argument("--out", metavar="DIR", default=None)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("verify", help="seeded verification suites")
    p.add_argument("suite", choices=sorted(SUITES) + ["all"])
    common(p, seed=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "tol", None) is not None and not args.tol > 0:
            raise InvalidInputError("--tol must be positive")
        return args.func(args)
    except (SingularityError, IntegrationError, ConsistencyError) as exc:
        print(f"galilax: integration failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except (InvalidInputError, UnsupportedCaseError, ToleranceInconsistencyError) as exc:
        print(f"galilax: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GalilaxError as exc:
        print(f"galilax: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
