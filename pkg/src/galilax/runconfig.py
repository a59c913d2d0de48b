"""Run configuration files (YAML, schema version 1).

Example::

    version: 1
    masses: [1.0, 1.0]
    dimension: 2
    potential: {kind: newtonian, G: 1.0, softening: 0.0}
    initial:
      positions: [[-0.5, 0.0], [0.5, 0.0]]   # one row per body
      momenta:   [[0.0, -0.5], [0.0, 0.5]]
    integrator: {method: rk45, tol: 1.0e-10, step: 1.0e-3}
    run: {t_end: 6.283185307179586, samples: 101, mode: Z}

``potential.kind`` may also be ``homogeneous`` with ``exponent``, ``coupling``
and ``softening``.  Everything except ``masses`` and ``initial`` has defaults.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from galilax.configuration import MassSystem, PhaseState
from galilax.dynamics import MODES, IntegratorConfig
from galilax.errors import InvalidInputError
from galilax.forces import Potential

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    system: MassSystem
    state: PhaseState
    potential: Potential
    integrator: IntegratorConfig
    t_end: float = 0.0
    samples: int = 101
    mode: str = "Z"


def _matrix(obj, name, n, d):
    try:
        a = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name}: not a numeric table ({exc})") from None
    if a.shape != (n, d):
        raise InvalidInputError(f"{name}: expected {n} rows of {d} coordinates, got shape {a.shape}")
    return a.T.copy()


_POTENTIAL_KEYS = {"newtonian": {"G", "softening"},
                   "homogeneous": {"exponent", "coupling", "softening"}}


def _potential(block) -> Potential:
    block = dict(block or {"kind": "newtonian"})
    kind = block.pop("kind", "newtonian")
    if kind not in _POTENTIAL_KEYS:
        raise InvalidInputError(f"potential: unknown kind {kind!r}")
    extra = set(block) - _POTENTIAL_KEYS[kind]
    if extra:
        raise InvalidInputError(f"potential: unknown keys {sorted(extra)}")
    if kind == "newtonian":
        return Potential.newtonian(G=block.get("G", 1.0), softening=block.get("softening", 0.0))
    if "exponent" not in block:
        raise InvalidInputError("potential: 'exponent' is required for kind homogeneous")
    return Potential.homogeneous(block["exponent"], coupling=block.get("coupling", 1.0),
                                 softening=block.get("softening", 0.0))


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise InvalidInputError("config must be a mapping")
    version = data.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise InvalidInputError(f"unsupported config version {version!r}")
    if "masses" not in data:
        raise InvalidInputError("config: 'masses' is required")
    init = data.get("initial")
    if not isinstance(init, dict) or "positions" not in init:
        raise InvalidInputError("config: 'initial.positions' is required")
    try:
        masses = np.asarray(data["masses"], dtype=float)
        pos = np.asarray(init["positions"], dtype=float)
        d = int(data.get("dimension", pos.shape[1] if pos.ndim == 2 else 0))
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"config: {exc}") from None
    sys = MassSystem(masses, d)
    q = _matrix(init["positions"], "initial.positions", sys.n, d)
    p = _matrix(init.get("momenta", np.zeros((sys.n, d))), "initial.momenta", sys.n, d)
    state = PhaseState(q, p)
    state.check(sys)

    integ = dict(data.get("integrator") or {})
    try:
        cfg = IntegratorConfig(**integ)
    except TypeError as exc:
        raise InvalidInputError(f"integrator: {exc}") from None
    run = dict(data.get("run") or {})
    mode = run.get("mode", "Z")
    if mode not in MODES:
        raise InvalidInputError(f"run.mode must be one of {MODES}")
    t_end = float(run.get("t_end", 0.0))
    if t_end < 0:
        raise InvalidInputError("run.t_end must be non-negative")
    samples = int(run.get("samples", 101))
    if samples < 1:
        raise InvalidInputError("run.samples must be positive")
    return RunConfig(sys, state, _potential(data.get("potential")), cfg, t_end, samples, mode)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InvalidInputError(f"{path}: YAML parse error: {exc}") from None
    return parse_config(data)
