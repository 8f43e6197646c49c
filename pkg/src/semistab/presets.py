"""Named scenarios and the construction of backends from run configs."""
from __future__ import annotations

import math

import numpy as np

from .backends import (FLOW_PRESETS, Bump, Character, Coordinate, KoopmanSemigroup, MatrixGenerator,
                       MatrixSemigroup, MultiplicationSemigroup)
from .core import ValidationError
from .io import RunConfig, matrix_to_json, parse_matrix, parse_measure, parse_vector


def _planted_unitary_demo(seed: int) -> np.ndarray:
    """``U diag(i, -1 + i) U*`` with a seeded random unitary ``U``."""
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    Q, R = np.linalg.qr(Z)
    U = Q * (np.diag(R) / np.abs(np.diag(R)))
    return U @ np.diag([1j, -1 + 1j]) @ U.conj().T


def _vec(v):
    return [[float(np.real(z)), float(np.imag(z))] for z in v]


def preset_config(name: str, horizon: float | None = None, seed: int = 0) -> RunConfig:
    """Build the :class:`RunConfig` of a named preset."""
    probes_cantor = [2 * math.pi * 3.0**n for n in range(1, 7)]
    table = {
        "cantor": dict(scenario="multiplication", measure={"kind": "cantor", "depth": 20},
                       observations=[{"x": "ones", "y": "ones"}], horizon=1e4, dt=0.01, probes=probes_cantor),
        "lebesgue": dict(scenario="multiplication", measure={"kind": "lebesgue", "a": 0.0, "b": 1.0, "n": 10_000},
                         observations=[{"x": "ones", "y": "ones"}], horizon=1e3, dt=0.01),
        "stable-matrix": dict(scenario="matrix", matrix=matrix_to_json(-np.eye(2)),
                              observations=[{"x": _vec([1, 0]), "y": _vec([1, 0])},
                                            {"x": _vec([1, 1]), "y": _vec([0, 1])}], horizon=100.0, dt=0.01),
        "imaginary-matrix": dict(scenario="matrix", matrix=matrix_to_json(np.diag([1j, -1])),
                                 observations=[{"x": _vec([1, 0]), "y": _vec([1, 0])}], horizon=100.0, dt=0.01),
        "foguel-demo": dict(scenario="matrix", matrix=matrix_to_json(_planted_unitary_demo(seed)),
                            observations=[{"x": _vec([1, 0]), "y": _vec([1, 0])},
                                          {"x": _vec([0, 1]), "y": _vec([0, 1])}], horizon=100.0, dt=0.01),
        "cogenerator-demo": dict(scenario="matrix", matrix=matrix_to_json(np.diag([2j, -1, -0.5 + 3j])),
                                 observations=[{"x": _vec([1, 1, 1]), "y": _vec([1, 1, 1])}],
                                 horizon=100.0, dt=0.01),
        "homoclinic": dict(scenario="koopman", flow={"name": "homoclinic", "h": 1e-3},
                           observations=[{"observable": {"kind": "bump", "center": math.pi, "width": 0.5},
                                          "point": [0.5, 0.0]}], horizon=2000.0, dt=0.01),
        "torus-rotation": dict(scenario="koopman", flow={"name": "torus_rotation", "alpha": 1.0, "h": 1e-3},
                               observations=[{"observable": {"kind": "character", "k": 1}, "point": [0.0]}],
                               horizon=200.0, dt=0.01),
    }
    if name not in table:
        raise ValidationError(f"unknown preset {name!r}; see 'semistab presets'")
    data = dict(table[name], name=name, seed=seed)
    if horizon is not None:
        data["horizon"] = float(horizon)
    return RunConfig.from_dict(data)


# name -> (source example, default parameters)
PRESETS = {
    "cantor": ("Cantor spectral measure (Rajchman example)", "depth 20, T=1e4, dt=0.01, probes 2 pi 3^n"),
    "lebesgue": ("Lebesgue spectral measure (Rajchman example)", "[0,1] with 1e4 atoms, T=1e3"),
    "stable-matrix": ("stable generator A = -I", "2x2, T=100"),
    "imaginary-matrix": ("generator diag(i, -1)", "T=100"),
    "foguel-demo": ("unitary/weakly stable splitting of a contraction", "U diag(i, -1+i) U*, seeded U"),
    "cogenerator-demo": ("Cayley transform cogenerator", "diag(2i, -1, -0.5+3i)"),
    "homoclinic": ("homoclinic planar flow", "x0=(0.5, 0), bump at angle pi, T=2000"),
    "torus-rotation": ("rotation on the circle (mixing example)", "alpha=1, character k=1, T=200"),
}


def _observable(spec):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValidationError("observable must be an object with a 'kind'")
    kind = spec["kind"]
    params = {k: v for k, v in spec.items() if k != "kind"}
    try:
        if kind == "bump":
            return Bump(**params)
        if kind == "character":
            return Character(**params)
        if kind == "coordinate":
            return Coordinate(**params)
    except TypeError as exc:
        raise ValidationError(f"observable {kind}: {exc}") from exc
    raise ValidationError(f"unknown observable kind {kind!r}")


def build(config: RunConfig):
    """Backend and list of ``(x, y)`` observation pairs for ``config``."""
    if config.scenario == "matrix":
        backend = MatrixSemigroup(MatrixGenerator(parse_matrix(config.matrix)))
        obs = []
        for i, o in enumerate(config.observations):
            x, y = parse_vector(o.get("x"), f"observation {i} x"), parse_vector(o.get("y"), f"observation {i} y")
            if x.size != backend.dim or y.size != backend.dim:
                raise ValidationError(f"observation {i} does not match the {backend.dim}-dim generator")
            obs.append((x, y))
        return backend, obs
    if config.scenario == "multiplication":
        backend = MultiplicationSemigroup(parse_measure(config.measure))
        obs = []
        for i, o in enumerate(config.observations):
            pair = []
            for key in ("x", "y"):
                v = o.get(key)
                v = backend.ones() if v == "ones" else parse_vector(v, f"observation {i} {key}")
                if v.size != backend.dim:
                    raise ValidationError(f"observation {i} {key} has {v.size} entries for {backend.dim} atoms")
                pair.append(v)
            obs.append(tuple(pair))
        return backend, obs
    spec = dict(config.flow)
    name = spec.pop("name", None)
    if name not in FLOW_PRESETS:
        raise ValidationError(f"unknown flow {name!r}; choose from {sorted(FLOW_PRESETS)}")
    try:
        flow = FLOW_PRESETS[name](**spec)
    except TypeError as exc:
        raise ValidationError(f"flow {name}: {exc}") from exc
    backend = KoopmanSemigroup(flow)
    obs = []
    for i, o in enumerate(config.observations):
        point = np.asarray(o.get("point"), dtype=float)
        if point.shape != (flow.dim,):
            raise ValidationError(f"observation {i}: point must have {flow.dim} coordinates")
        obs.append((_observable(o.get("observable")), point))
    return backend, obs
