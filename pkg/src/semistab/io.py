"""JSON loading of generators, measures and run configs; CSV and plot-script
writers for signals.

Complex numbers are ``[re, im]`` pairs (plain numbers are accepted for real
entries).  A matrix is either a flat row-major list of ``n*n`` pairs or a
list of rows.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .backends import DiscreteMeasure
from .core import Signal, ValidationError
from .diagnostics import ClassifyConfig

SCHEMA_VERSION = 1
SCENARIOS = ("matrix", "multiplication", "koopman")
MAX_CSV_ROWS = 20_001


def _complex(v, where):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(u, (int, float)) for u in v):
        return complex(v[0], v[1])
    raise ValidationError(f"{where}: expected a number or an [re, im] pair, got {v!r}")


def parse_vector(data, where="vector") -> np.ndarray:
    if not isinstance(data, (list, tuple)) or not data:
        raise ValidationError(f"{where}: expected a nonempty list")
    v = np.array([_complex(u, where) for u in data])
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{where}: non-finite entries")
    return v


def parse_matrix(data, where="matrix") -> np.ndarray:
    """Flat row-major list of ``n*n`` entries, or a list of ``n`` rows.

    A list whose length is a perfect square and whose items are all numbers
    or ``[re, im]`` pairs reads as flat; anything else as rows.
    """
    if not isinstance(data, (list, tuple)) or not data:
        raise ValidationError(f"{where}: expected a nonempty list")

    def scalar_like(u):
        return isinstance(u, (int, float)) or (
            isinstance(u, (list, tuple)) and len(u) == 2 and all(isinstance(c, (int, float)) for c in u))

    if math.isqrt(len(data)) ** 2 == len(data) and all(scalar_like(u) for u in data):
        flat = parse_vector(data, where)
        n = math.isqrt(flat.size)
        return flat.reshape(n, n)
    if not all(isinstance(r, (list, tuple)) for r in data):
        raise ValidationError(f"{where}: {len(data)} entries do not form a square matrix")
    rows = [parse_vector(r, where) for r in data]
    n = len(rows)
    if any(r.size != n for r in rows):
        raise ValidationError(f"{where}: matrix must be square, got {n} rows of lengths {[r.size for r in rows]}")
    return np.array(rows)


def matrix_to_json(A) -> list:
    A = np.asarray(A, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in A.reshape(-1)]


def parse_measure(data) -> DiscreteMeasure:
    if not isinstance(data, dict) or "kind" not in data:
        raise ValidationError("measure: expected an object with a 'kind'")
    kind = data["kind"]
    try:
        if kind == "atoms":
            atoms = np.asarray(data["atoms"], dtype=float)
            if atoms.ndim != 2 or atoms.shape[1] != 2:
                raise ValidationError("measure atoms must be [location, weight] pairs")
            return DiscreteMeasure.from_atoms(atoms)
        if kind == "lebesgue":
            return DiscreteMeasure.lebesgue(float(data.get("a", 0.0)), float(data.get("b", 1.0)),
                                            int(data.get("n", 10_000)))
        if kind == "cantor":
            return DiscreteMeasure.cantor(int(data.get("depth", 20)))
    except (TypeError, ValueError, KeyError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"measure: {exc}") from exc
    raise ValidationError(f"measure: unknown kind {kind!r}")


@dataclass(frozen=True)
class RunConfig:
    """A fully serializable analysis run."""

    scenario: str
    name: str = "run"
    matrix: list | None = None
    measure: dict | None = None
    flow: dict | None = None
    observations: list = field(default_factory=list)
    horizon: float = 1000.0
    dt: float = 0.01
    probes: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValidationError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        for key in ("horizon", "dt"):
            v = getattr(self, key)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise ValidationError(f"{key} must be a positive number, got {v!r}")
        if self.dt >= self.horizon:
            raise ValidationError("dt must be smaller than the horizon")
        need = {"matrix": "matrix", "multiplication": "measure", "koopman": "flow"}[self.scenario]
        if getattr(self, need) is None:
            raise ValidationError(f"scenario {self.scenario!r} needs a '{need}' entry")
        if not self.observations:
            raise ValidationError("at least one observation is required")
        unknown = set(self.tolerances) - (set(ClassifyConfig.__dataclass_fields__) - {"horizon", "dt", "probes"})
        if unknown:
            raise ValidationError(f"unknown tolerance keys: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known - {"schema_version", "grid"}
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        data.pop("schema_version", None)
        grid = data.pop("grid", None)
        if grid is not None:
            if not isinstance(grid, dict):
                raise ValidationError("grid must be an object with horizon and dt")
            data.setdefault("horizon", grid.get("horizon", 1000.0))
            data.setdefault("dt", grid.get("dt", 0.01))
        if "scenario" not in data:
            raise ValidationError("config needs a 'scenario'")
        return cls(**data)

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, **{k: getattr(self, k) for k in self.__dataclass_fields__}}

    def classify_config(self) -> ClassifyConfig:
        try:
            return ClassifyConfig(horizon=float(self.horizon), dt=float(self.dt),
                                  probes=tuple(float(p) for p in self.probes), **self.tolerances)
        except TypeError as exc:
            raise ValidationError(str(exc)) from exc


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise ValidationError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(data)


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex numbers."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(to_jsonable(data), indent=2, sort_keys=True) + "\n")


def write_signal_csv(path, signal: Signal, running: Signal | None = None, max_rows: int = MAX_CSV_ROWS) -> int:
    """Columns ``t, re, im, abs, running_mean``; rows are strided down to
    at most ``max_rows`` (the last grid point is always kept)."""
    n = len(signal)
    stride = max(1, math.ceil((n - 1) / (max_rows - 1))) if n > max_rows else 1
    idx = np.arange(0, n, stride)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    t, v = signal.times[idx], signal.values[idx]
    rm = running.values.real[idx] if running is not None else np.full(idx.size, np.nan)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "re", "im", "abs", "running_mean"])
        for row in zip(t, v.real, v.imag, np.abs(v), rm):
            w.writerow([repr(float(u)) for u in row])
    return int(idx.size)


def write_plot_script(path, csv_name: str, title: str) -> None:
    """Gnuplot script plotting ``|orbit|`` and its running mean from ``csv_name``."""
    Path(path).write_text(
        f"# plot {csv_name}: t vs |orbit| and running mean\n"
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        f"set title '{title}'\n"
        "set xlabel 't'\n"
        f"plot '../signals/{csv_name}' using 1:4 with lines title '|orbit|', \\\n"
        f"     '' using 1:5 with lines lw 2 title 'running mean'\n")
