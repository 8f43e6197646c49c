"""Fourier analysis of spectral measures: transforms, decay (Rajchman)
diagnostics, Wiener time averages and closed-form Cantor oracles."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .backends.multiplication import DiscreteMeasure, _phase_sum
from .core import Signal, TimeGrid, ValidationError

DECAYING = "decaying-evidence"
NON_DECAYING = "non-decaying-evidence"


def fourier_transform(mu: DiscreteMeasure, t, method: str = "auto"):
    """``F mu(t) = sum_j w_j exp(i t r_j)``.

    ``method="direct"`` sums over all atoms.  ``"factored"`` multiplies the
    transforms of the convolution factors and needs ``mu.factors``;
    ``"auto"`` picks it when available.  Scalars in, scalar out.
    """
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if method == "auto":
        method = "factored" if mu.factors else "direct"
    if method == "direct":
        out = _phase_sum(mu.locations, mu.weights, t)
    elif method == "factored":
        if not mu.factors:
            raise ValidationError(f"{mu.name} carries no factorization")
        out = np.ones(t.shape, dtype=complex)
        for factor in mu.factors:
            out *= _phase_sum(factor.locations, factor.weights, t)
    else:
        raise ValidationError(f"unknown method {method!r}")
    return complex(out) if scalar else out


def cantor_fourier_oracle(t, terms: int = 60):
    """Transform of the (infinite-depth) middle-thirds Cantor measure on
    [0, 1]: ``exp(it/2) * prod_{k<=terms} cos(t / 3**k)``."""
    t = np.asarray(t, dtype=float)
    out = np.exp(0.5j * t)
    for k in range(1, terms + 1):
        out = out * np.cos(t / 3.0**k)
    return out


def cantor_probe_floor(terms: int = 60) -> float:
    """``|prod_{m>=1} cos(2 pi / 3**m)|``, the value of ``|F mu|`` at ``2 pi 3**n``."""
    m = np.arange(1, terms + 1)
    return float(abs(np.prod(np.cos(2 * np.pi / 3.0**m))))


def cantor_probe_times(n_max: int = 6, n_min: int = 1) -> np.ndarray:
    return 2 * np.pi * 3.0 ** np.arange(n_min, n_max + 1)


@dataclass(frozen=True, eq=False)
class FourierProfile:
    measure: DiscreteMeasure
    samples: Signal
    peak_report: list = field(default_factory=list)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "re", "im", "abs"])
            for t, v in zip(self.samples.times, self.samples.values):
                w.writerow([repr(float(u)) for u in (t, v.real, v.imag, abs(v))])


def fourier_profile(mu: DiscreteMeasure, grid: TimeGrid, probes=()) -> FourierProfile:
    samples = Signal(grid, fourier_transform(mu, grid.times))
    probes = np.asarray(probes, dtype=float)
    peaks = [(float(t), abs(v)) for t, v in zip(probes, np.atleast_1d(fourier_transform(mu, probes)))] \
        if probes.size else []
    return FourierProfile(mu, samples, peaks)


@dataclass(frozen=True)
class RajchmanReport:
    window: float
    window_ends: np.ndarray
    window_sup: np.ndarray
    trend_slope: float
    tail_sup: float
    tail_interval: tuple
    probe_values: list
    tol: float
    verdict: str


def rajchman_diagnostic(mu: DiscreteMeasure, probe_grid: TimeGrid, window: float,
                        probes=(), tol: float = 0.05, tail_fraction: float = 0.2) -> RajchmanReport:
    """Finite-horizon evidence on whether ``F mu`` vanishes at infinity.

    Reports ``sup |F mu|`` on consecutive windows of length ``window``, the
    log-log slope of those suprema against time, the supremum over the
    trailing ``tail_fraction`` of the grid, and ``|F mu|`` at the
    adversarial ``probes``.  The verdict is decaying evidence iff the tail
    supremum and every probe value are below ``tol``.
    """
    if not window > 0:
        raise ValidationError("window must be positive")
    times = probe_grid.times
    vals = np.abs(fourier_transform(mu, times))
    edges = np.arange(probe_grid.t_start, probe_grid.t_max + 0.5 * window, window)
    if edges.size < 2:
        raise ValidationError("probe grid shorter than one window")
    idx = np.searchsorted(times, edges)
    ends, sups = [], []
    for lo, hi, end in zip(idx[:-1], idx[1:], edges[1:]):
        if hi > lo:
            ends.append(end)
            sups.append(vals[lo:hi].max())
    ends, sups = np.array(ends), np.array(sups)
    pos = sups > 0
    slope = float(np.polyfit(np.log(ends[pos]), np.log(sups[pos]), 1)[0]) if pos.sum() >= 2 else float("nan")
    t_lo = probe_grid.t_max - tail_fraction * (probe_grid.t_max - probe_grid.t_start)
    tail_sup = float(vals[times >= t_lo].max())
    probes = np.atleast_1d(np.asarray(probes, dtype=float))
    probe_vals = [(float(t), abs(v)) for t, v in zip(probes, np.atleast_1d(fourier_transform(mu, probes)))] \
        if probes.size else []
    decaying = tail_sup < tol and all(v < tol for _, v in probe_vals)
    return RajchmanReport(window, ends, sups, slope, tail_sup, (t_lo, probe_grid.t_max), probe_vals, tol,
                          DECAYING if decaying else NON_DECAYING)


def wiener_average(mu: DiscreteMeasure, T: float, dt: float | None = None) -> float:
    """``(1/2T) int_{-T}^{T} |F mu|^2`` by trapezoid.

    ``|F mu|`` is even, so only ``[0, T]`` is sampled.  The default step
    resolves the largest frequency ``max r - min r`` of ``|F mu|^2``.
    """
    if not T > 0:
        raise ValidationError("T must be positive")
    if dt is None:
        span = float(np.ptp(mu.locations))
        dt = min(0.05, 0.2 / span) if span > 0 else 0.05
    grid = TimeGrid.from_horizon(T, dt)
    v = np.abs(fourier_transform(mu, grid.times)) ** 2
    return float(grid.dt * (v.sum() - 0.5 * (v[0] + v[-1])) / (grid.n_steps * grid.dt))
