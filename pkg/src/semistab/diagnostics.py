"""Orbit-level stability analytics and the finite-horizon classifier.

Every verdict here is evidence at a stated horizon and tolerance, never a
statement about the limit itself.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import expm

from .backends.koopman import Flow, KoopmanSemigroup
from .backends.matrix import TOL_IM, MatrixSemigroup
from .backends.multiplication import MultiplicationSemigroup
from .core import Semigroup, Signal, TimeGrid, ValidationError, running_mean
from .resolvent import (LimitEstimate, ResolventProbe, abel_pointwise, abel_square_from_signal,
                        abel_square_integral, limit_estimate)

WEAK = "weak-stability-evidence"
ALMOST_WEAK_ONLY = "almost-weak-only-evidence"
NOT_ALMOST_WEAK = "not-almost-weak"
INCONCLUSIVE = "inconclusive"
VERDICTS = (WEAK, ALMOST_WEAK_ONLY, NOT_ALMOST_WEAK, INCONCLUSIVE)

DENSITY_ONE = "density-one-convergence-evidence"
DENSITY_FAILS = "fails"


def weak_orbit(backend: Semigroup, x, y, grid: TimeGrid) -> Signal:
    """``t -> <T(t)x, y>`` on ``grid``; for Koopman backends ``x`` is the
    observable and ``y`` the initial point."""
    return Signal(grid, backend.weak_orbit(x, y, grid.times))


# density-one extraction -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityReport:
    """Super-level-set densities of a nonnegative signal per ``epsilon``.

    ``running_density[k]`` is ``|{s <= t: f(s) >= eps_k}| / t`` on the grid;
    ``thresholds[k]`` is the first time after which it stays below
    ``density_tol`` (``None`` if it never does).  The complement of ``M`` is
    the union over k of ``{f >= eps_k}`` restricted to
    ``[thresholds[k], thresholds[k+1])``.
    """

    epsilon_ladder: tuple
    excised_density: tuple
    thresholds: tuple
    running_density: np.ndarray = field(repr=False)
    M_complement: list = field(repr=False)
    M_density: float = 1.0
    horizon: float = 0.0
    density_tol: float = 0.05
    verdict: str = DENSITY_FAILS

    def M_description(self) -> dict:
        return {"horizon": self.horizon,
                "complement_intervals": [[float(a), float(b)] for a, b in self.M_complement],
                "density": self.M_density}


def _intervals(mask: np.ndarray, times: np.ndarray, dt: float) -> list:
    """Grid cells ``[t_k, t_k + dt)`` with ``mask[k]`` merged into intervals."""
    if not mask.any():
        return []
    padded = np.concatenate([[False], mask, [False]]).astype(np.int8)
    d = np.diff(padded)
    starts, stops = np.flatnonzero(d == 1), np.flatnonzero(d == -1)
    return [(times[a], times[b - 1] + dt) for a, b in zip(starts, stops)]


def density_one_extract(s: Signal, epsilon_ladder=(0.5, 0.25, 0.1, 0.05),
                        density_tol: float = 0.05) -> DensityReport:
    """Build a density-one set ``M`` along which the signal tends to 0.

    For each ``eps`` the set ``{f >= eps}`` is measured with cell indicators
    (cell ``[t_k, t_k + dt)`` counts when ``f(t_k) >= eps``).  Smaller
    ``eps`` are excised only from later times, where their running density
    has settled below ``density_tol``.  The verdict is positive iff every
    threshold exists and lies in the first half of the horizon.
    """
    eps = np.asarray(epsilon_ladder, dtype=float)
    if eps.ndim != 1 or eps.size == 0 or np.any(eps <= 0):
        raise ValidationError("epsilon ladder must be a nonempty list of positive numbers")
    if np.any(np.diff(eps) >= 0):
        raise ValidationError("epsilon ladder must be strictly decreasing")
    v = s.values
    if np.any(np.abs(v.imag) > 0) or np.any(v.real < 0):
        raise ValidationError("density extraction needs a real nonnegative signal; take abs first")
    f = v.real
    g = s.grid
    times = g.times
    elapsed = times - g.t_start
    cells = f[:-1]
    dens = np.empty((eps.size, times.size))
    thresholds, excised = [], []
    for k, e in enumerate(eps):
        cum = np.concatenate([[0.0], np.cumsum(cells >= e) * g.dt])
        d = np.empty_like(cum)
        d[0] = float(f[0] >= e)
        d[1:] = cum[1:] / elapsed[1:]
        dens[k] = d
        above = np.flatnonzero(d > density_tol)
        if above.size == 0:
            tau = g.t_start
        elif above[-1] == times.size - 1:
            tau = None
        else:
            tau = float(times[above[-1] + 1])
        thresholds.append(tau)
        # upper density estimate: sup of the running density over the second half
        excised.append(float(d[times >= g.t_start + 0.5 * (g.t_max - g.t_start)].max()))
    # smaller eps are excised no earlier than larger ones
    mono = []
    for tau in thresholds:
        if tau is None or (mono and mono[-1] is None):
            mono.append(None)
        else:
            mono.append(max(tau, mono[-1]) if mono else tau)
    bounds = [t if t is not None else g.t_max for t in mono] + [g.t_max]
    mask = np.zeros(cells.size, dtype=bool)
    for k, e in enumerate(eps):
        lo, hi = bounds[k], bounds[k + 1]
        mask |= (cells >= e) & (times[:-1] >= lo) & (times[:-1] < hi)
    comp = _intervals(mask, times[:-1], g.dt)
    span = g.t_max - g.t_start
    m_dens = 1.0 - mask.sum() * g.dt / span
    positive = all(t is not None and t < g.t_start + 0.5 * span for t in mono)
    return DensityReport(tuple(eps.tolist()), tuple(excised), tuple(mono), dens, comp, float(m_dens),
                         float(g.t_max), density_tol, DENSITY_ONE if positive else DENSITY_FAILS)


# Cesàro statistic -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CesaroResult:
    running_mean: Signal
    tail: float
    final: float
    tail_fraction: float


def cesaro_from_signal(s: Signal, transform: str = "abs", tail_fraction: float = 0.1) -> CesaroResult:
    rm = running_mean(s, transform)
    t = rm.times
    cut = t[-1] - tail_fraction * (t[-1] - t[0])
    vals = rm.values.real
    return CesaroResult(rm, float(vals[t >= cut].mean()), float(vals[-1]), tail_fraction)


def cesaro_stability_statistic(backend: Semigroup, x, y, grid: TimeGrid,
                               transform: str = "abs", tail_fraction: float = 0.1) -> CesaroResult:
    """Running mean of ``|<T(t)x,y>|``; the tail value averages it over the
    last ``tail_fraction`` of the horizon."""
    if grid.t_start != 0:
        raise ValidationError("Cesàro statistics need a grid starting at t = 0")
    return cesaro_from_signal(weak_orbit(backend, x, y, grid), transform, tail_fraction)


# relatively dense sequences -------------------------------------------------

@dataclass(frozen=True)
class RelativelyDenseReport:
    ell: float
    max_gap: float
    tail_window: tuple
    seq_tail_max: float
    orbit_tail_max: float
    ratio: float
    norm_bound: float
    ratio_within_bound: bool
    hypothesis_holds: bool
    conclusion_holds: bool
    tol: float
    message: str


def _local_norm_bound(backend: Semigroup, ell: float, n: int = 64) -> float:
    """``sup_{0 <= s <= ell} ||T(s)||`` (sampled for matrices, 1 for isometries)."""
    if isinstance(backend, MatrixSemigroup):
        return max(1.0, max(float(np.linalg.norm(expm(s * backend.A), 2))
                            for s in np.linspace(0, ell, n + 1)))
    return 1.0


def relatively_dense_check(backend: Semigroup, x, y, t_sequence, ell: float, tail_window=None,
                           dt: float | None = None, tol: float = 0.05) -> RelativelyDenseReport:
    """Compare ``max |<T(t_n)x,y>|`` with ``max |<T(t)x,y>|`` over a tail window.

    Every interval of length ``ell`` must meet the sequence (gaps, including
    the first element measured from 0, at most ``ell``).  The default window
    runs from the sequence element nearest ``0.9 t_max`` to ``t_max``.
    Smallness is judged relative to ``||x|| ||y||``.
    """
    t = np.asarray(t_sequence, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0) or t[0] < 0:
        raise ValidationError("t_sequence must be increasing, nonnegative, with at least two entries")
    if not ell > 0:
        raise ValidationError("ell must be positive")
    gaps = np.diff(np.concatenate([[0.0], t]))
    bad = np.flatnonzero(gaps > ell * (1 + 1e-12))
    if bad.size:
        i = int(bad[0])
        lo = 0.0 if i == 0 else t[i - 1]
        raise ValidationError(f"sequence is not relatively dense for ell={ell}: gap {gaps[i]:g} "
                              f"between t={lo:g} and t={t[i]:g}")
    if tail_window is None:
        start = t[np.searchsorted(t, 0.9 * t[-1])]
        tail_window = (float(start), float(t[-1]))
    lo, hi = tail_window
    if not hi > lo:
        raise ValidationError("tail window must have positive length")
    in_win = t[(t >= lo) & (t <= hi)]
    if in_win.size == 0:
        raise ValidationError("no sequence element inside the tail window")
    scale = _pair_scale(backend, x, y)
    seq_vals = np.abs(backend.weak_orbit(x, y, in_win)) / scale
    dt = ell / 100 if dt is None else dt
    n = max(1, int(math.ceil((hi - lo) / dt)))
    orb = np.abs(backend.weak_orbit(x, y, np.linspace(lo, hi, n + 1))) / scale
    seq_max, orb_max = float(seq_vals.max()), float(orb.max())
    bound = _local_norm_bound(backend, ell)
    ratio = orb_max / seq_max if seq_max > 0 else (0.0 if orb_max == 0 else math.inf)
    hyp = seq_max <= tol
    concl = orb_max <= tol * bound
    if not hyp:
        msg = "hypothesis fails: the sequence values are not small on the tail window"
    elif concl:
        msg = "sequence smallness carries over to the whole tail window"
    else:
        msg = "sequence small but orbit not: no evidence for the conclusion at this horizon"
    return RelativelyDenseReport(float(ell), float(gaps.max()), (float(lo), float(hi)), seq_max, orb_max,
                                 float(ratio), bound, bool(ratio <= bound * (1 + 1e-9)), bool(hyp), bool(concl),
                                 tol, msg)


# mixing ---------------------------------------------------------------------

@dataclass(frozen=True)
class MonteCarloSampler:
    """Uniform sampler on the flow's phase space with a fixed seed.

    ``box`` lists ``(low, high)`` per coordinate.
    """

    n_samples: int = 10_000
    seed: int = 0
    box: tuple = ((0.0, 1.0),)

    def draw(self) -> np.ndarray:
        if self.n_samples <= 0:
            raise ValidationError("sampler budget must be positive")
        rng = np.random.default_rng(self.seed)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        return lo + (hi - lo) * rng.random((self.n_samples, lo.size))


@dataclass(frozen=True)
class CorrelationEstimate:
    value: float
    stderr: float
    method: str


def _circle_length(intervals) -> float:
    return float(sum(b - a for a, b in intervals))


def _circle_overlap(I, J, shift: float) -> float:
    """Length of ``(I + shift) ∩ J`` on R/Z for finite unions of intervals in [0, 1]."""
    shift = shift % 1.0
    total = 0.0
    for a, b in I:
        for c, d in J:
            for k in (-1.0, 0.0, 1.0):
                total += max(0.0, min(b + shift + k, d) - max(a + shift + k, c))
    return total


def _check_intervals(S, name):
    S = [tuple(map(float, iv)) for iv in S]
    for a, b in S:
        if not 0 <= a <= b <= 1:
            raise ValidationError(f"{name} intervals must lie in [0, 1]")
    return S


def _is_rotation(flow: Flow) -> bool:
    return flow.dim == 1 and tuple(flow.period) == (1.0,) and flow.name.startswith("torus_rotation")


def mixing_correlation(flow: Flow, A_set, B_set, t, sampler: MonteCarloSampler | None = None):
    """``C(t) = mu(phi_t^{-1}(A) ∩ B) - mu(A) mu(B)``.

    For torus rotations with interval sets the overlap is computed exactly.
    Otherwise ``A_set``, ``B_set`` are indicator functions of the state and
    ``sampler`` draws points from ``mu``; the standard error is reported.
    Returns a :class:`CorrelationEstimate` (or a list for array ``t``).
    """
    if np.ndim(t):
        return [mixing_correlation(flow, A_set, B_set, ti, sampler) for ti in np.asarray(t, dtype=float)]
    if t < 0:
        raise ValidationError("t must be nonnegative")
    if sampler is None and _is_rotation(flow) and not callable(A_set):
        A, B = _check_intervals(A_set, "A"), _check_intervals(B_set, "B")
        # phi_t^{-1}(A) = A - alpha t
        ov = _circle_overlap(A, B, -flow.params[0] * t)
        return CorrelationEstimate(ov - _circle_length(A) * _circle_length(B), 0.0, "exact")
    if sampler is None:
        raise ValidationError("non-rotation flows need a Monte-Carlo sampler")
    if not (callable(A_set) and callable(B_set)):
        if _is_rotation(flow):
            A, B = _check_intervals(A_set, "A"), _check_intervals(B_set, "B")
            A_set = _interval_indicator(A)
            B_set = _interval_indicator(B)
        else:
            raise ValidationError("Monte-Carlo correlations need indicator functions")
    pts = sampler.draw()
    moved = np.array([flow.evolve(p, t) for p in pts]) if t > 0 else pts
    if flow.period:
        for j, per in enumerate(flow.period):
            if per:
                moved[:, j] %= per
    ia = np.asarray(A_set(moved), dtype=float)
    ib = np.asarray(B_set(pts), dtype=float)
    ia0 = np.asarray(A_set(pts), dtype=float)
    z = ia * ib - ia0.mean() * ib
    n = pts.shape[0]
    return CorrelationEstimate(float(z.mean()), float(z.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf,
                               "monte-carlo")


def _interval_indicator(intervals):
    def ind(states):
        x = np.atleast_2d(states)[:, 0] % 1.0
        out = np.zeros(x.size, dtype=bool)
        for a, b in intervals:
            out |= (x >= a) & (x < b)
        return out
    return ind


def mixing_cesaro(flow: Flow, A_set, B_set, T: float, dt: float = 1e-3, sampler=None) -> float:
    """``(1/T) int_0^T |C(t)| dt`` by trapezoid."""
    grid = TimeGrid.from_horizon(T, dt)
    c = np.array([e.value for e in mixing_correlation(flow, A_set, B_set, grid.times, sampler)])
    v = np.abs(c)
    return float(grid.dt * (v.sum() - 0.5 * (v[0] + v[-1])) / grid.t_max)


# classification -------------------------------------------------------------

@dataclass(frozen=True)
class ClassifyConfig:
    """Horizons and tolerances of the classifier.

    ``abel_ladder`` defaults to ``1 .. 1e-6`` (frequency route) or to the
    decades ``a <= 1`` with ``a * horizon >= 10`` (time route).  The Abel
    value counts as bounded away from 0 when its local decay exponent over
    the last decade is below ``abel_exponent`` and its normalized value is
    at least ``abel_floor``.
    """

    horizon: float = 1000.0
    dt: float = 0.01
    cesaro_tol: float = 0.05
    recurrence_floor: float = 0.2
    weak_tol: float = 0.05
    tail_fraction: float = 0.1
    abel_ladder: tuple | None = None
    abel_exponent: float = 0.25
    abel_floor: float = 1e-6
    probes: tuple = ()
    tol_im: float = TOL_IM
    abel_route: str = "auto"

    def __post_init__(self):
        if not self.horizon > 0 or not self.dt > 0:
            raise ValidationError("horizon and dt must be positive")
        if self.dt >= self.horizon:
            raise ValidationError("dt must be smaller than the horizon")
        for name in ("cesaro_tol", "recurrence_floor", "weak_tol", "abel_floor"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        if not 0 < self.tail_fraction <= 1:
            raise ValidationError("tail_fraction must lie in (0, 1]")
        if self.abel_route not in ("auto", "frequency", "time"):
            raise ValidationError(f"unknown abel_route {self.abel_route!r}")


@dataclass(eq=False)
class StabilityReport:
    verdict: str
    criteria: dict
    observations: list
    provenance: dict

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "criteria": self.criteria,
                "observations": [{k: v for k, v in o.items() if not k.startswith("_")} for o in self.observations],
                "provenance": self.provenance}


def _pair_scale(backend, x, y) -> float:
    if isinstance(backend, KoopmanSemigroup):
        s = backend.norm(x)
    else:
        s = backend.norm(x) * backend.norm(y)
    return s if s > 0 else 1.0


def _bounded_away(est: LimitEstimate, cfg: ClassifyConfig) -> bool:
    if not est.last >= cfg.abel_floor:
        return False
    return not (est.decay_exponent >= cfg.abel_exponent)


def _frequency_route(backend, cfg) -> bool:
    if cfg.abel_route != "auto":
        return cfg.abel_route == "frequency"
    if isinstance(backend, MatrixSemigroup):
        return True
    return isinstance(backend, MultiplicationSemigroup) and backend.measure.size <= 4096


def _pointwise_frequencies(backend) -> np.ndarray:
    if isinstance(backend, MatrixSemigroup):
        return np.unique(np.concatenate([[0.0], backend.gen.eigenvalues.imag]))
    mu = backend.measure.canonicalize()
    top = mu.locations[np.argsort(-mu.weights, kind="stable")[:16]]
    return np.unique(np.concatenate([[0.0], top]))


def _signal_frequencies(s: Signal, k: int = 8) -> np.ndarray:
    spec = np.abs(np.fft.fft(s.values - s.values.mean()))
    freqs = 2 * np.pi * np.fft.fftfreq(s.values.size, d=s.grid.dt)
    top = freqs[np.argsort(-spec)[:k]]
    return np.unique(np.concatenate([[0.0], top]))


def _weak_pointwise(s: Signal, a: float, freq: float) -> float:
    """``|a int exp(-(a + i freq) t) <T(t)x,y> dt|`` from the sampled orbit."""
    v = np.exp(-(a + 1j * freq) * s.times) * s.values
    return float(abs(a * s.grid.dt * (v.sum() - 0.5 * (v[0] + v[-1]))))


def classify(backend: Semigroup, observations, config: ClassifyConfig | None = None) -> StabilityReport:
    """Aggregate orbit and resolvent evidence into a verdict.

    Per observation pair: Cesàro tail of ``|orbit|``, the Abel ladder
    ``a int |<R(a+is)x,y>|^2 ds``, pointwise values ``||a R(a+is)x||`` at
    candidate frequencies, and a recurrence value (the larger of the
    trailing-window orbit supremum and the adversarial probe values).  All
    quantities are normalized by ``||x|| ||y||``.

    Verdicts, in order: not-almost-weak when an imaginary eigenvalue is found
    or an Abel value stays bounded away from 0; weak-stability evidence
    when the recurrence value is below ``weak_tol``; almost-weak-only
    evidence when the Cesàro tail is below ``cesaro_tol`` and the
    recurrence value is at least ``recurrence_floor``; otherwise
    inconclusive.  Across pairs the strongest negative finding wins.
    """
    cfg = config or ClassifyConfig()
    observations = list(observations)
    if not observations:
        raise ValidationError("classify needs at least one observation pair")
    grid = TimeGrid.from_horizon(cfg.horizon, cfg.dt)
    if isinstance(backend, MatrixSemigroup):
        cert = backend.gen.certificate(cfg.tol_im)
        if not cert.bounded:
            # orbits may grow without bound and resolvents are singular on the ladder lines
            return StabilityReport(
                INCONCLUSIVE,
                {"cesaro_abs_tail": None, "abel_square_tail": None, "pointwise_abel_max": None,
                 "imaginary_eigen_count": int(backend.gen.imaginary_eigenvalues(cfg.tol_im).size),
                 "recurrence_floor": None},
                [],
                {"backend": type(backend).__name__, "horizon": grid.t_max, "dt": grid.dt,
                 "note": f"boundedness certificate fails (max Re = {cert.max_real_part:.6g}, "
                         f"defective imaginary eigenvalues {len(cert.defective)})",
                 "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(cfg).items()}})
    freq_route = _frequency_route(backend, cfg)
    if cfg.abel_ladder is not None:
        ladder = tuple(float(a) for a in cfg.abel_ladder)
    elif freq_route:
        ladder = tuple(10.0 ** -k for k in range(7))
    else:
        ladder = tuple(a for a in (10.0 ** -k for k in range(7)) if a * grid.t_max >= 10)
    if len(ladder) < 2:
        raise ValidationError("Abel ladder needs at least two values; increase the horizon")
    probe = ResolventProbe(backend) if freq_route else None
    imag_count = None
    if isinstance(backend, MatrixSemigroup):
        imag_count = int(backend.gen.imaginary_eigenvalues(cfg.tol_im).size)

    per_obs = []
    for x, y in observations:
        scale = _pair_scale(backend, x, y)
        sig = weak_orbit(backend, x, y, grid)
        norm_sig = Signal(grid, sig.values / scale)
        ces = cesaro_from_signal(norm_sig, "abs", cfg.tail_fraction)
        cut = grid.t_max - cfg.tail_fraction * grid.t_max
        trailing = float(np.abs(norm_sig.values[grid.times >= cut]).max())
        probes = np.asarray(cfg.probes, dtype=float)
        probe_vals = (np.abs(backend.weak_orbit(x, y, probes)) / scale).tolist() if probes.size else []
        recurrence = max([trailing] + probe_vals)

        if freq_route:
            abel = [abel_square_integral(probe, x, y, a, method="frequency") / scale**2 for a in ladder]
            freqs = _pointwise_frequencies(backend)
            xn = backend.norm(x) or 1.0
            pw = np.array([[abel_pointwise(probe, x, a, f) / xn for a in ladder] for f in freqs])
        else:
            abel = [abel_square_from_signal(norm_sig, a) for a in ladder]
            freqs = _signal_frequencies(norm_sig)
            pw = np.array([[_weak_pointwise(norm_sig, a, f) for a in ladder] for f in freqs])
        abel_est = limit_estimate(ladder, abel)
        pw_ests = [limit_estimate(ladder, row) for row in pw]
        abel_away = _bounded_away(abel_est, cfg)
        pw_away = [float(f) for f, e in zip(freqs, pw_ests) if _bounded_away(e, cfg)]

        if (imag_count or 0) > 0 or abel_away or pw_away:
            verdict = NOT_ALMOST_WEAK
        elif recurrence < cfg.weak_tol:
            verdict = WEAK
        elif ces.tail < cfg.cesaro_tol and recurrence >= cfg.recurrence_floor:
            verdict = ALMOST_WEAK_ONLY
        else:
            verdict = INCONCLUSIVE
        per_obs.append({
            "verdict": verdict,
            "scale": scale,
            "cesaro_abs_tail": ces.tail,
            "cesaro_abs_final": ces.final,
            "trailing_sup": trailing,
            "probe_values": [[float(t), v] for t, v in zip(probes, probe_vals)],
            "recurrence_floor": recurrence,
            "abel_ladder": list(ladder),
            "abel_values": [float(v) for v in abel],
            "abel_square_tail": abel_est.last,
            "abel_richardson": abel_est.richardson,
            "abel_decay_exponent": abel_est.decay_exponent,
            "abel_bounded_away": abel_away,
            "pointwise_frequencies": [float(f) for f in freqs],
            "pointwise_abel_max": float(pw[:, -1].max()),
            "pointwise_bounded_away_at": pw_away,
            "_signal": sig,
            "_running_mean": ces.running_mean,
        })

    rank = {NOT_ALMOST_WEAK: 3, ALMOST_WEAK_ONLY: 2, INCONCLUSIVE: 1, WEAK: 0}
    verdict = max((o["verdict"] for o in per_obs), key=rank.__getitem__)
    criteria = {
        "cesaro_abs_tail": max(o["cesaro_abs_tail"] for o in per_obs),
        "abel_square_tail": max(o["abel_square_tail"] for o in per_obs),
        "pointwise_abel_max": max(o["pointwise_abel_max"] for o in per_obs),
        "imaginary_eigen_count": imag_count,
        "recurrence_floor": min(o["recurrence_floor"] for o in per_obs)
        if verdict == ALMOST_WEAK_ONLY else max(o["recurrence_floor"] for o in per_obs),
    }
    provenance = {
        "backend": type(backend).__name__,
        "horizon": grid.t_max,
        "dt": grid.dt,
        "abel_route": "frequency" if freq_route else "time",
        "s_truncation": probe.s_max if probe is not None else None,
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(cfg).items()},
    }
    return StabilityReport(verdict, criteria, per_obs, provenance)
