"""Acceptance criteria as runnable checks.

Each ``criterion_N`` returns a :class:`CriterionResult` with the measured
values next to their thresholds.  Used by ``semistab check`` and by the
test suite.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import subspace_angles

from .backends import (Bump, DiscreteMeasure, KoopmanSemigroup, MatrixGenerator, MatrixSemigroup,
                       MultiplicationSemigroup, cayley, cogenerator_of, foguel_split, homoclinic,
                       homoclinic_radius, jgdl_split, mean_ergodic_projection, torus_rotation)
from .core import Signal, TimeGrid, running_mean
from .diagnostics import (ALMOST_WEAK_ONLY, ClassifyConfig, _bounded_away, classify, mixing_cesaro,
                          mixing_correlation, weak_orbit)
from .measures import cantor_probe_floor, cantor_probe_times, fourier_transform
from .resolvent import (ResolventProbe, abel_pointwise, abel_square_integral, chill_tomilov_integrals,
                        inverse_laplace_orbit, limit_estimate, plancherel_check)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    runtime: float = 0.0
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        lims = ", ".join(f"{k}{_fmt(v) if not isinstance(v, str) else v}" for k, v in self.thresholds.items())
        out = f"[{status}] criterion {self.number} {self.name}: {parts} | thresholds: {lims} | {self.runtime:.1f}s"
        return out + (f" | {self.note}" if self.note else "")


def _fmt(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(u) for u in v) + "]"
    return str(v)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.runtime = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# random instance families ---------------------------------------------------

def random_stable_generator(rng, n=5, re_range=(-2.0, -0.1), im_range=(-3.0, 3.0), seed_imag=False):
    """``V diag(lam) V^{-1}`` with Gaussian ``V``; optionally one eigenvalue
    replaced by ``i w``, ``w`` uniform in [-2, 2].  Returns ``(A, w)``."""
    lam = rng.uniform(*re_range, n) + 1j * rng.uniform(*im_range, n)
    w = float(rng.uniform(-2, 2))
    if seed_imag:
        lam[0] = 1j * w
    V = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return V @ np.diag(lam) @ np.linalg.inv(V), w


def random_unitary(rng, n):
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def planted_contraction(rng, n, k, shift):
    """``U diag(i w_1..i w_k, K - (B B* + shift I)) U*`` with ``K`` skew-Hermitian.

    Returns ``(A, U, omegas)``; the first ``k`` columns of ``U`` span the
    unitary part.
    """
    m = n - k
    Bm = 0.5 * (rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)))
    Km = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    Km = 0.5 * (Km - Km.conj().T)
    stable = Km - (Bm @ Bm.conj().T + shift * np.eye(m))
    omegas = rng.uniform(-2, 2, k)
    D = np.zeros((n, n), dtype=complex)
    D[:k, :k] = np.diag(1j * omegas)
    D[k:, k:] = stable
    U = random_unitary(rng, n)
    return U @ D @ U.conj().T, U, omegas


def _random_vec(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


# criteria ---------------------------------------------------------------------

@_timed
def criterion_1(depth=20, horizon=1e4, dt=0.01):
    """Cantor measure: small Cesàro mean together with a recurrence floor."""
    mu = DiscreteMeasure.cantor(depth)
    B = MultiplicationSemigroup(mu)
    one = B.ones()
    grid = TimeGrid.from_horizon(horizon, dt)
    rm = running_mean(weak_orbit(B, one, one, grid)).values.real
    checkpoints = [rm[grid.n_steps // 4], rm[grid.n_steps // 2], rm[-1]]
    nonincreasing = all(b <= a for a, b in zip(checkpoints, checkpoints[1:]))
    probes = cantor_probe_times(6)
    probe_vals = np.abs(fourier_transform(mu, probes))
    rep = classify(B, [(one, one)], ClassifyConfig(horizon=horizon, dt=dt, probes=tuple(probes)))
    passed = bool(rm[-1] <= 0.05 and nonincreasing and probe_vals.min() >= 0.2
                  and np.all(np.abs(probe_vals - cantor_probe_floor()) <= 2e-3) and rep.verdict == ALMOST_WEAK_ONLY)
    return CriterionResult(1, "Cantor dichotomy", passed,
                           {"running_mean_T": float(rm[-1]), "checkpoints_T/4,T/2,T": checkpoints,
                            "min_probe": float(probe_vals.min()), "verdict": rep.verdict},
                           {"running_mean_T<=": 0.05, "min_probe>=": 0.2, "verdict=": ALMOST_WEAK_ONLY})


@_timed
def criterion_2(n_instances=20, seed=2):
    """Plancherel identity on random stable 5x5 generators."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        A, _ = random_stable_generator(rng)
        probe = ResolventProbe(MatrixSemigroup(MatrixGenerator(A)))
        x, y = _random_vec(rng, 5), _random_vec(rng, 5)
        for a in (1.0, 0.1):
            worst = max(worst, plancherel_check(probe, x, y, a).rel_error)
    return CriterionResult(2, "Plancherel identity", bool(worst <= 1e-3),
                           {"worst_rel_error": worst, "instances": n_instances}, {"rel_error<=": 1e-3})


def abel_ladder_verdict(A, x, y, omega, ladder=tuple(10.0 ** -k for k in range(7))):
    """Abel evidence for an imaginary eigenvalue: the square-integral ladder
    and the pointwise ladder at ``omega`` both stay bounded away from 0."""
    probe = ResolventProbe(MatrixSemigroup(MatrixGenerator(A)))
    scale = np.linalg.norm(x) * np.linalg.norm(y)
    cfg = ClassifyConfig()
    sq = limit_estimate(ladder, [abel_square_integral(probe, x, y, a) / scale**2 for a in ladder])
    pw = limit_estimate(ladder, [abel_pointwise(probe, x, a, omega) / np.linalg.norm(x) for a in ladder])
    return _bounded_away(sq, cfg), _bounded_away(pw, cfg), sq, pw


@_timed
def criterion_3(n_instances=20, seed=3):
    """Abel ladders agree with the eigenvalue scan; scalar closed forms."""
    rng = np.random.default_rng(seed)
    agree = 0
    for i in range(n_instances):
        A, w = random_stable_generator(rng, seed_imag=(i % 2 == 0))
        x, y = _random_vec(rng, 5), _random_vec(rng, 5)
        sq_away, pw_away, _, _ = abel_ladder_verdict(A, x, y, w)
        has_imag = MatrixGenerator(A).imaginary_eigenvalues().size > 0
        agree += int(sq_away == pw_away == has_imag)
    scalar_err = 0.0
    for a in (0.1, 0.01, 0.001):
        p1 = ResolventProbe(MatrixSemigroup(MatrixGenerator([[-1.0]])))
        scalar_err = max(scalar_err, abs(abel_square_integral(p1, [1], [1], a) - math.pi * a / (a + 1)))
        p2 = ResolventProbe(MatrixSemigroup(MatrixGenerator([[1j]])))
        scalar_err = max(scalar_err, abs(abel_square_integral(p2, [1], [1], a) - math.pi))
    return CriterionResult(3, "eigenvalue detection chain", bool(agree == n_instances and scalar_err <= 1e-3),
                           {"agreements": f"{agree}/{n_instances}", "scalar_max_error": scalar_err},
                           {"agreements=": "all", "scalar_error<=": 1e-3})


@_timed
def criterion_4(seed=4):
    """Double resolvent integrals and inverse-Laplace reconstruction."""
    rng = np.random.default_rng(seed)
    p1 = ResolventProbe(MatrixSemigroup(MatrixGenerator([[-1.0]])))
    ct = chill_tomilov_integrals(p1, [1], [1])
    err_double = abs(ct.double_integral - math.pi * math.log(2))
    instances = [(np.array([[-1.0]]), np.ones(1), np.ones(1)),
                 (np.array([[1j]]), np.ones(1), np.ones(1)),
                 (np.diag([1j, -1]), np.ones(2) / math.sqrt(2), np.ones(2) / math.sqrt(2))]
    for _ in range(3):
        A, _ = random_stable_generator(rng)
        instances.append((A, _random_vec(rng, 5), _random_vec(rng, 5)))
    monotone = ct.monotone
    worst_inv = 0.0
    for A, x, y in instances:
        B = MatrixSemigroup(MatrixGenerator(A))
        probe = ResolventProbe(B)
        monotone &= chill_tomilov_integrals(probe, x, y, a_grid=np.logspace(-3, 0, 13)).monotone
        for t in (1.0, 2.0, 5.0):
            direct = B.pair(B.apply(t, x), y)
            worst_inv = max(worst_inv, abs(inverse_laplace_orbit(probe, x, y, t) - direct))
    passed = bool(err_double <= 1e-2 and monotone and worst_inv <= 1e-4)
    return CriterionResult(4, "resolvent-square integrals", passed,
                           {"double_integral": ct.double_integral, "I_nonincreasing": monotone,
                            "inverse_laplace_max_error": worst_inv},
                           {"|double - pi ln2|<=": 1e-2, "inverse_laplace_error<=": 1e-4})


@_timed
def criterion_5(n_instances=20, seed=5, n=5):
    """Foguel splitting recovers the planted unitary part."""
    rng = np.random.default_rng(seed)
    worst_angle = worst_norm = worst_decay = 0.0
    times = np.linspace(0, 20, 41)
    for i in range(n_instances):
        k = 1 + i % 2
        A, U, _ = planted_contraction(rng, n, k, shift=0.5)
        split = foguel_split(A)
        planted = U[:, :k]
        if split.W_perp_basis.shape[1] != k:
            worst_angle = math.inf
            continue
        worst_angle = max(worst_angle, float(np.max(subspace_angles(split.W_perp_basis, planted))))
        B = MatrixSemigroup(MatrixGenerator(A))
        xr = split.W_perp_basis @ _random_vec(rng, k)
        norms = np.linalg.norm(B.orbit(xr, times), axis=1)
        worst_norm = max(worst_norm, float(np.ptp(norms) / np.linalg.norm(xr)))
        xs = U[:, k:] @ _random_vec(rng, n - k)
        xs /= np.linalg.norm(xs)
        worst_decay = max(worst_decay, abs(B.pair(B.apply(20.0, xs), xs)))
    passed = bool(worst_angle <= 1e-7 and worst_norm <= 1e-8 and worst_decay <= 1e-3)
    return CriterionResult(5, "Foguel splitting", passed,
                           {"max_principal_angle": worst_angle, "max_norm_variation": worst_norm,
                            "max_|<T(20)x,x>|": worst_decay},
                           {"angle<=": 1e-7, "norm_variation<=": 1e-8, "decay<=": 1e-3})


def return_peaks(s: Signal, level=0.5):
    """Start times of excursions of ``|s|`` above ``level``."""
    above = np.abs(s.values) >= level
    starts = np.flatnonzero(above[1:] & ~above[:-1]) + 1
    if above[0]:
        starts = np.concatenate([[0], starts])
    return s.times[starts]


@_timed
def criterion_6(horizon=2000.0, dt=0.01, x0=(0.5, 0.0)):
    """Homoclinic flow: RK4 accuracy, decaying Cesàro mean, recurring peaks."""
    flow = homoclinic(1e-3)
    g20 = TimeGrid.from_horizon(20.0, dt)
    states, _ = flow.trajectory(list(x0), g20)
    r_err = float(np.abs(states[:, 0] - homoclinic_radius(x0[0], g20.times)).max())
    K = KoopmanSemigroup(flow)
    grid = TimeGrid.from_horizon(horizon, dt)
    sig = K.observe(Bump(), list(x0), grid)
    rm = running_mean(sig).values.real
    checkpoints = [rm[grid.n_steps // 4], rm[grid.n_steps // 2], rm[-1]]
    trending = all(b <= a for a, b in zip(checkpoints, checkpoints[1:]))
    part_a = bool(rm[-1] < 0.1 and trending)
    peaks = return_peaks(sig)
    if peaks.size >= 2:
        period = float(np.median(np.diff(peaks)))
        late = peaks[peaks >= horizon / 2]
        edges = np.concatenate([[horizon / 2], late, [horizon]])
        part_b = bool(late.size > 0 and np.max(np.diff(edges)) <= period)
    else:
        period, part_b = float("nan"), False
    passed = bool(r_err <= 1e-6 and part_a and part_b)
    note = "" if part_b else (f"{peaks.size} excursion(s) above 0.5, last at t={peaks[-1]:.2f}; "
                              "no recurrence in [T/2, T]" if peaks.size else "no excursion above 0.5")
    return CriterionResult(6, "homoclinic flow", passed,
                           {"r_max_error": r_err, "running_mean_T": float(rm[-1]), "(a)": part_a,
                            "return_period": period, "(b)": part_b},
                           {"r_error<=": 1e-6, "running_mean<": 0.1, "(b)": "peak>=0.5 every period in [T/2,T]"},
                           note=note)


def _plateau(values_at, start, grow, tol=1e-6, max_iter=40):
    """Double the argument until consecutive values agree within ``tol``."""
    arg, prev = start, values_at(start)
    for _ in range(max_iter):
        arg = grow(arg)
        cur = values_at(arg)
        if abs(cur - prev) <= tol:
            return arg, cur
        prev = cur
    return arg, cur


@_timed
def criterion_7(n_instances=20, seed=7, n=5):
    """Cogenerator: matched limits of ``||T(t)x||`` and ``||G^n x||``; spectral mapping."""
    rng = np.random.default_rng(seed)
    worst_gap = worst_map = 0.0
    equivalence = True
    for i in range(n_instances):
        k = i % 3
        A, _, _ = planted_contraction(rng, n, k, shift=0.2)
        gen = MatrixGenerator(A)
        B = MatrixSemigroup(gen)
        G = cogenerator_of(gen)
        x = _random_vec(rng, n)
        x /= np.linalg.norm(x)
        _, t_norm = _plateau(lambda t: np.linalg.norm(B.apply(t, x)), 1.0, lambda t: 2 * t)
        _, g_norm = _plateau(lambda m: np.linalg.norm(G.power(int(m)) @ x), 1, lambda m: 2 * m)
        worst_gap = max(worst_gap, abs(t_norm - g_norm))
        lam, mu = gen.eigenvalues, G.eigenvalues
        mapped = cayley(lam)
        dist = np.abs(mapped[:, None] - mu[None, :])
        worst_map = max(worst_map, float(dist.min(axis=1).max()))
        for lv in lam:
            m_abs = np.abs(mu[np.argmin(np.abs(mu - cayley(lv)))])
            equivalence &= (abs(m_abs - 1) <= 1e-8) == (abs(lv.real) <= 1e-8)
    passed = bool(worst_gap <= 0.02 and worst_map <= 1e-8 and equivalence)
    return CriterionResult(7, "cogenerator transfer", passed,
                           {"max_norm_gap": worst_gap, "max_spectral_map_error": worst_map,
                            "unit_circle_iff_imaginary": equivalence},
                           {"norm_gap<=": 0.02, "map_error<=": 1e-8})


@_timed
def criterion_8():
    """Torus rotation correlations: exact triangular wave, Cesàro mean 1/8."""
    flow = torus_rotation(1.0)
    A = B = [(0.0, 0.5)]
    t = np.linspace(0, 10, 2001)
    c = np.array([e.value for e in mixing_correlation(flow, A, B, t)])
    wave = 0.25 - np.abs(t - np.round(t))
    err = float(np.abs(c - wave).max())
    mean = mixing_cesaro(flow, A, B, 100.0)
    weakly_mixing = mean < 1e-3
    passed = bool(err <= 1e-10 and abs(mean - 0.125) <= 1e-3 and not weakly_mixing)
    return CriterionResult(8, "mixing diagnostics", passed,
                           {"triangular_wave_error": err, "cesaro_|C|": mean,
                            "report": "weakly mixing" if weakly_mixing else "not weakly mixing"},
                           {"wave_error<=": 1e-10, "|mean - 1/8|<=": 1e-3})


@_timed
def criterion_9():
    """Mean ergodic projection for diag(0, i, -1)."""
    gen = MatrixGenerator(np.diag([0, 1j, -1]))
    devs, ok = [], True
    for T in (50.0, 100.0, 200.0):
        res = mean_ergodic_projection(gen, T)
        devs.append(res.deviation)
        ok &= res.deviation <= 3 / T and np.allclose(res.P_exact, np.diag([1, 0, 0]), atol=1e-12)
    return CriterionResult(9, "mean ergodic projection", bool(ok),
                           {"deviation_T=50,100,200": devs}, {"deviation<=": "3/T"})


@_timed
def criterion_10(seed=10):
    """Weak orbit equals the Fourier transform; classify is scale invariant."""
    mu = DiscreteMeasure.cantor(20)
    B = MultiplicationSemigroup(mu)
    one = B.ones()
    grid = TimeGrid.from_horizon(1000.0, 0.01)
    orbit_err = float(np.abs(weak_orbit(B, one, one, grid).values - fourier_transform(mu, grid.times)).max())
    rng = np.random.default_rng(seed)
    A, _ = random_stable_generator(rng)
    cases = [
        (MatrixSemigroup(MatrixGenerator(-np.eye(2))), np.array([1.0, 0.5]), np.array([0.3, 1.0]), ClassifyConfig()),
        (MatrixSemigroup(MatrixGenerator(np.diag([1j, -1]))), np.array([1.0, 0]), np.array([1.0, 0]),
         ClassifyConfig()),
        (MatrixSemigroup(MatrixGenerator(A)), _random_vec(rng, 5), _random_vec(rng, 5), ClassifyConfig()),
        (B, one, one, ClassifyConfig(horizon=2000.0, probes=tuple(cantor_probe_times(6)))),
        (MultiplicationSemigroup(DiscreteMeasure.from_atoms([[1, 0.5], [-1, 0.5]])), np.ones(2), np.ones(2),
         ClassifyConfig()),
    ]
    invariant, verdicts = True, []
    for backend, x, y, cfg in cases:
        base = classify(backend, [(x, y)], cfg).verdict
        verdicts.append(base)
        for cx, cy in ((1e-3, 7.0), (2 - 3j, 0.5j), (-4.0, 1e2)):
            invariant &= classify(backend, [(cx * x, cy * y)], cfg).verdict == base
    passed = bool(orbit_err <= 1e-12 and invariant)
    return CriterionResult(10, "cross-module coherence", passed,
                           {"orbit_vs_fourier_max": orbit_err, "scale_invariant": invariant, "verdicts": verdicts},
                           {"orbit_error<=": 1e-12})


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


def run_suite(suite: str = "fast", out=print) -> list[CriterionResult]:
    """``fast`` runs every criterion at its stated size; ``full`` repeats the
    randomized criteria on three further seeds."""
    results = []
    for i, fn in CRITERIA.items():
        res = fn()
        out(res.line())
        results.append(res)
    if suite == "full":
        for i, fn in ((2, criterion_2), (3, criterion_3), (5, criterion_5), (7, criterion_7)):
            for s in (101, 202, 303):
                res = fn(seed=s)
                res.note = (res.note + f" seed={s}").strip()
                out(res.line())
                results.append(res)
    return results
