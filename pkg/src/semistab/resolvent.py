"""Resolvents ``R(lam, A) = (lam - A)^{-1}`` and the stability functionals
built from them on vertical lines ``lam = a + is``, ``a > 0``.

Improper frequency integrals are truncated at ``|s| = S_max`` and receive
an analytic ``1/s^2`` tail correction ``g(S_max) * S_max`` at each end.
Frequency grids are graded around the resolvent's poles with
``s = c + w sinh(u)``, ``u`` uniform, where ``c`` is the pole's imaginary
part and ``w`` its distance to the line of integration.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .backends.koopman import KoopmanSemigroup
from .backends.matrix import MatrixGenerator, MatrixSemigroup
from .backends.multiplication import DiscreteMeasure, MultiplicationSemigroup
from .core import NumericalError, Semigroup, Signal, TimeGrid, ValidationError, as_vector

MODES = ("closed_form", "linear_solve", "laplace_quadrature")
# Koopman resolvents by quadrature only this far right of the imaginary axis
KOOPMAN_MIN_RE = 0.1


@dataclass(frozen=True)
class LimitEstimate:
    """Finite evidence for ``lim_{p -> 0} v(p)`` along a decreasing ladder."""

    params: tuple
    values: tuple
    last: float
    richardson: float
    monotone: bool
    decay_exponent: float


def limit_estimate(params, values) -> LimitEstimate:
    """Last value, linear Richardson extrapolation to ``p = 0`` from the last
    two points, monotone-trend flag, and the local exponent ``q`` in ``v ~ p^q``."""
    p = np.asarray(params, dtype=float)
    v = np.asarray(values, dtype=float)
    order = np.argsort(-p)
    p, v = p[order], v[order]
    if p.size < 2:
        return LimitEstimate(tuple(map(float, p)), tuple(map(float, v)), float(v[-1]), float(v[-1]), True, float("nan"))
    p1, p2, v1, v2 = p[-2], p[-1], v[-2], v[-1]
    rich = float(v2 - (v1 - v2) * p2 / (p1 - p2))
    d = np.diff(v)
    monotone = bool(np.all(d <= 1e-12 * np.abs(v[:-1]).max()) or np.all(d >= -1e-12 * np.abs(v[:-1]).max()))
    if v1 > 0 and v2 > 0:
        expo = float(math.log(v1 / v2) / math.log(p1 / p2))
    else:
        expo = float("nan")
    return LimitEstimate(tuple(map(float, p)), tuple(map(float, v)), float(v2), rich, monotone, expo)


def s0_estimate(backend_or_gen) -> float:
    """Abscissa of uniform boundedness of the resolvent.

    For matrices this is ``max Re sigma(A)``; multiplication and Koopman
    semigroups here are isometric, so 0.
    """
    if isinstance(backend_or_gen, MatrixSemigroup):
        backend_or_gen = backend_or_gen.gen
    if isinstance(backend_or_gen, (MatrixGenerator, np.ndarray, list)):
        gen = backend_or_gen if isinstance(backend_or_gen, MatrixGenerator) else MatrixGenerator(backend_or_gen)
        return float(gen.eigenvalues.real.max())
    if isinstance(backend_or_gen, (MultiplicationSemigroup, KoopmanSemigroup)):
        return 0.0
    raise ValidationError(f"no s0 estimate for {type(backend_or_gen).__name__}")


@dataclass(frozen=True)
class LaplaceResult:
    value: np.ndarray | complex
    tail_bound: float
    quadrature_error: float


@dataclass(frozen=True, eq=False)
class ResolventProbe:
    """Resolvent evaluator for a backend.

    ``mode`` defaults to ``linear_solve`` (matrix), ``closed_form``
    (multiplication) or ``laplace_quadrature`` (Koopman).  ``s_truncation``
    defaults to ``50 * (1 + ||A||)``.
    """

    backend: Semigroup
    mode: str | None = None
    s_truncation: float | None = None
    ds: float | None = None
    laplace_horizon: float = 50.0
    laplace_dt: float = 1e-3
    laplace_tol: float = 1e-8

    def __post_init__(self):
        b = self.backend
        mode = self.mode
        if mode is None:
            mode = {MatrixSemigroup: "linear_solve", MultiplicationSemigroup: "closed_form"}.get(
                type(b), "laplace_quadrature")
        if mode not in MODES:
            raise ValidationError(f"unknown resolvent mode {mode!r}")
        if mode == "linear_solve" and not isinstance(b, MatrixSemigroup):
            raise ValidationError("linear_solve mode needs a matrix backend")
        if mode == "closed_form" and not isinstance(b, MultiplicationSemigroup):
            raise ValidationError("closed_form mode needs a multiplication backend")
        object.__setattr__(self, "mode", mode)

    @property
    def generator_norm(self) -> float:
        b = self.backend
        if isinstance(b, MatrixSemigroup):
            return b.gen.norm
        if isinstance(b, MultiplicationSemigroup):
            return float(np.abs(b.measure.locations).max())
        return 0.0

    @property
    def s_max(self) -> float:
        if self.s_truncation is not None:
            return float(self.s_truncation)
        return 50.0 * (1.0 + self.generator_norm)

    def _check_lam(self, lam):
        lam = np.asarray(lam, dtype=complex)
        if np.any(lam.real <= 0):
            raise ValidationError("resolvent functionals are evaluated at Re lam > 0 only")
        if isinstance(self.backend, KoopmanSemigroup) and np.any(lam.real < KOOPMAN_MIN_RE):
            raise ValidationError(f"Koopman resolvents need Re lam >= {KOOPMAN_MIN_RE}")
        return lam

    # batched evaluation ------------------------------------------------

    def vectors(self, lams, x, power: int = 1) -> np.ndarray:
        """``R(lam)^power x`` for each ``lam``; shape ``(len(lams), dim)``."""
        lams = np.atleast_1d(self._check_lam(lams))
        b = self.backend
        if self.mode == "linear_solve":
            x = as_vector(x)
            A = b.A
            out = np.empty((lams.size, b.dim), dtype=complex)
            eye = np.eye(b.dim)
            chunk = max(1, 200_000 // (b.dim * b.dim))
            for start in range(0, lams.size, chunk):
                lam = lams[start:start + chunk]
                M = lam[:, None, None] * eye - A
                with np.errstate(all="raise"):
                    try:
                        v = np.broadcast_to(x, (lam.size, b.dim))[..., None]
                        for _ in range(power):
                            # same matrix each pass: R^2 is two successive solves
                            v = np.linalg.solve(M, v)
                    except (np.linalg.LinAlgError, FloatingPointError) as exc:
                        raise NumericalError("singular resolvent solve: lam is in the spectrum") from exc
                out[start:start + chunk] = v[..., 0]
            return out
        if self.mode == "closed_form":
            f = b._check(x)
            r = b.measure.locations
            return f / (lams[:, None] - 1j * r) ** power
        return np.array([self.laplace(lam, x, power=power).value for lam in lams])

    def pairs(self, lams, x, y, power: int = 1) -> np.ndarray:
        """``<R(lam)^power x, y>`` for each ``lam``."""
        lams = np.atleast_1d(self._check_lam(lams))
        b = self.backend
        if self.mode == "linear_solve":
            y = as_vector(y, "y")
            return self.vectors(lams, x, power) @ y.conj()
        if self.mode == "closed_form":
            f, g = b._check(x), b._check(y, "g")
            coeff = b.measure.weights * f * g.conj()
            r = b.measure.locations
            out = np.empty(lams.size, dtype=complex)
            chunk = max(1, (1 << 22) // r.size)
            for start in range(0, lams.size, chunk):
                lam = lams[start:start + chunk]
                out[start:start + chunk] = (1.0 / (lam[:, None] - 1j * r) ** power) @ coeff
            return out
        signal = self._laplace_signal(x, y)
        return np.array([self._laplace_scalar(signal, lam, power, b.norm(x) * _ynorm(b, y))[0]
                         for lam in lams])

    # Laplace quadrature --------------------------------------------------

    def _grid(self) -> TimeGrid:
        n = 4 * int(math.ceil(self.laplace_horizon / self.laplace_dt / 4))
        return TimeGrid(dt=self.laplace_horizon / n, n_steps=n)

    def _laplace_signal(self, x, y) -> Signal:
        grid = self._grid()
        return Signal(grid, self.backend.weak_orbit(x, y, grid.times))

    def _bound_M(self, x=None) -> float:
        b = self.backend
        if b.capabilities.is_contractive_claimed or isinstance(b, KoopmanSemigroup):
            return 1.0
        if isinstance(b, MatrixSemigroup):
            grid = self._grid()
            coarse = grid.times[:: max(1, grid.n_steps // 200)]
            return max(1.0, max(np.linalg.norm(b.operator(t), 2) for t in coarse))
        return 1.0

    def _laplace_weights(self, lam, power, grid):
        t = grid.times
        return np.exp(-lam * t) * t ** (power - 1) / math.factorial(power - 1)

    def _tail(self, lam, power, H, scale):
        a = lam.real
        if power == 1:
            tail = math.exp(-a * H) / a
        else:
            # int_H^inf t^(p-1)/(p-1)! e^{-at} dt, p = 2
            tail = math.exp(-a * H) * (H / a + 1.0 / a**2)
        return scale * self._bound_M() * tail

    def _integrate(self, values, grid):
        """Richardson-corrected trapezoid on steps h, 2h, 4h; the error
        estimate compares the corrected values at h and 2h."""
        def trap(v, h):
            return h * (v.sum(axis=0) - 0.5 * (v[0] + v[-1]))

        t1, t2 = trap(values, grid.dt), trap(values[::2], 2 * grid.dt)
        r1 = t1 + (t1 - t2) / 3.0
        if grid.n_steps % 4:
            return r1, np.abs(t1 - t2) / 3.0
        t4 = trap(values[::4], 4 * grid.dt)
        r2 = t2 + (t2 - t4) / 3.0
        return r1, np.abs(r1 - r2) / 15.0

    def _laplace_scalar(self, signal: Signal, lam, power, scale):
        weights = self._laplace_weights(lam, power, signal.grid)
        val, err = self._integrate(weights * signal.values, signal.grid)
        return complex(val), self._tail(lam, power, signal.grid.t_max, scale), float(err)

    def laplace(self, lam, x, power: int = 1) -> LaplaceResult:
        """``int_0^H exp(-lam t) t^(p-1)/(p-1)! T(t)x dt`` with the tail bound
        ``||x|| M exp(-Re lam H) / Re lam`` (``p = 1``) and a quadrature error estimate."""
        lam = complex(self._check_lam(lam))
        b = self.backend
        if isinstance(b, KoopmanSemigroup):
            raise ValidationError("Koopman resolvents are available against point functionals only; use pairs()")
        grid = self._grid()
        states = b.orbit(x, grid.times)
        weights = self._laplace_weights(lam, power, grid)
        val, err = self._integrate(weights[:, None] * states, grid)
        tail = self._tail(lam, power, grid.t_max, b.norm(x))
        return LaplaceResult(val, tail, float(np.linalg.norm(err)))

    # frequency grids ---------------------------------------------------

    def poles(self, a: float) -> tuple[np.ndarray, np.ndarray]:
        """Centers and widths of the integrand's peaks on the line ``Re lam = a``."""
        b = self.backend
        if isinstance(b, MatrixSemigroup):
            ev = b.gen.eigenvalues
            return ev.imag, a - np.minimum(ev.real, 0.0)
        if isinstance(b, MultiplicationSemigroup):
            r = np.unique(b.measure.locations)
            if r.size <= 64:
                return r, np.full(r.size, a)
            lo, hi = r.min(), r.max()
            n = int(min(20_000, max(2, (hi - lo) / a * 2)))
            return np.linspace(lo, hi, n), np.full(n, max(a, (hi - lo) / n))
        return np.zeros(1), np.full(1, a)

    def segments(self, a: float, du: float = 0.02):
        """Split ``[-S_max, S_max]`` at midpoints between pole centers; on each
        piece use ``s = c + w sinh(u)`` with ``u`` uniform (even point count).

        Returns a list of ``(u, s, jacobian)`` arrays.
        """
        S = self.s_max
        centers, widths = self.poles(a)
        centers = np.clip(centers, -S, S)
        order = np.argsort(centers)
        centers, widths = centers[order], widths[order]
        # merge coincident poles, keeping the sharpest width
        keep_c, keep_w = [centers[0]], [widths[0]]
        for c, w in zip(centers[1:], widths[1:]):
            if c - keep_c[-1] <= 1e-12 * max(1.0, abs(c)):
                keep_w[-1] = min(keep_w[-1], w)
            else:
                keep_c.append(c)
                keep_w.append(w)
        c_arr = np.array(keep_c)
        bounds = np.concatenate([[-S], 0.5 * (c_arr[1:] + c_arr[:-1]), [S]])
        out = []
        for lo, hi, c, w in zip(bounds[:-1], bounds[1:], keep_c, keep_w):
            if hi <= lo:
                continue
            u_lo, u_hi = math.asinh((lo - c) / w), math.asinh((hi - c) / w)
            step = du
            if self.ds is not None:
                step = min(step, self.ds / (w * math.cosh(max(abs(u_lo), abs(u_hi)))))
            n = max(8, int(math.ceil((u_hi - u_lo) / step)))
            n += n % 2
            u = np.linspace(u_lo, u_hi, n + 1)
            out.append((u, c + w * np.sinh(u), w * np.cosh(u)))
        return out

    def frequency_grid(self, a: float, du: float = 0.02) -> np.ndarray:
        return np.concatenate([s for _, s, _ in self.segments(a, du)])

    def line_integral(self, a: float, integrand, du: float = 0.02) -> tuple[float, float, int]:
        """``int g ds`` over ``[-S_max, S_max]`` (Simpson in the graded
        variable on each segment) plus the ``1/s^2`` tail correction
        ``g(+-S_max) * S_max``.  ``integrand(lams)`` returns real values.

        Returns ``(value, tail, n_points)``.
        """
        segs = self.segments(a, du)
        s_all = np.concatenate([s for _, s, _ in segs])
        g_all = integrand(a + 1j * s_all)
        total, pos = 0.0, 0
        for u, s, jac in segs:
            g = g_all[pos:pos + s.size]
            pos += s.size
            total += float(simpson(g * jac, x=u))
        tail = float(g_all[0] * abs(s_all[0]) + g_all[-1] * abs(s_all[-1]))
        return total + tail, tail, s_all.size


def _ynorm(b, y):
    if isinstance(b, KoopmanSemigroup):
        return 1.0
    return b.norm(y)


def resolvent_apply(probe: ResolventProbe, lam: complex, x) -> np.ndarray:
    """``R(lam, A) x`` for ``Re lam > 0``.

    In ``laplace_quadrature`` mode a :class:`RuntimeWarning` is issued when
    the truncation bound plus quadrature error exceeds ``probe.laplace_tol``.
    """
    if probe.mode == "laplace_quadrature":
        res = probe.laplace(lam, x)
        if res.tail_bound + res.quadrature_error > probe.laplace_tol:
            warnings.warn(f"Laplace quadrature error bound {res.tail_bound + res.quadrature_error:.3g}"
                          f" exceeds {probe.laplace_tol:.3g}", RuntimeWarning, stacklevel=2)
        return res.value
    return probe.vectors(np.array([lam]), x)[0]


def abel_square_integral(probe: ResolventProbe, x, y, a: float, method: str = "auto",
                         horizon: float | None = None, dt: float = 0.01) -> float:
    """``a * int |<R(a+is)x, y>|^2 ds``.

    ``method="frequency"`` integrates over the graded frequency grid.
    ``"time"`` uses the identity with ``2 pi a int_0^H exp(-2at) |<T(t)x,y>|^2 dt``
    and needs ``a * H >= 10``; ``"auto"`` picks time for Koopman backends
    and for measures with many atoms.
    """
    if not a > 0:
        raise ValidationError("a must be positive")
    if method == "auto":
        b = probe.backend
        many = isinstance(b, MultiplicationSemigroup) and b.measure.size > 4096
        method = "time" if isinstance(b, KoopmanSemigroup) or many else "frequency"
    if method == "frequency":
        val, _, _ = probe.line_integral(a, lambda lam: np.abs(probe.pairs(lam, x, y)) ** 2)
        return a * val
    if method == "time":
        H = horizon if horizon is not None else 12.0 / a
        grid = TimeGrid.from_horizon(H, dt)
        return abel_square_from_signal(Signal(grid, probe.backend.weak_orbit(x, y, grid.times)), a)
    raise ValidationError(f"unknown method {method!r}")


def abel_square_from_signal(signal: Signal, a: float) -> float:
    """``2 pi a int exp(-2at) |orbit|^2 dt`` over the signal's grid (from t = 0)."""
    if signal.grid.t_start != 0:
        raise ValidationError("orbit signal must start at t = 0")
    if a * signal.grid.t_max < 10:
        raise ValidationError(f"a * horizon = {a * signal.grid.t_max:.3g} < 10: tail not negligible")
    v = np.exp(-2 * a * signal.times) * np.abs(signal.values) ** 2
    return float(2 * np.pi * a * signal.grid.dt * (v.sum() - 0.5 * (v[0] + v[-1])))


def abel_pointwise(probe: ResolventProbe, x, a: float, s: float, y=None) -> float:
    """``||a R(a+is) x||``; for Koopman backends ``|a <R(a+is) f, delta_y>|``."""
    if not a > 0:
        raise ValidationError("a must be positive")
    lam = np.array([a + 1j * s])
    b = probe.backend
    if isinstance(b, KoopmanSemigroup):
        if y is None:
            raise ValidationError("Koopman pointwise Abel values need the point y")
        return float(a * abs(probe.pairs(lam, x, y)[0]))
    return float(a * b.norm(probe.vectors(lam, x)[0]))


@dataclass(frozen=True)
class PlancherelResult:
    lhs: float
    rhs: float
    rel_error: float
    a: float
    horizon: float
    dt: float
    s_max: float


def plancherel_check(probe: ResolventProbe, x, y, a: float, horizon: float | None = None,
                     dt: float | None = None) -> PlancherelResult:
    """Compare ``int |<R(a+is)x,y>|^2 ds`` (frequency side) with
    ``2 pi int_0^horizon exp(-2at) |<T(t)x,y>|^2 dt`` (time side).

    The time side uses a Richardson-corrected trapezoid on a grid with
    ``dt`` resolving the fastest oscillation of the orbit.
    """
    if not a > 0:
        raise ValidationError("a must be positive")
    H = 12.0 / a if horizon is None else horizon
    if a * H < 10:
        raise ValidationError(f"a * horizon = {a * H:.3g} < 10: tail not negligible")
    if dt is None:
        dt = min(0.01, 0.05 / (1.0 + probe.generator_norm))
    n = 4 * int(math.ceil(H / dt / 4))
    grid = TimeGrid(dt=H / n, n_steps=n)
    if np.allclose(as_vector(x) if not isinstance(probe.backend, KoopmanSemigroup) else 1, 0):
        return PlancherelResult(0.0, 0.0, 0.0, a, H, grid.dt, probe.s_max)
    lhs, _, _ = probe.line_integral(a, lambda lam: np.abs(probe.pairs(lam, x, y)) ** 2)
    orbit = probe.backend.weak_orbit(x, y, grid.times)
    v = np.exp(-2 * a * grid.times) * np.abs(orbit) ** 2
    rhs, _ = probe._integrate(v, grid)
    rhs = 2 * np.pi * float(rhs)
    scale = max(abs(lhs), abs(rhs))
    rel = abs(lhs - rhs) / scale if scale > 0 else 0.0
    return PlancherelResult(float(lhs), rhs, float(rel), a, H, grid.dt, probe.s_max)


@dataclass(frozen=True, eq=False)
class ChillTomilovResult:
    a: np.ndarray
    I: np.ndarray
    double_integral: float
    a_times_I: np.ndarray
    limit: LimitEstimate
    monotone: bool
    s_max: float = 0.0
    notes: list = field(default_factory=list)


def chill_tomilov_integrals(probe: ResolventProbe, x, y, a_grid=None, tol_s0: float = 1e-9) -> ChillTomilovResult:
    """``I(a) = int |<R^2(a+is)x, y>| ds`` on a log-spaced ``a`` grid,
    ``int_0^1 I(a) da`` and the trend of ``a I(a)`` as ``a -> 0``.

    ``int_0^{a_min}`` is approximated by ``a_min * I(a_min)``.  Needs
    ``s0(A) <= 0``.
    """
    b = probe.backend
    s0 = s0_estimate(b)
    if s0 > tol_s0 * max(1.0, probe.generator_norm):
        raise ValidationError(f"s0 estimate {s0:.3g} > 0: hypothesis s0(A) <= 0 violated")
    a = np.logspace(-4, 0, 41) if a_grid is None else np.sort(np.asarray(a_grid, dtype=float))
    if np.any(a <= 0):
        raise ValidationError("a grid must be positive")
    I = np.array([probe.line_integral(ai, lambda lam: np.abs(probe.pairs(lam, x, y, power=2)))[0]
                  for ai in a])
    mask = a <= 1.0
    aa, II = a[mask], I[mask]
    # Simpson in log a on the grid, a_min * I(a_min) for (0, a_min]
    double = float(simpson(II * aa, x=np.log(aa)) + aa[0] * II[0]) if aa.size > 2 else float("nan")
    if aa.size and aa[-1] < 1.0:
        double = float("nan")
    aI = a * I
    monotone = bool(np.all(np.diff(I) <= 1e-9 * I[:-1]))
    notes = []
    if not monotone:
        notes.append("I(a) increases somewhere on the grid")
    return ChillTomilovResult(a, I, double, aI, limit_estimate(a, aI), monotone, probe.s_max, notes)


def inverse_laplace_orbit(probe: ResolventProbe, x, y, t: float, a: float | None = None,
                          ds: float | None = None) -> complex:
    """``<T(t)x, y> = (1 / (2 pi t)) int exp((a+is)t) <R^2(a+is)x, y> ds``.

    ``a`` defaults to ``1/t``.  When the generator acts boundedly, the two
    leading terms ``<x,y>/(lam-c)^2 + 2<(A-c)x,y>/(lam-c)^3`` (``c = -1``) are
    subtracted from the integrand and added back in closed form,
    ``exp(ct) (<x,y> + t <(A-c)x,y>)``; the remainder decays like ``s^-4``.
    """
    if not t > 0:
        raise ValidationError("t must be positive")
    a = 1.0 / t if a is None else a
    if not a > 0:
        raise ValidationError("a must be positive")
    if s0_estimate(probe.backend) > 1e-9 * max(1.0, probe.generator_norm):
        raise ValidationError("inverse Laplace representation needs s0(A) <= 0")
    ds = 0.05 / t if ds is None else ds
    if ds * t > 0.1:
        raise NumericalError(f"ds * t = {ds * t:.3g} > 0.1: oscillatory quadrature under-resolved; refine ds")
    S = probe.s_max
    n = int(math.ceil(S / ds))
    s = ds * np.arange(-n, n + 1)
    lam = a + 1j * s
    vals = probe.pairs(lam, x, y, power=2)
    b = probe.backend
    c = -1.0
    closed = 0.0
    try:
        Ax = b.generator_apply(x)
    except NotImplementedError:
        Ax = None
    if Ax is not None:
        p0 = b.pair(x, y)
        p1 = b.pair(Ax - c * as_vector(x), y)
        vals = vals - p0 / (lam - c) ** 2 - 2 * p1 / (lam - c) ** 3
        closed = math.exp(c * t) * (p0 + t * p1)
    integrand = np.exp(lam * t) * vals
    integral = ds * (integrand.sum() - 0.5 * (integrand[0] + integrand[-1]))
    return complex(closed + integral / (2 * np.pi * t))
