"""Flows integrated by fixed-step RK4 and the Koopman semigroup
``(T(t)f)(x) = f(phi_t(x))`` observed against point functionals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numba
import numpy as np

from ..core import Capabilities, NumericalError, Semigroup, Signal, TimeGrid, ValidationError, uniform_step


class IntegrationError(NumericalError):
    pass


@numba.njit(cache=True)
def _homoclinic_rhs(y, out, p):
    out[0] = 1.0 - y[0]
    out[1] = 1.0 + y[0] * y[0] - 2.0 * y[0] * math.cos(y[1])


@numba.njit(cache=True)
def _rotation_rhs(y, out, p):
    out[0] = p[0]


@numba.njit(cache=True)
def _rk4_kernel(rhs, y0, p, h, n_steps, save_every):
    d = y0.shape[0]
    y = y0.copy()
    k1 = np.empty(d)
    k2 = np.empty(d)
    k3 = np.empty(d)
    k4 = np.empty(d)
    tmp = np.empty(d)
    out = np.empty((n_steps // save_every + 1, d))
    out[0] = y
    for i in range(n_steps):
        rhs(y, k1, p)
        for j in range(d):
            tmp[j] = y[j] + 0.5 * h * k1[j]
        rhs(tmp, k2, p)
        for j in range(d):
            tmp[j] = y[j] + 0.5 * h * k2[j]
        rhs(tmp, k3, p)
        for j in range(d):
            tmp[j] = y[j] + h * k3[j]
        rhs(tmp, k4, p)
        for j in range(d):
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        if (i + 1) % save_every == 0:
            out[(i + 1) // save_every] = y
    return out


def _rk4_python(rhs, y0, p, h, n_steps, save_every):
    y = np.array(y0, dtype=float)
    out = np.empty((n_steps // save_every + 1, y.size))
    out[0] = y
    k = [np.empty_like(y) for _ in range(4)]
    for i in range(n_steps):
        rhs(y, k[0], p)
        rhs(y + 0.5 * h * k[0], k[1], p)
        rhs(y + 0.5 * h * k[1], k[2], p)
        rhs(y + h * k[2], k[3], p)
        y = y + h / 6.0 * (k[0] + 2 * k[1] + 2 * k[2] + k[3])
        if (i + 1) % save_every == 0:
            out[(i + 1) // save_every] = y
    return out


@dataclass(frozen=True, eq=False)
class Flow:
    """Autonomous ODE ``y' = F(y)`` with a fixed-step RK4 integrator.

    ``rhs(y, out, params)`` writes ``F(y)`` into ``out``.  A numba-jitted
    ``rhs`` runs in compiled code; any other callable falls back to numpy.
    ``period`` marks coordinates living on R/(period*Z) for observation.
    """

    name: str
    dim: int
    rhs: Callable
    params: np.ndarray = field(default_factory=lambda: np.zeros(1))
    h: float = 1e-3
    period: tuple = ()
    fixed_points: tuple = ()

    def __post_init__(self):
        if not self.h > 0:
            raise ValidationError("integrator step must be positive")
        object.__setattr__(self, "params", np.atleast_1d(np.asarray(self.params, dtype=float)))

    @property
    def compiled(self) -> bool:
        return isinstance(self.rhs, numba.core.registry.CPUDispatcher)

    def _run(self, y0, h, n_steps, save_every):
        runner = _rk4_kernel if self.compiled else _rk4_python
        with np.errstate(over="raise", invalid="raise"):
            try:
                out = runner(self.rhs, np.asarray(y0, dtype=float), self.params, h, n_steps, save_every)
            except FloatingPointError as exc:
                raise IntegrationError(f"{self.name}: integration overflow with step {h}") from exc
        if not np.all(np.isfinite(out)):
            raise IntegrationError(f"{self.name}: non-finite state with step {h}; reduce the step")
        return out

    def trajectory(self, y0, grid: TimeGrid, error_tol: float | None = None):
        """States on ``grid`` (which must start at 0 and have ``dt`` a multiple of ``h``).

        With ``error_tol`` a step-doubling estimate ``|y_h - y_2h| / 15`` is
        computed and :class:`IntegrationError` raised when it exceeds the tolerance.
        Returns ``(states, error_estimate)``; the estimate is ``None`` when not requested.
        """
        y0 = np.asarray(y0, dtype=float)
        if y0.shape != (self.dim,):
            raise ValidationError(f"{self.name} needs a state of dimension {self.dim}")
        if grid.t_start != 0:
            raise ValidationError("trajectories start at t = 0")
        ratio = grid.dt / self.h
        save_every = int(round(ratio))
        if save_every < 1 or abs(ratio - save_every) > 1e-9 * ratio:
            raise ValidationError(f"grid step {grid.dt} is not a multiple of the integrator step {self.h}")
        n_steps = grid.n_steps * save_every
        states = self._run(y0, self.h, n_steps, save_every)
        if error_tol is None:
            return states, None
        if save_every % 2:
            raise ValidationError("step doubling needs an even number of steps per grid point")
        coarse = self._run(y0, 2 * self.h, n_steps // 2, save_every // 2)
        err = float(np.max(np.abs(states - coarse))) / 15.0
        if err > error_tol:
            raise IntegrationError(
                f"{self.name}: step-doubling error estimate {err:.3g} exceeds {error_tol:.3g} at h={self.h}")
        return states, err

    def evolve(self, y0, t: float) -> np.ndarray:
        """``phi_t(y0)``; the step is shrunk so that ``t`` is hit exactly."""
        if t < 0:
            raise ValidationError("flows are evolved forward only")
        y0 = np.asarray(y0, dtype=float)
        if t == 0:
            return y0.copy()
        n = max(1, math.ceil(t / self.h - 1e-9))
        return self._run(y0, t / n, n, n)[-1]


def homoclinic(h: float = 1e-3) -> Flow:
    """Planar flow in polar coordinates ``(r, w)``:
    ``r' = 1 - r``, ``w' = 1 + r**2 - 2 r cos w``.

    The unit circle is invariant with the fixed point ``(1, 0)``.
    """
    return Flow("homoclinic", 2, _homoclinic_rhs, h=h, period=(None, 2 * math.pi),
                fixed_points=((1.0, 0.0),))


def torus_rotation(alpha: float = 1.0, h: float = 1e-3) -> Flow:
    """Rotation ``x' = alpha`` on R/Z."""
    return Flow(f"torus_rotation({alpha})", 1, _rotation_rhs, params=np.array([alpha]), h=h,
                period=(1.0,))


FLOW_PRESETS = {"homoclinic": homoclinic, "torus_rotation": torus_rotation}


def homoclinic_radius(r0: float, t) -> np.ndarray:
    """Closed-form radial solution ``1 + (r0 - 1) exp(-t)``."""
    return 1.0 + (r0 - 1.0) * np.exp(-np.asarray(t, dtype=float))


@dataclass(frozen=True)
class Bump:
    """Smooth bump in the angular coordinate, ``scale * r * exp(1 - 1/(1 - u**2))``
    with ``u = dist(w, center) / width``; vanishes near the fixed point when
    ``center`` is far from 0."""

    center: float = math.pi
    width: float = 0.5
    sup_norm: float = 1.0

    def __call__(self, states):
        states = np.atleast_2d(states)
        r, w = states[:, 0], states[:, 1]
        d = np.angle(np.exp(1j * (w - self.center)))
        u = np.abs(d) / self.width
        out = np.zeros_like(u)
        inside = u < 1
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
        return self.sup_norm * np.clip(r, 0.0, 1.0) * out


@dataclass(frozen=True)
class Character:
    """``exp(2 pi i k x)`` on R/Z."""

    k: int = 1
    sup_norm: float = 1.0

    def __call__(self, states):
        x = np.atleast_2d(states)[:, 0]
        return self.sup_norm * np.exp(2j * np.pi * self.k * x)


@dataclass(frozen=True)
class Coordinate:
    index: int = 0
    sup_norm: float = 1.0

    def __call__(self, states):
        return np.atleast_2d(states)[:, self.index]


class KoopmanSemigroup(Semigroup):
    """Koopman semigroup of a flow, observed through point functionals.

    ``apply(t, x0)`` moves the state point (the flow itself); the weak orbit
    of an observable ``f`` against ``delta_{x0}`` is ``f(phi_t(x0))``.
    No operator is materialized.
    """

    def __init__(self, flow: Flow):
        self.flow = flow
        self.dim = flow.dim
        # RK4 at h=1e-3 on the presets
        self.tol = 1e-8
        self.capabilities = Capabilities(is_contractive_claimed=True)

    def apply(self, t, x0):
        return self.flow.evolve(x0, t)

    def pair(self, f, x0):
        return complex(np.asarray(f(np.asarray(x0, dtype=float)))[0])

    def norm(self, f):
        if callable(f):
            return float(getattr(f, "sup_norm", 1.0))
        return 1.0

    def observe(self, f, x0, grid: TimeGrid) -> Signal:
        states, _ = self.flow.trajectory(x0, grid)
        return Signal(grid, np.asarray(f(states), dtype=complex))

    def weak_orbit(self, f, x0, times):
        times = np.asarray(times, dtype=float)
        h = uniform_step(times)
        if h is not None and times[0] == 0:
            ratio = h / self.flow.h
            if abs(ratio - round(ratio)) <= 1e-9 * ratio and round(ratio) >= 1:
                grid = TimeGrid(dt=h, n_steps=times.size - 1)
                return self.observe(f, x0, grid).values
        return np.array([f(self.flow.evolve(x0, t))[0] for t in times], dtype=complex)


def koopman_observe(flow: Flow, t: float, f, x0) -> complex:
    """``f(phi_t(x0))``."""
    return complex(np.asarray(f(flow.evolve(x0, t)))[0])
