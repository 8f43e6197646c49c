"""Shared domain types: vectors, time grids, sampled signals and the
semigroup evaluation contract.

Pairing convention: ``pairing(x, y) = sum_j x_j * conj(y_j)``; the second
slot is conjugated.
"""
from __future__ import annotations

import abc
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson


class SemistabError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SemistabError, ValueError):
    """Invalid input: shapes, signs, non-finite values, bad configuration."""


class NumericalError(SemistabError, ArithmeticError):
    """A numerical procedure could not deliver its accuracy contract."""


def as_vector(x, name="x") -> np.ndarray:
    """Validate and convert ``x`` to a nonempty, finite, 1-D complex array."""
    v = np.asarray(x, dtype=complex)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1 or v.size == 0:
        raise ValidationError(f"{name} must be a nonempty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} has non-finite entries")
    return v


def pairing(x, y) -> complex:
    """Hilbert pairing ``sum_j x_j conj(y_j)``."""
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    if x.shape != y.shape:
        raise ValidationError(f"dimension mismatch: {x.size} vs {y.size}")
    return complex(np.vdot(y, x))


def uniform_step(times) -> float | None:
    """Step ``h`` when ``times = t_0 + h*k`` (k = 0, 1, ...) up to rounding, else ``None``."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        return None
    h = (times[-1] - times[0]) / (times.size - 1)
    if not h > 0:
        return None
    ideal = times[0] + h * np.arange(times.size)
    scale = max(abs(times[0]), abs(times[-1]))
    return float(h) if np.max(np.abs(times - ideal)) <= 1e-12 * scale + 1e-14 else None


def norm(x) -> float:
    """Euclidean norm, scaled by the largest modulus so tiny vectors do not underflow to 0."""
    v = as_vector(x)
    m = float(np.abs(v).max())
    return m * float(np.linalg.norm(v / m)) if m > 0 else 0.0


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_k = t_start + k*dt`` for ``k = 0..n_steps``."""

    dt: float
    n_steps: int
    t_start: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.dt) or self.dt <= 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValidationError(f"n_steps must be a positive integer, got {self.n_steps}")
        if not np.isfinite(self.t_start) or self.t_start < 0:
            raise ValidationError(f"t_start must be >= 0, got {self.t_start}")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @classmethod
    def from_horizon(cls, horizon: float, dt: float, t_start: float = 0.0) -> "TimeGrid":
        """Grid covering ``[t_start, t_start + horizon]``; ``horizon/dt`` is rounded."""
        if not dt > 0:
            raise ValidationError(f"dt must be positive, got {dt}")
        if not horizon > 0:
            raise ValidationError(f"horizon must be positive, got {horizon}")
        return cls(dt=dt, n_steps=max(1, int(round(horizon / dt))), t_start=t_start)

    @property
    def t_max(self) -> float:
        return self.t_start + self.n_steps * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_steps + 1)

    def __len__(self):
        return self.n_steps + 1


@dataclass(frozen=True, eq=False)
class Signal:
    """Complex samples on a :class:`TimeGrid`."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if not np.iscomplexobj(v):
            v = v.astype(complex)
        if v.shape != (len(self.grid),):
            raise ValidationError(
                f"signal needs {len(self.grid)} values for its grid, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("signal has non-finite values")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def abs(self) -> "Signal":
        return Signal(self.grid, np.abs(self.values))

    def __len__(self):
        return len(self.grid)


_TRANSFORMS = {
    "abs": np.abs,
    "abs_squared": lambda v: np.abs(v) ** 2,
    "identity": lambda v: v,
}


def trapezoid_integral(s: Signal) -> complex:
    v = s.values
    return complex(s.grid.dt * (v.sum() - 0.5 * (v[0] + v[-1])))


def simpson_integral(s: Signal) -> complex:
    """Composite Simpson rule; scipy handles an odd number of intervals."""
    v = s.values
    return complex(simpson(v.real, dx=s.grid.dt) + 1j * simpson(v.imag, dx=s.grid.dt))


def running_mean(s: Signal, transform: str = "abs") -> Signal:
    """Running time average ``(1/(t - t0)) * int_{t0}^t transform(s)``.

    The value at the first grid point is the point value itself.
    """
    try:
        g = _TRANSFORMS[transform]
    except KeyError:
        raise ValidationError(f"unknown transform {transform!r}") from None
    v = g(s.values)
    cum = cumulative_trapezoid(v, dx=s.grid.dt, initial=0)
    out = np.empty_like(cum)
    out[0] = v[0]
    out[1:] = cum[1:] / (s.grid.dt * np.arange(1, len(v)))
    return Signal(s.grid, out)


@dataclass(frozen=True)
class Capabilities:
    has_resolvent_closed_form: bool = False
    is_contractive_claimed: bool = False
    adjoint_available: bool = False


class Semigroup(abc.ABC):
    """Evaluation contract for a strongly continuous semigroup.

    Subclasses implement :meth:`apply`.  ``tol`` is the relative accuracy
    the backend promises for the semigroup law.
    """

    dim: int
    capabilities: Capabilities = Capabilities()
    tol: float = 1e-10

    @abc.abstractmethod
    def apply(self, t: float, x) -> np.ndarray:
        ...

    def pair(self, x, y) -> complex:
        return pairing(x, y)

    def norm(self, x) -> float:
        return norm(x)

    def orbit(self, x, times) -> np.ndarray:
        """States ``T(t)x`` stacked along axis 0."""
        return np.array([self.apply(t, x) for t in np.asarray(times, dtype=float)])

    def weak_orbit(self, x, y, times) -> np.ndarray:
        """Values ``<T(t)x, y>`` at the given times."""
        y = as_vector(y, "y")
        return self.orbit(x, times) @ y.conj()

    def generator_apply(self, x) -> np.ndarray:
        """``A x`` when the generator is available as a bounded operator."""
        raise NotImplementedError(f"{type(self).__name__} has no bounded generator")
