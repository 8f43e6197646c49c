"""Matrix semigroups ``T(t) = exp(tA)``."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import expm

from ..core import Capabilities, NumericalError, Semigroup, ValidationError, as_vector, uniform_step

# default threshold, relative to ||A||, for "purely imaginary"
TOL_IM = 1e-9


class UnboundedSemigroupError(NumericalError):
    """Raised when a generator has a defective or right-half-plane eigenvalue."""


@dataclass(frozen=True)
class Certificate:
    bounded: bool
    max_real_part: float
    defective: tuple = ()
    tol: float = 0.0


@dataclass(frozen=True, eq=False)
class MatrixGenerator:
    """Dense complex generator matrix."""

    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise ValidationError(f"generator must be a nonempty square matrix, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValidationError("generator has non-finite entries")
        A.flags.writeable = False
        object.__setattr__(self, "A", A)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @cached_property
    def norm(self) -> float:
        return float(np.linalg.norm(self.A, 2))

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.A)

    def imag_tol(self, tol_im: float = TOL_IM) -> float:
        return tol_im * max(self.norm, 1.0)

    def imaginary_eigenvalues(self, tol_im: float = TOL_IM) -> np.ndarray:
        ev = self.eigenvalues
        return ev[np.abs(ev.real) <= self.imag_tol(tol_im)]

    def defective_eigenvalues(self, tol_im: float = TOL_IM) -> list[complex]:
        """Imaginary-axis eigenvalues whose geometric multiplicity is too small."""
        ev = np.sort_complex(self.imaginary_eigenvalues(tol_im))
        if ev.size == 0:
            return []
        # defective eigenvalues split by ~sqrt(eps); cluster well above that
        cluster_tol = 1e-6 * max(self.norm, 1.0)
        rank_tol = 1e-7 * max(self.norm, 1.0)
        clusters, current = [], [ev[0]]
        for lam in ev[1:]:
            if abs(lam - current[-1]) <= cluster_tol:
                current.append(lam)
            else:
                clusters.append(current)
                current = [lam]
        clusters.append(current)
        bad = []
        for c in clusters:
            lam = complex(np.mean(c))
            sv = np.linalg.svd(self.A - lam * np.eye(self.dim), compute_uv=False)
            if int(np.sum(sv <= rank_tol)) < len(c):
                bad.append(lam)
        return bad

    def certificate(self, tol_im: float = TOL_IM) -> Certificate:
        tol = self.imag_tol(tol_im)
        max_re = float(self.eigenvalues.real.max())
        defective = tuple(self.defective_eigenvalues(tol_im))
        return Certificate(max_re <= tol and not defective, max_re, defective, tol)

    def is_contractive(self, tol_im: float = TOL_IM) -> bool:
        h = 0.5 * (self.A + self.A.conj().T)
        return bool(np.linalg.eigvalsh(h).max() <= self.imag_tol(tol_im))


class MatrixSemigroup(Semigroup):
    """``T(t) = exp(tA)`` via scaling and squaring (``scipy.linalg.expm``).

    With ``group=True`` negative times are allowed.
    """

    tol = 1e-10

    def __init__(self, gen, group: bool = False, check: bool = True):
        if not isinstance(gen, MatrixGenerator):
            gen = MatrixGenerator(gen)
        self.gen = gen
        self.dim = gen.dim
        self.group = group
        self.capabilities = Capabilities(
            has_resolvent_closed_form=True,
            is_contractive_claimed=gen.is_contractive(),
            adjoint_available=True,
        )
        if check:
            cert = gen.certificate()
            if not cert.bounded:
                warnings.warn(
                    f"generator fails the boundedness certificate (max Re = {cert.max_real_part:.3g},"
                    f" defective = {list(cert.defective)}); the semigroup may be unbounded",
                    RuntimeWarning, stacklevel=2)

    @property
    def A(self) -> np.ndarray:
        return self.gen.A

    def operator(self, t: float) -> np.ndarray:
        if t < 0 and not self.group:
            raise ValidationError(f"negative time {t} needs group mode")
        if t == 0:
            return np.eye(self.dim, dtype=complex)
        return expm(t * self.A)

    def apply(self, t, x):
        x = as_vector(x)
        if x.size != self.dim:
            raise ValidationError(f"vector of length {x.size} for a {self.dim}-dim generator")
        if t == 0:
            return x.copy()
        return self.operator(t) @ x

    def orbit(self, x, times):
        times = np.asarray(times, dtype=float)
        x = as_vector(x)
        if times.ndim != 1 or times.size == 0:
            raise ValidationError("times must be a nonempty 1-D array")
        h = uniform_step(times)
        if times.size > 2 and h is not None:
            # uniform grid: blocks of propagator powers E^0..E^(m-1), then jump by E^m
            E = expm(h * self.A)
            m = min(256, times.size)
            powers = np.empty((m, self.dim, self.dim), dtype=complex)
            powers[0] = np.eye(self.dim)
            for k in range(1, m):
                powers[k] = E @ powers[k - 1]
            jump = E @ powers[-1]
            out = np.empty((times.size, self.dim), dtype=complex)
            state = self.apply(times[0], x)
            for start in range(0, times.size, m):
                stop = min(start + m, times.size)
                out[start:stop] = powers[: stop - start] @ state
                state = jump @ state
            return out
        return np.array([self.apply(t, x) for t in times])

    def generator_apply(self, x):
        return self.A @ as_vector(x)


def matrix_apply(gen, t: float, x, group: bool = False) -> np.ndarray:
    """``exp(tA) x``."""
    return MatrixSemigroup(gen, group=group).apply(t, x)
