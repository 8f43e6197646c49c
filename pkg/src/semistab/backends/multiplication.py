"""Discrete spectral measures and the unitary multiplication group
``(T(t)f)(r) = exp(itr) f(r)`` on ``L^2(mu)``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Capabilities, Semigroup, ValidationError, as_vector

# entries per chunk of the (times x atoms) phase matrix
_CHUNK = 1 << 22


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite list of weighted atoms on the real line.

    ``factors``, when present, are measures whose convolution is this
    measure; the Fourier transform is then a product of small sums.
    """

    locations: np.ndarray
    weights: np.ndarray
    factors: tuple = ()
    name: str = "atoms"

    def __post_init__(self):
        r = np.atleast_1d(np.asarray(self.locations, dtype=float)).copy()
        w = np.atleast_1d(np.asarray(self.weights, dtype=float)).copy()
        if r.ndim != 1 or r.shape != w.shape or r.size == 0:
            raise ValidationError("locations and weights must be nonempty 1-D arrays of equal length")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(w))):
            raise ValidationError("measure has non-finite atoms")
        if np.any(w <= 0):
            raise ValidationError("atom weights must be positive")
        r.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "locations", r)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "factors", tuple(self.factors))

    @classmethod
    def from_atoms(cls, atoms, name="atoms") -> "DiscreteMeasure":
        atoms = np.asarray(atoms, dtype=float).reshape(-1, 2)
        return cls(atoms[:, 0], atoms[:, 1], name=name)

    @classmethod
    def dirac(cls, r: float = 0.0, weight: float = 1.0) -> "DiscreteMeasure":
        return cls([r], [weight], name=f"dirac({r})")

    @classmethod
    def lebesgue(cls, a: float = 0.0, b: float = 1.0, n: int = 10_000) -> "DiscreteMeasure":
        """Normalized Lebesgue measure on ``[a, b]`` as ``n`` midpoint atoms."""
        if not b > a or n < 1:
            raise ValidationError("lebesgue needs a < b and n >= 1")
        h = (b - a) / n
        locs = a + h * (np.arange(n) + 0.5)
        # {0..n-1} = {0..p-1} + p*{0..n/p-1}: one factor per prime factor of n
        factors, stride = [], 1
        for p in _prime_factors(n):
            factors.append(cls(h * stride * np.arange(p), np.full(p, 1.0 / p)))
            stride *= p
        factors.append(cls([a + 0.5 * h], [1.0]))
        return cls(locs, np.full(n, 1.0 / n), tuple(factors), name=f"lebesgue[{a},{b}]x{n}")

    @classmethod
    def cantor(cls, depth: int = 20) -> "DiscreteMeasure":
        """Middle-thirds Cantor measure at ``depth``: ``2**depth`` atoms
        ``sum_k 2 e_k 3**-k`` with equal weights."""
        if depth < 1:
            raise ValidationError("cantor depth must be >= 1")
        locs = np.zeros(1)
        factors = []
        for k in range(1, depth + 1):
            step = 2.0 / 3.0**k
            locs = np.concatenate([locs, locs + step])
            factors.append(cls([0.0, step], [0.5, 0.5]))
        return cls(locs, np.full(locs.size, 0.5**depth), tuple(factors), name=f"cantor(depth={depth})")

    @property
    def size(self) -> int:
        return self.locations.size

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def is_probability(self) -> bool:
        return abs(self.total_mass - 1.0) <= 1e-12

    def canonicalize(self) -> "DiscreteMeasure":
        """Merge atoms at identical locations; keeps the factorization."""
        r, inv = np.unique(self.locations, return_inverse=True)
        if r.size == self.size:
            return self
        w = np.bincount(inv, weights=self.weights)
        return DiscreteMeasure(r, w, self.factors, self.name)

    def atom_mass_sum(self) -> float:
        """``sum_r mu({r})**2`` over distinct locations."""
        return float(np.sum(self.canonicalize().weights ** 2))

    def scaled(self, c: float) -> "DiscreteMeasure":
        if not c > 0:
            raise ValidationError("scale factor must be positive")
        factors = (self.factors[0].scaled(c),) + self.factors[1:] if self.factors else ()
        return DiscreteMeasure(self.locations, c * self.weights, factors, self.name)

    def __add__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return DiscreteMeasure(np.concatenate([self.locations, other.locations]),
                               np.concatenate([self.weights, other.weights]),
                               name=f"{self.name}+{other.name}")

    def to_json(self) -> dict:
        return {"kind": "atoms", "atoms": [[float(r), float(w)] for r, w in zip(self.locations, self.weights)]}


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        while n % p == 0:
            out.append(p)
            n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _phase_sum(locations, coeffs, times) -> np.ndarray:
    """``sum_j coeffs_j exp(i t r_j)`` for each t, chunked over times."""
    times = np.asarray(times, dtype=float)
    flat = times.reshape(-1)
    out = np.empty(flat.size, dtype=complex)
    step = max(1, _CHUNK // max(1, locations.size))
    for start in range(0, flat.size, step):
        tt = flat[start:start + step]
        out[start:start + step] = np.exp(1j * np.outer(tt, locations)) @ coeffs
    return out.reshape(times.shape)


class MultiplicationSemigroup(Semigroup):
    """Unitary group of multiplication by ``exp(itr)`` on ``L^2(mu)``.

    Vectors are indexed by the atoms of ``mu``; the pairing is
    ``<f, g>_mu = sum_j w_j f_j conj(g_j)``.
    """

    tol = 1e-12

    def __init__(self, measure: DiscreteMeasure):
        self.measure = measure
        self.dim = measure.size
        self.capabilities = Capabilities(has_resolvent_closed_form=True,
                                         is_contractive_claimed=True,
                                         adjoint_available=True)

    def _check(self, f, name="f"):
        f = as_vector(f, name)
        if f.size != self.dim:
            raise ValidationError(f"{name} has length {f.size}, measure has {self.dim} atoms")
        return f

    def ones(self) -> np.ndarray:
        return np.ones(self.dim, dtype=complex)

    def apply(self, t, f):
        f = self._check(f)
        return np.exp(1j * t * self.measure.locations) * f

    def pair(self, f, g):
        f, g = self._check(f), self._check(g, "g")
        return complex(np.sum(self.measure.weights * f * g.conj()))

    def norm(self, f):
        f = self._check(f)
        return float(np.sqrt(np.sum(self.measure.weights * np.abs(f) ** 2)))

    def weak_orbit(self, f, g, times):
        from ..measures import fourier_transform

        f, g = self._check(f), self._check(g, "g")
        density = f * g.conj()
        if np.all(density == density[0]):
            # constant density: the orbit is a multiple of the Fourier transform
            return density[0] * fourier_transform(self.measure, times)
        return _phase_sum(self.measure.locations, self.measure.weights * density, times)

    def orbit(self, f, times):
        f = self._check(f)
        times = np.asarray(times, dtype=float)
        return np.exp(1j * np.outer(times, self.measure.locations)) * f

    def generator_apply(self, f):
        return 1j * self.measure.locations * self._check(f)


def multiplication_apply(mu: DiscreteMeasure, t: float, f) -> np.ndarray:
    return MultiplicationSemigroup(mu).apply(t, f)
