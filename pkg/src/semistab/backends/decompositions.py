"""Finite-dimensional structure of matrix semigroups: the splitting into
reversible (imaginary-axis eigenvector) and stable parts, the split into
weakly stable and unitary parts for contractions, the mean ergodic
projection, and the cogenerator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, expm, lu_factor, lu_solve, schur, solve_sylvester

from ..core import NumericalError, ValidationError, as_vector
from .matrix import TOL_IM, MatrixGenerator, UnboundedSemigroupError


def _gen(gen) -> MatrixGenerator:
    return gen if isinstance(gen, MatrixGenerator) else MatrixGenerator(gen)


def _null_basis(M: np.ndarray, abs_tol: float) -> np.ndarray:
    """Orthonormal basis of the numerical kernel: singular values ``<= abs_tol``."""
    _, s, vh = np.linalg.svd(M)
    rank = int(np.sum(s > abs_tol))
    return vh[rank:].conj().T


def _range_basis(P: np.ndarray, k: int) -> np.ndarray:
    """Orthonormal basis of the ``k`` dominant left singular directions of ``P``."""
    u, _, _ = np.linalg.svd(P)
    return u[:, :k]


def spectral_projection(A: np.ndarray, select) -> tuple[np.ndarray, np.ndarray]:
    """Riesz projection onto the invariant subspace of eigenvalues where
    ``select(lam)`` is true.

    Uses an ordered Schur form and a Sylvester equation to decouple the
    blocks, so Jordan structure in the unselected part is harmless.
    Returns ``(P, Q)`` with ``Q`` an orthonormal basis of the range of ``P``.
    """
    n = A.shape[0]
    T, Z, k = schur(A, output="complex", sort=lambda lam: bool(select(lam)))
    if k == 0:
        return np.zeros((n, n), dtype=complex), np.zeros((n, 0), dtype=complex)
    if k == n:
        return np.eye(n, dtype=complex), Z
    T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
    X = solve_sylvester(T11, -T22, -T12)
    P_schur = np.zeros((n, n), dtype=complex)
    P_schur[:k, :k] = np.eye(k)
    P_schur[:k, k:] = -X
    return Z @ P_schur @ Z.conj().T, Z[:, :k]


@dataclass(frozen=True, eq=False)
class JGdLSplit:
    """``X = X_r + X_s`` with projections ``P_r + P_s = I``."""

    reversible_basis: np.ndarray
    stable_basis: np.ndarray
    P_r: np.ndarray
    P_s: np.ndarray
    imaginary_eigenvalues: np.ndarray
    tol: float

    @property
    def dim_reversible(self) -> int:
        return self.reversible_basis.shape[1]

    @property
    def dim_stable(self) -> int:
        return self.stable_basis.shape[1]


def jgdl_split(gen, tol_im: float = TOL_IM) -> JGdLSplit:
    """Split off the span of eigenvectors with purely imaginary eigenvalues.

    An eigenvalue counts as imaginary when ``|Re lam| <= tol_im * ||A||``.
    Raises :class:`UnboundedSemigroupError` for defective imaginary
    eigenvalues or eigenvalues in the open right half-plane.
    """
    gen = _gen(gen)
    cert = gen.certificate(tol_im)
    if not cert.bounded:
        raise UnboundedSemigroupError(
            f"boundedness certificate fails: max Re = {cert.max_real_part:.3g}, "
            f"defective imaginary eigenvalues {list(cert.defective)}")
    tol = gen.imag_tol(tol_im)
    P_r, Q_r = spectral_projection(gen.A, lambda lam: abs(lam.real) <= tol)
    P_s = np.eye(gen.dim) - P_r
    Q_s = _range_basis(P_s, gen.dim - Q_r.shape[1])
    return JGdLSplit(Q_r, Q_s, P_r, P_s, gen.imaginary_eigenvalues(tol_im), tol)


@dataclass(frozen=True, eq=False)
class FoguelSplit:
    """``H = W + W_perp``: weakly stable part and maximal unitary part."""

    W_basis: np.ndarray
    W_perp_basis: np.ndarray
    iterations: int


def foguel_split(gen, tol: float = TOL_IM, cutoff: float = 1e-10) -> FoguelSplit:
    """Unitary part of a contraction semigroup as the largest subspace
    invariant under ``A`` and ``A*`` on which ``A + A*`` vanishes.

    Iterates ``K_{n+1} = K_n ∩ A^{-1} K_n ∩ (A*)^{-1} K_n`` from
    ``K_0 = ker(A + A*)``; singular values below ``cutoff * max(1, ||A||)``
    count as zero.
    """
    gen = _gen(gen)
    A = gen.A
    n = gen.dim
    if not gen.is_contractive(tol):
        raise ValidationError("foguel_split needs a contraction semigroup: (A + A*)/2 has a positive eigenvalue")
    scale = max(1.0, gen.norm)
    K = _null_basis(A + A.conj().T, cutoff * scale)
    iterations = 0
    for iterations in range(1, n + 1):
        if K.shape[1] == 0:
            break
        off = np.eye(n) - K @ K.conj().T
        stacked = np.vstack([off @ A @ K, off @ A.conj().T @ K])
        coeffs = _null_basis(stacked, cutoff * scale)
        if coeffs.shape[1] == K.shape[1]:
            break
        K = K @ coeffs
    W_perp = K
    W = _null_basis(W_perp.conj().T, 0.5) if W_perp.shape[1] else np.eye(n, dtype=complex)
    return FoguelSplit(W, W_perp, iterations)


@dataclass(frozen=True, eq=False)
class MeanErgodicResult:
    P_exact: np.ndarray
    P_empirical: np.ndarray
    deviation: float
    horizon: float
    dt: float


def mean_ergodic_projection(gen, horizon: float, dt: float = 0.01, tol_im: float = TOL_IM) -> MeanErgodicResult:
    """Compare the projection onto ``ker A`` with the Cesàro mean
    ``(1/horizon) * int_0^horizon exp(sA) ds`` (composite trapezoid)."""
    gen = _gen(gen)
    if not horizon > 0 or not dt > 0:
        raise ValidationError("horizon and dt must be positive")
    tol = gen.imag_tol(tol_im)
    P_exact, _ = spectral_projection(gen.A, lambda lam: abs(lam) <= tol)
    n_steps = max(1, int(round(horizon / dt)))
    h = horizon / n_steps
    E = expm(h * gen.A)
    acc = 0.5 * np.eye(gen.dim, dtype=complex)
    cur = np.eye(gen.dim, dtype=complex)
    for _ in range(n_steps - 1):
        cur = cur @ E
        acc += cur
    acc += 0.5 * (cur @ E)
    P_emp = acc * h / horizon
    dev = float(np.linalg.norm(P_emp - P_exact, 2))
    return MeanErgodicResult(P_exact, P_emp, dev, horizon, h)


@dataclass(frozen=True, eq=False)
class Cogenerator:
    """``G = -(I + A)(I - A)^{-1} = I - 2 (I - A)^{-1}``."""

    G: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.G, 2))

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.G)

    def power(self, n: int) -> np.ndarray:
        return np.linalg.matrix_power(self.G, n)

    def power_norms(self, x, n_max: int) -> np.ndarray:
        """``||G^n x||`` for ``n = 0..n_max``."""
        v = as_vector(x)
        out = np.empty(n_max + 1)
        out[0] = np.linalg.norm(v)
        for n in range(1, n_max + 1):
            v = self.G @ v
            out[n] = np.linalg.norm(v)
        return out


def cayley(lam):
    """Scalar map ``lam -> -(1 + lam)/(1 - lam)``; sends iR onto the unit circle minus {1}."""
    lam = np.asarray(lam, dtype=complex)
    return -(1 + lam) / (1 - lam)


def cogenerator_of(gen) -> Cogenerator:
    gen = _gen(gen)
    M = np.eye(gen.dim) - gen.A
    if np.linalg.cond(M) > 1e12:
        raise NumericalError("I - A is numerically singular: 1 is (close to) an eigenvalue of A")
    try:
        R1 = lu_solve(lu_factor(M), np.eye(gen.dim, dtype=complex))
    except LinAlgError as exc:
        raise NumericalError("I - A is singular") from exc
    return Cogenerator(np.eye(gen.dim) - 2 * R1)
