import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import subspace_angles

from semistab.acceptance import planted_contraction, random_unitary
from semistab.backends import (Bump, Character, Coordinate, DiscreteMeasure, IntegrationError, KoopmanSemigroup,
                               MatrixGenerator, MatrixSemigroup, MultiplicationSemigroup,
                               UnboundedSemigroupError, cayley, cogenerator_of, foguel_split, homoclinic,
                               homoclinic_radius, jgdl_split, koopman_observe, matrix_apply,
                               mean_ergodic_projection, multiplication_apply, torus_rotation)
from semistab.backends.koopman import Flow
from semistab.core import NumericalError, TimeGrid, ValidationError

times = st.floats(0, 5, allow_nan=False)


# matrix semigroups -------------------------------------------------------------

@pytest.mark.parametrize("A, t, x, expected", [
    ([[-1]], 1.0, [1], [0.36787944117144233]),
    (np.diag([1j, -1]), math.pi, [1, 1], [-1, 0.04321391826377226]),
    (np.diag([1j, -1]), 0.0, [3, 4j], [3, 4j]),
])
def test_matrix_apply_examples(A, t, x, expected):
    np.testing.assert_allclose(matrix_apply(MatrixGenerator(A), t, x), expected, rtol=1e-10, atol=1e-14)


def test_matrix_apply_negative_time_needs_group():
    gen = MatrixGenerator(np.diag([1j, 2j]))
    with pytest.raises(ValidationError):
        matrix_apply(gen, -1.0, [1, 1])
    U = MatrixSemigroup(gen, group=True)
    for t in (0.3, 2.0, 7.5):
        np.testing.assert_allclose(U.operator(t) @ U.operator(-t), np.eye(2), atol=1e-9)


def test_certificate_flags_unbounded_generators():
    with pytest.warns(RuntimeWarning):
        MatrixSemigroup(MatrixGenerator([[0.1]]))
    jordan = MatrixGenerator([[1j, 1], [0, 1j]])
    assert not jordan.certificate().bounded
    assert jordan.certificate().defective
    assert MatrixGenerator(np.diag([1j, 1j, -1])).certificate().bounded


@pytest.mark.parametrize("bad", [[[1, 2, 3]], [[np.nan]], [[]]])
def test_matrix_generator_validation(bad):
    with pytest.raises(ValidationError):
        MatrixGenerator(bad)


def test_matrix_orbit_matches_pointwise_apply(rng):
    A = rng.normal(size=(4, 4)) - 3 * np.eye(4)
    B = MatrixSemigroup(MatrixGenerator(A))
    x = rng.normal(size=4)
    grid = TimeGrid(dt=0.01, n_steps=700)
    orb = B.orbit(x, grid.times)
    for k in (0, 1, 255, 256, 257, 699, 700):
        np.testing.assert_allclose(orb[k], B.apply(grid.times[k], x), rtol=1e-10, atol=1e-13)


# multiplication semigroups -----------------------------------------------------

def test_multiplication_examples():
    mu = DiscreteMeasure.from_atoms([[1, 0.5], [-1, 0.5]])
    B = MultiplicationSemigroup(mu)
    f = [2 + 1j, -1]
    np.testing.assert_array_equal(multiplication_apply(mu, 0.0, f), f)
    np.testing.assert_allclose(multiplication_apply(DiscreteMeasure.dirac(0.0), 3.7, [1]), [1])
    for t in (0.0, 0.4, 2.0, 11.0):
        assert B.pair(B.apply(t, B.ones()), B.ones()) == pytest.approx(math.cos(t), abs=1e-15)
    with pytest.raises(ValidationError):
        B.apply(1.0, [1, 2, 3])


@given(times, st.lists(st.tuples(st.floats(-5, 5), st.floats(0.01, 1)), min_size=1, max_size=8))
def test_multiplication_is_isometric(t, atoms):
    B = MultiplicationSemigroup(DiscreteMeasure.from_atoms(atoms))
    f = np.arange(1, len(atoms) + 1) * (1 - 0.5j)
    assert B.norm(B.apply(t, f)) == pytest.approx(B.norm(f), rel=1e-13)


def test_measure_constructors():
    leb = DiscreteMeasure.lebesgue(0, 1, 12)
    np.testing.assert_allclose(leb.locations, (np.arange(12) + 0.5) / 12)
    assert leb.is_probability
    c = DiscreteMeasure.cantor(3)
    assert c.size == 8 and c.is_probability
    np.testing.assert_allclose(np.sort(c.locations), [0, 2 / 27, 6 / 27, 8 / 27, 18 / 27, 20 / 27, 24 / 27, 26 / 27])
    merged = DiscreteMeasure.from_atoms([[1, 0.25], [1, 0.25], [2, 0.5]]).canonicalize()
    assert merged.size == 2 and merged.atom_mass_sum() == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        DiscreteMeasure.from_atoms([[0, -1]])
    with pytest.raises(ValidationError):
        DiscreteMeasure.cantor(0)


# Koopman semigroups ---------------------------------------------------------------

def test_homoclinic_examples():
    flow = homoclinic()
    r = koopman_observe(flow, 2.0, Coordinate(0), [0.5, 0.0])
    assert r.real == pytest.approx(1 - 0.5 * math.exp(-2), abs=1e-10)
    assert r.real == pytest.approx(0.93233, abs=1e-5)
    np.testing.assert_allclose(flow.evolve([1.0, 0.0], 13.0), [1.0, 0.0], atol=0)


def test_rotation_character():
    val = koopman_observe(torus_rotation(1.0), 0.25, Character(1), [0.0])
    assert val == pytest.approx(1j, abs=1e-12)


def test_rk4_matches_closed_radius():
    flow = homoclinic(1e-3)
    grid = TimeGrid.from_horizon(20.0, 0.01)
    states, err = flow.trajectory([0.2, 1.0], grid, error_tol=1e-8)
    assert np.abs(states[:, 0] - homoclinic_radius(0.2, grid.times)).max() <= 1e-6
    assert err <= 1e-8


def test_python_fallback_matches_compiled():
    def rhs(y, out, p):
        out[0] = 1.0 - y[0]
        out[1] = 1.0 + y[0] ** 2 - 2.0 * y[0] * math.cos(y[1])

    slow = Flow("homoclinic-py", 2, rhs)
    assert not slow.compiled and homoclinic().compiled
    grid = TimeGrid(dt=0.01, n_steps=100)
    a, _ = slow.trajectory([0.5, 0.3], grid)
    b, _ = homoclinic().trajectory([0.5, 0.3], grid)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_integration_failures_are_reported():
    def blowup(y, out, p):
        out[0] = y[0] ** 2

    flow = Flow("blowup", 1, blowup, h=0.1)
    with pytest.raises(IntegrationError):
        flow.evolve([10.0], 5.0)
    with pytest.raises(IntegrationError):
        homoclinic(0.5).trajectory([0.1, 0.0], TimeGrid(dt=1.0, n_steps=5), error_tol=1e-12)
    with pytest.raises(ValidationError):
        homoclinic().trajectory([0.5, 0.0], TimeGrid(dt=0.0015, n_steps=5))


def test_bump_vanishes_near_fixed_point():
    f = Bump()
    assert f([[1.0, 0.0]])[0] == 0.0
    assert f([[1.0, math.pi]])[0] == pytest.approx(1.0)


# semigroup law on every backend ---------------------------------------------------

def _backends():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) - 3 * np.eye(4)
    return [
        (MatrixSemigroup(MatrixGenerator(A)), rng.normal(size=4) + 0j),
        (MultiplicationSemigroup(DiscreteMeasure.lebesgue(-1, 2, 30)), rng.normal(size=30) + 0j),
        (KoopmanSemigroup(homoclinic()), np.array([0.4, 1.0])),
    ]


@pytest.mark.parametrize("backend, x", _backends(), ids=["matrix", "multiplication", "koopman"])
@given(t=times, s=times)
def test_semigroup_law(backend, x, t, s):
    lhs = backend.apply(t + s, x)
    rhs = backend.apply(t, backend.apply(s, x))
    scale = max(1.0, np.linalg.norm(x))
    assert np.linalg.norm(np.asarray(lhs) - np.asarray(rhs)) <= max(backend.tol, 1e-10) * scale * 10
    np.testing.assert_array_equal(backend.apply(0.0, x), x)


# decompositions ---------------------------------------------------------------------

def test_jgdl_examples(rng):
    s = jgdl_split(np.diag([1j, -1]))
    assert s.dim_reversible == 1 and s.dim_stable == 1
    assert abs(abs(s.reversible_basis[0, 0]) - 1) < 1e-12
    assert jgdl_split(np.diag([-1, -2])).dim_reversible == 0
    U = random_unitary(rng, 3)
    A = U @ np.diag([1j, 2j, -1]) @ U.conj().T
    s = jgdl_split(A)
    assert (s.dim_reversible, s.dim_stable) == (2, 1)
    assert np.max(subspace_angles(s.reversible_basis, U[:, :2])) <= 1e-8
    np.testing.assert_allclose(s.P_r + s.P_s, np.eye(3), atol=1e-12)
    E = MatrixSemigroup(MatrixGenerator(A)).operator(1.3)
    np.testing.assert_allclose(E @ s.P_r, s.P_r @ E, atol=1e-10)
    with pytest.raises(UnboundedSemigroupError):
        jgdl_split([[1j, 1], [0, 1j]])


def test_jgdl_reversible_part_is_isometric(rng):
    U = random_unitary(rng, 4)
    A = U @ np.diag([0.5j, -1.5j, -1, -0.2 + 1j]) @ U.conj().T
    s = jgdl_split(A)
    B = MatrixSemigroup(MatrixGenerator(A))
    x = s.reversible_basis @ np.array([1.0, -2j])
    for t in np.linspace(0, 30, 7):
        assert np.linalg.norm(B.apply(t, x)) == pytest.approx(np.linalg.norm(x), rel=1e-10)


def test_foguel_examples(rng):
    f = foguel_split(np.diag([1j, -1]))
    assert f.W_perp_basis.shape[1] == 1 and abs(abs(f.W_perp_basis[0, 0]) - 1) < 1e-12
    assert foguel_split(-np.eye(3)).W_perp_basis.shape[1] == 0
    U = random_unitary(rng, 2)
    A = U @ np.diag([0.7j, -1 + 1j]) @ U.conj().T
    f = foguel_split(A)
    assert np.max(subspace_angles(f.W_perp_basis, U[:, :1])) <= 1e-8
    with pytest.raises(ValidationError):
        foguel_split([[0.1]])


@pytest.mark.parametrize("seed", range(20))
def test_foguel_invariants(seed):
    rng = np.random.default_rng(seed)
    A, U, _ = planted_contraction(rng, 5, 1 + seed % 2, shift=0.5)
    split = foguel_split(A)
    B = MatrixSemigroup(MatrixGenerator(A))
    xr = split.W_perp_basis @ np.ones(split.W_perp_basis.shape[1])
    for t in np.linspace(0, 20, 9):
        assert np.linalg.norm(B.apply(t, xr)) == pytest.approx(np.linalg.norm(xr), abs=1e-8)
    stable = A - U[:, :split.W_perp_basis.shape[1]] @ U[:, :split.W_perp_basis.shape[1]].conj().T @ A
    gap = -np.max(np.linalg.eigvals(U[:, split.W_perp_basis.shape[1]:].conj().T @ stable
                                     @ U[:, split.W_perp_basis.shape[1]:]).real)
    xs = split.W_basis[:, 0]
    assert abs(B.pair(B.apply(20.0, xs), xs)) <= 10 * math.exp(-gap * 20)


@pytest.mark.parametrize("A, P, bound", [
    (np.diag([0, -1]), np.diag([1, 0]), 0.02),
    (np.diag([1j, -1]), np.zeros((2, 2)), 2 / 100),
    (np.zeros((2, 2)), np.eye(2), 1e-12),
])
def test_mean_ergodic_examples(A, P, bound):
    res = mean_ergodic_projection(A, 100.0)
    np.testing.assert_allclose(res.P_exact, P, atol=1e-12)
    assert res.deviation <= bound


@pytest.mark.parametrize("A, G", [
    ([[-1]], [[0]]),
    ([[1j]], [[-1j]]),
    (np.diag([1j, -1]), np.diag([-1j, 0])),
])
def test_cogenerator_examples(A, G):
    np.testing.assert_allclose(cogenerator_of(A).G, G, atol=1e-14)


def test_cogenerator_needs_invertible_shift():
    with pytest.raises(NumericalError):
        cogenerator_of([[1.0]])


@pytest.mark.parametrize("seed", range(10))
def test_cogenerator_spectral_mapping(seed):
    rng = np.random.default_rng(seed)
    A, _, _ = planted_contraction(rng, 5, seed % 3, shift=0.2)
    G = cogenerator_of(A)
    lam = np.linalg.eigvals(A)
    mu = G.eigenvalues
    for lv in lam:
        m = mu[np.argmin(np.abs(mu - cayley(lv)))]
        assert abs(m - cayley(lv)) <= 1e-8
        assert (abs(abs(m) - 1) <= 1e-8) == (abs(lv.real) <= 1e-8)
    assert G.norm <= 1 + 1e-10
