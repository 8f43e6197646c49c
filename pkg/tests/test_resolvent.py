import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semistab.acceptance import random_stable_generator
from semistab.backends import (Character, DiscreteMeasure, KoopmanSemigroup, MatrixGenerator, MatrixSemigroup,
                               MultiplicationSemigroup, torus_rotation)
from semistab.core import NumericalError, Signal, TimeGrid, ValidationError
from semistab.resolvent import (ResolventProbe, abel_pointwise, abel_square_from_signal, abel_square_integral,
                                chill_tomilov_integrals, inverse_laplace_orbit, limit_estimate, plancherel_check,
                                resolvent_apply, s0_estimate)


def matrix_probe(A, **kw):
    return ResolventProbe(MatrixSemigroup(MatrixGenerator(A)), **kw)


def test_default_modes():
    assert matrix_probe([[-1.0]]).mode == "linear_solve"
    assert ResolventProbe(MultiplicationSemigroup(DiscreteMeasure.dirac())).mode == "closed_form"
    assert ResolventProbe(KoopmanSemigroup(torus_rotation(1.0))).mode == "laplace_quadrature"
    with pytest.raises(ValidationError):
        ResolventProbe(MultiplicationSemigroup(DiscreteMeasure.dirac()), mode="linear_solve")
    with pytest.raises(ValidationError):
        matrix_probe([[-1.0]], mode="closed_form")
    with pytest.raises(ValidationError):
        matrix_probe([[-1.0]], mode="bogus")


@pytest.mark.parametrize("lam", [0.5, 1 + 2j, 0.01 - 3j])
def test_diagonal_resolvent_closed_form(lam):
    d = np.array([1j, -1, -0.5 + 2j])
    x = np.array([1, 2j, -1])
    np.testing.assert_allclose(resolvent_apply(matrix_probe(np.diag(d)), lam, x), x / (lam - d), rtol=1e-12)


def test_multiplication_resolvent_closed_form():
    mu = DiscreteMeasure.from_atoms([[-1, 0.25], [0.5, 0.25], [3, 0.5]])
    probe = ResolventProbe(MultiplicationSemigroup(mu))
    f = np.array([1, -1j, 2])
    lam = 0.3 + 0.5j
    np.testing.assert_allclose(resolvent_apply(probe, lam, f), f / (lam - 1j * mu.locations), rtol=1e-14)
    expected = np.sum(mu.weights * np.abs(f) ** 2 / (lam - 1j * mu.locations) ** 2)
    assert probe.pairs(lam, f, f, power=2)[0] == pytest.approx(expected, rel=1e-13)


def test_laplace_mode_matches_linear_solve(rng):
    A, _ = random_stable_generator(rng, n=4)
    x = rng.normal(size=4) + 1j * rng.normal(size=4)
    exact = matrix_probe(A)
    quad = matrix_probe(A, mode="laplace_quadrature")
    for lam in (1.0, 0.8 + 2j):
        res = quad.laplace(lam, x)
        err = np.linalg.norm(res.value - exact.vectors(np.array([lam]), x)[0])
        assert err <= res.tail_bound + 10 * res.quadrature_error + 1e-9
        assert err <= 1e-7
        r2 = quad.laplace(lam, x, power=2).value
        assert np.linalg.norm(r2 - exact.vectors(np.array([lam]), x, power=2)[0]) <= 1e-7


def test_laplace_warns_when_tail_is_large():
    probe = matrix_probe([[0.5j]], mode="laplace_quadrature", laplace_horizon=5.0)
    with pytest.warns(RuntimeWarning):
        resolvent_apply(probe, 0.2, [1.0])
    probe = matrix_probe([[-1.0]], mode="laplace_quadrature")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert resolvent_apply(probe, 1.0, [1.0])[0] == pytest.approx(0.5, abs=1e-9)


def test_koopman_resolvent_against_point():
    # rotation by alpha: <T(t) chi_1>(0) = exp(2 pi i t), so the transform is 1/(lam - 2 pi i)
    probe = ResolventProbe(KoopmanSemigroup(torus_rotation(1.0)), laplace_horizon=60.0, laplace_dt=2e-3)
    lam = np.array([1.0, 0.5 + 6j])
    np.testing.assert_allclose(probe.pairs(lam, Character(1), np.array([0.0])), 1 / (lam - 2j * np.pi), atol=1e-8)
    with pytest.raises(ValidationError):
        probe.pairs(np.array([0.05]), Character(1), np.array([0.0]))
    with pytest.raises(ValidationError):
        probe.laplace(1.0, Character(1))


@pytest.mark.parametrize("lam", [0.0, -1.0, 2j])
def test_left_half_plane_rejected(lam):
    with pytest.raises(ValidationError):
        matrix_probe([[-1.0]]).pairs(lam, [1.0], [1.0])


def test_s0_estimate():
    assert s0_estimate(np.diag([1j, -1])) == pytest.approx(0.0, abs=1e-15)
    assert s0_estimate(MatrixGenerator([[-2.0, 1], [0, -0.5]])) == pytest.approx(-0.5)
    assert s0_estimate(MultiplicationSemigroup(DiscreteMeasure.dirac())) == 0.0
    with pytest.raises(ValidationError):
        s0_estimate("nope")


def test_limit_estimate():
    p = [1.0, 0.1, 0.01]
    est = limit_estimate(p, [2 + 3 * q for q in p])
    assert est.last == pytest.approx(2.03)
    assert est.richardson == pytest.approx(2.0)
    assert est.monotone
    est = limit_estimate(p, [q**0.5 for q in p])
    assert est.decay_exponent == pytest.approx(0.5)
    assert not limit_estimate(p, [1.0, 2.0, 1.5]).monotone


@pytest.mark.parametrize("a", [1.0, 0.1, 0.01])
def test_frequency_integral_scalar_decay(a):
    # int ds / ((a+1)^2 + s^2) = pi / (a+1)
    probe = matrix_probe([[-1.0]])
    assert abel_square_integral(probe, [1.0], [1.0], a) == pytest.approx(a * math.pi / (1 + a), rel=1e-5)


@pytest.mark.parametrize("a", [1.0, 0.1, 0.01])
def test_frequency_integral_imaginary_eigenvalue(a):
    # single pole on the axis: a int ds / (a^2 + (s-w)^2) = pi
    probe = matrix_probe([[3j]])
    assert abel_square_integral(probe, [1.0], [1.0], a) == pytest.approx(math.pi, rel=1e-5)


def test_frequency_and_time_routes_agree(rng):
    A, _ = random_stable_generator(rng, n=3, seed_imag=True)
    x, y = rng.normal(size=3), rng.normal(size=3)
    probe = matrix_probe(A)
    freq = abel_square_integral(probe, x, y, 0.2, method="frequency")
    time = abel_square_integral(probe, x, y, 0.2, method="time", horizon=80.0, dt=0.002)
    assert time == pytest.approx(freq, rel=1e-4)
    with pytest.raises(ValidationError):
        abel_square_integral(probe, x, y, 0.2, method="other")
    with pytest.raises(ValidationError):
        abel_square_integral(probe, x, y, 0.0)


def test_abel_square_from_signal_requires_long_horizon():
    grid = TimeGrid.from_horizon(10.0, 0.01)
    s = Signal(grid, np.ones(grid.n_steps + 1))
    with pytest.raises(ValidationError):
        abel_square_from_signal(s, 0.5)
    # 2 pi a int e^{-2at} dt = pi (1 - e^{-2aT}); trapezoid error (2 a dt)^2 / 12
    assert abel_square_from_signal(s, 2.0) == pytest.approx(math.pi * (1 - math.exp(-40)), rel=1.5e-4)


@pytest.mark.parametrize("s", [0.0, 1.5, -4.0])
def test_abel_pointwise_scalar(s):
    a = 0.3
    assert abel_pointwise(matrix_probe([[-1.0]]), [1.0], a, s) == pytest.approx(a / math.hypot(a + 1, s))
    assert abel_pointwise(matrix_probe([[2j]]), [1.0], a, 2.0) == pytest.approx(1.0)


def test_plancherel_scalar():
    res = plancherel_check(matrix_probe([[-1.0]]), [1.0], [1.0], 0.5)
    assert res.lhs == pytest.approx(math.pi / 1.5, rel=1e-5)
    assert res.rhs == pytest.approx(math.pi / 1.5, rel=1e-6)
    assert res.rel_error <= 1e-5
    with pytest.raises(ValidationError):
        plancherel_check(matrix_probe([[-1.0]]), [1.0], [1.0], 0.5, horizon=5.0)


@settings(max_examples=10)
@given(st.integers(0, 10_000), st.sampled_from([1.0, 0.3, 0.1]))
def test_plancherel_random_stable(seed, a):
    rng = np.random.default_rng(seed)
    A, _ = random_stable_generator(rng, n=4)
    x = rng.normal(size=4) + 1j * rng.normal(size=4)
    y = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert plancherel_check(matrix_probe(A), x, y, a).rel_error <= 1e-4


def test_plancherel_multiplication():
    mu = DiscreteMeasure.from_atoms([[-2, 0.3], [0.0, 0.2], [1.5, 0.5]])
    B = MultiplicationSemigroup(mu)
    assert plancherel_check(ResolventProbe(B), B.ones(), B.ones(), 0.2).rel_error <= 1e-4


def test_chill_tomilov_scalar_decay():
    # I(a) = pi / (1+a), int_0^1 I = pi log 2
    res = chill_tomilov_integrals(matrix_probe([[-1.0]]), [1.0], [1.0])
    np.testing.assert_allclose(res.I, np.pi / (1 + res.a), rtol=1e-5)
    assert res.double_integral == pytest.approx(math.pi * math.log(2), rel=1e-4)
    assert res.monotone
    assert res.limit.last == pytest.approx(1e-4 * math.pi, rel=1e-3)


def test_chill_tomilov_imaginary_eigenvalue_blows_up():
    # I(a) = pi / a on an axis pole: a I(a) stays at pi
    res = chill_tomilov_integrals(matrix_probe([[1j]]), [1.0], [1.0], a_grid=np.logspace(-3, 0, 13))
    np.testing.assert_allclose(res.a_times_I, np.pi, rtol=1e-4)
    with pytest.warns(RuntimeWarning), pytest.raises(ValidationError):
        chill_tomilov_integrals(matrix_probe([[0.1]]), [1.0], [1.0])


@pytest.mark.parametrize("t", [0.5, 2.0, 5.0, 20.0])
def test_inverse_laplace_orbit(t):
    probe = matrix_probe(np.diag([1j, -1]))
    x = np.array([1.0, 1.0])
    val = inverse_laplace_orbit(probe, x, x, t)
    assert abs(val - (np.exp(1j * t) + np.exp(-t))) <= 1e-5


def test_inverse_laplace_guards():
    probe = matrix_probe([[-1.0]])
    with pytest.raises(NumericalError):
        inverse_laplace_orbit(probe, [1.0], [1.0], 2.0, ds=0.1)
    with pytest.raises(ValidationError):
        inverse_laplace_orbit(probe, [1.0], [1.0], 0.0)
    with pytest.warns(RuntimeWarning), pytest.raises(ValidationError):
        inverse_laplace_orbit(matrix_probe([[0.2]]), [1.0], [1.0], 1.0)
