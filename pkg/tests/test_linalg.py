import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.integrate import solve_ivp

from itersplit.errors import DimensionError, DomainError
from itersplit.linalg import (
    DiagonalGenerator,
    TimeGrid,
    as_vector,
    commutator,
    expm,
    log_norm_inf,
    norm_inf,
    propagate_affine,
    propagate_affine_exact,
    propagate_homogeneous,
)
from itersplit.quadrature import BOOLE, SIMPSON, TRAPEZOID

square = st.integers(1, 6).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(-3, 3, allow_nan=False)))


@given(M=square, scale=st.sampled_from([1e-3, 1.0, 10.0]))
def test_expm_matches_scipy(M, scale):
    M = scale * M
    ref = scipy.linalg.expm(M)
    assert np.allclose(expm(M), ref, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(ref).max()))


def test_expm_special_cases():
    assert np.array_equal(expm(np.zeros((3, 3))), np.eye(3))
    N = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
    assert np.allclose(expm(N), np.eye(3) + N + N @ N / 2, atol=1e-15)
    d = np.array([-40.0, 0.5, 3.0])
    assert np.allclose(expm(np.diag(d)), np.diag(np.exp(d)), rtol=1e-13)
    R = np.array([[0.0, -np.pi], [np.pi, 0.0]])
    assert np.allclose(expm(R), -np.eye(2), atol=1e-13)


def test_expm_rejects_bad_input():
    with pytest.raises(DimensionError):
        expm(np.ones((2, 3)))
    with pytest.raises(DomainError):
        expm(np.array([[np.nan]]))
    with pytest.raises(DimensionError):
        expm(np.ones(3))


def test_as_vector_checks():
    assert as_vector(2.0).shape == (1,)
    with pytest.raises(DimensionError):
        as_vector([1.0, 2.0], size=3)
    with pytest.raises(DomainError):
        as_vector([np.inf])


def test_time_grid():
    g = TimeGrid.from_step(0.0, 1.0, 0.125)
    assert g.n_steps == 8 and g.tau == 0.125
    assert g.times[-1] == 1.0 and g.time(3) == 0.375
    with pytest.raises(DomainError):
        TimeGrid.from_step(0.0, 1.0, 0.3)
    with pytest.raises(DomainError):
        TimeGrid(1.0, 1.0, 4)
    with pytest.raises(DomainError):
        TimeGrid(0.0, 1.0, 0)


def test_propagate_homogeneous():
    M = np.array([[-1.0, 2.0], [0.0, -3.0]])
    c0 = np.array([1.0, 1.0])
    assert np.allclose(propagate_homogeneous(M, c0, 0.7), scipy.linalg.expm(0.7 * M) @ c0)
    assert np.array_equal(propagate_homogeneous(M, c0, 0.0), c0)
    with pytest.raises(DomainError):
        propagate_homogeneous(M, c0, -1.0)


@given(seed=st.integers(0, 2**32 - 1), tau=st.floats(0.01, 1.0))
def test_affine_exact_against_augmented_scipy(seed, tau):
    rng = np.random.default_rng(seed)
    M, b, c0 = rng.standard_normal((3, 3)), rng.standard_normal(3), rng.standard_normal(3)
    # oracle: c(t) = e^{tM} c0 + int_0^t e^{sM} b ds, integral via scipy quad_vec
    from scipy.integrate import quad_vec
    integral, _ = quad_vec(lambda s: scipy.linalg.expm(s * M) @ b, 0.0, tau, epsabs=1e-13)
    ref = scipy.linalg.expm(tau * M) @ c0 + integral
    assert np.allclose(propagate_affine_exact(M, b, c0, tau), ref, rtol=1e-10, atol=1e-11)


@pytest.mark.parametrize("rule", [TRAPEZOID, SIMPSON, BOOLE], ids=lambda r: r.name)
def test_affine_quadrature_matches_ode_solver(rule):
    M = np.array([[-1.0, 0.5], [-0.5, -0.2]])
    g = lambda t: np.array([np.sin(t), t**2])
    c0 = np.array([1.0, -1.0])
    sol = solve_ivp(lambda t, y: M @ y + g(t), (0.2, 1.2), c0, rtol=1e-12, atol=1e-13)
    got = propagate_affine(M, g, c0, 0.2, 1.2, rule, 32)
    tol = {1: 1e-3, 2: 1e-8, 4: 1e-10}[rule.degree]
    assert np.allclose(got, sol.y[:, -1], atol=tol)


def test_affine_constant_source_agrees_between_paths():
    M = np.array([[0.0, 1.0], [-4.0, -0.1]])
    b, c0 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    quad = propagate_affine(M, lambda t: b, c0, 0.0, 0.5, BOOLE, 16)
    assert np.allclose(quad, propagate_affine_exact(M, b, c0, 0.5), atol=1e-12)


def test_diagonal_generator():
    gen = DiagonalGenerator(lambda t: np.array([1.0, t]), lambda t: np.array([t, t * t / 2]))
    assert np.array_equal(gen(2.0), np.diag([1.0, 2.0]))
    assert np.allclose(gen.integral(1.0, 3.0), np.diag([2.0, 4.0]))


@given(A=square)
def test_commutator_properties(A):
    B = A.T + np.eye(A.shape[0])
    C = commutator(A, B)
    assert np.allclose(C, -commutator(B, A))
    assert np.allclose(commutator(A, A), 0)
    assert abs(np.trace(C)) < 1e-10 * max(1.0, np.abs(A).max() ** 2)


def test_commutator_shape_mismatch():
    with pytest.raises(DimensionError):
        commutator(np.eye(2), np.eye(3))


def test_log_norm_and_norm():
    M = np.array([[-3.0, 1.0], [2.0, -1.0]])
    assert log_norm_inf(M) == pytest.approx(1.0)
    assert norm_inf(M) == pytest.approx(4.0)
    assert norm_inf(np.array([-2.0, 1.0])) == 2.0
