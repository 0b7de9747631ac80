import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm as sp_expm

from itersplit.errors import DimensionError, DivergenceError, DomainError, UnsupportedOperatorError
from itersplit.linalg import DiagonalGenerator, TimeGrid
from itersplit.quadrature import BOOLE, TRAPEZOID
from itersplit.schemes import (
    MODES,
    History,
    IterativeConfig,
    NonlinearSplitProblem,
    SplitProblem,
    iterative_solve,
    lie_local_error_leading,
    lie_step,
    nonlinear_lie_step,
    run_scheme,
    strang_step,
    swss_step,
    to_trajectory,
)

A2 = np.array([[0.0, 1.0], [0.0, 0.0]])
B2 = np.array([[0.0, 0.0], [1.0, 0.0]])


def _pair(seed, n=3):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, n)), rng.standard_normal((n, n)), rng.standard_normal(n)


@given(seed=st.integers(0, 10_000), tau=st.floats(0.01, 0.5))
def test_one_step_formulas(seed, tau):
    A, B, c = _pair(seed)
    p = SplitProblem(A, B, c, TimeGrid(0.0, tau, 1))
    eA, eB = sp_expm(tau * A), sp_expm(tau * B)
    assert np.allclose(lie_step(p, 0), eB @ eA @ c)
    assert np.allclose(swss_step(p, 0), 0.5 * (eB @ eA + eA @ eB) @ c)
    assert np.allclose(strang_step(p, 0), sp_expm(tau / 2 * A) @ eB @ sp_expm(tau / 2 * A) @ c)


@pytest.mark.parametrize("scheme", ["lie", "swss", "strang"])
def test_commuting_pair_is_exact(scheme):
    A, B, c = np.diag([1.0, -2.0, 0.3]), np.diag([-0.5, 0.75, 2.0]), np.array([1.0, 2.0, -1.0])
    p = SplitProblem(A, B, c, TimeGrid(0.0, 2.0, 7))
    tr = to_trajectory(run_scheme(p, scheme))
    for t, state in zip(tr.times, tr.states):
        assert np.allclose(state, sp_expm(t * (A + B)) @ c, rtol=1e-12)


@pytest.mark.parametrize("mode", MODES)
def test_iterative_converges_to_exact_step(mode):
    A, B, c = _pair(1)
    tau = 0.1
    p = SplitProblem(A, B, c, TimeGrid(0.0, tau, 1))
    res = iterative_solve(p, IterativeConfig(max_iters=40, eps=1e-14, mode=mode), 0)
    assert res.converged
    assert np.allclose(res.state, sp_expm(tau * (A + B)) @ c, atol=1e-10)


def test_first_sweeps_are_single_operator_flows():
    A, B, c = _pair(2)
    tau = 0.2
    p = SplitProblem(A, B, c, TimeGrid(0.0, tau, 1))
    cfg = IterativeConfig(max_iters=1, mode="one_sided_A")
    assert np.allclose(iterative_solve(p, cfg, 0).state, sp_expm(tau * A) @ c)
    cfg = IterativeConfig(max_iters=1, mode="one_sided_B")
    assert np.allclose(iterative_solve(p, cfg, 0).state, sp_expm(tau * B) @ c)


def test_second_sweep_matches_ode_solver():
    # sweep 2 solves c' = A c + B exp(sA) c0 with the first iterate as source
    A, B, c = _pair(3)
    tau = 0.3
    p = SplitProblem(A, B, c, TimeGrid(0.0, tau, 1))
    res = iterative_solve(p, IterativeConfig(max_iters=2, eps=1e-300), 0)
    sol = solve_ivp(lambda t, y: A @ y + B @ sp_expm(t * A) @ c, (0, tau), c, rtol=1e-12, atol=1e-13)
    assert np.allclose(res.state, sol.y[:, -1], atol=1e-9)


def test_alternating_switches_operator():
    cfg = IterativeConfig(mode="alternating")
    assert [cfg.operator(i) for i in range(1, 5)] == ["A", "B", "A", "B"]
    assert IterativeConfig(mode="one_sided_B").operator(3) == "B"


@pytest.mark.parametrize("mode", ["one_sided_A", "alternating"])
def test_zero_B_exact_after_one_sweep(mode):
    A, _, c = _pair(4)
    p = SplitProblem(A, np.zeros((3, 3)), c, TimeGrid(0.0, 0.5, 1))
    res = iterative_solve(p, IterativeConfig(max_iters=1, mode=mode), 0)
    assert np.allclose(res.state, sp_expm(0.5 * A) @ c, atol=1e-14)


def test_unconverged_is_flagged_not_raised():
    A, B, c = _pair(5)
    p = SplitProblem(A, B, c, TimeGrid(0.0, 0.5, 2))
    recs = run_scheme(p, "iterative", IterativeConfig(max_iters=2, eps=1e-15))
    assert recs[0].iterations_used == 0
    assert all(r.iterations_used == 2 and not r.converged for r in recs[1:])


def test_divergence_raises_with_step_index():
    A = np.array([[40.0]])
    p = SplitProblem(A, np.array([[40.0]]), np.array([1.0]), TimeGrid(0.0, 2.0, 2))
    with pytest.raises(DivergenceError, match="step 0"):
        run_scheme(p, "iterative", IterativeConfig(max_iters=8))


def test_time_dependent_diagonal_B_flow():
    gen = DiagonalGenerator(lambda t: np.array([np.cos(t), -t]),
                            lambda t: np.array([np.sin(t), -t * t / 2]))
    A = np.array([[-0.1, 0.2], [0.2, -0.1]])
    c0 = np.array([1.0, 0.5])
    p = SplitProblem(A, gen, c0, TimeGrid(0.0, 1.0, 64))
    sol = solve_ivp(lambda t, y: (A + gen(t)) @ y, (0, 1), c0, rtol=1e-12, atol=1e-13)
    for scheme, tol in (("lie", 5e-3), ("strang", 1e-4), ("iterative", 1e-9)):
        cfg = IterativeConfig(max_iters=20, eps=1e-14) if scheme == "iterative" else None
        tr = to_trajectory(run_scheme(p, scheme, cfg))
        assert np.allclose(tr.final, sol.y[:, -1], atol=tol), scheme


def test_plain_callable_B():
    diag = lambda t: np.diag([t, 1.0])
    p = SplitProblem(np.zeros((2, 2)), diag, np.ones(2), TimeGrid(0.0, 1.0, 1))
    assert np.allclose(lie_step(p, 0), [np.exp(0.5), np.e], rtol=1e-12)
    full = lambda t: np.array([[0.0, t], [t, 0.0]])
    p = SplitProblem(np.zeros((2, 2)), full, np.ones(2), TimeGrid(0.0, 1.0, 1))
    with pytest.raises(UnsupportedOperatorError):
        lie_step(p, 0)


def test_problem_validation():
    with pytest.raises(DimensionError):
        SplitProblem(np.eye(2), np.eye(3), np.ones(2), TimeGrid(0.0, 1.0, 1))
    with pytest.raises(DimensionError):
        SplitProblem(np.eye(2), np.eye(2), np.ones(3), TimeGrid(0.0, 1.0, 1))
    with pytest.raises(DomainError):
        IterativeConfig(mode="two_sided")
    with pytest.raises(DomainError):
        IterativeConfig(max_iters=0)
    p = SplitProblem(A2, B2, np.ones(2), TimeGrid(0.0, 1.0, 2))
    with pytest.raises(DomainError):
        lie_step(p, 2)
    with pytest.raises(DomainError):
        run_scheme(p, "yoshida")


@pytest.mark.parametrize("rule", [TRAPEZOID, BOOLE], ids=lambda r: r.name)
def test_history_interpolates_polynomials_of_rule_degree(rule):
    panels, tau, t0 = 3, 0.6, 1.0
    f = lambda t: np.array([(t - 1.2) ** rule.degree, 2.0])
    F = lambda t: np.array([((t - 1.2) ** (rule.degree + 1) - (-0.2) ** (rule.degree + 1)) / (rule.degree + 1),
                            2.0 * (t - t0)])
    ts = t0 + tau * np.arange(panels * rule.degree + 1) / (panels * rule.degree)
    h = History(t0, tau, np.array([f(t) for t in ts]), rule, panels)
    for t in np.linspace(t0, t0 + tau, 11):
        assert np.allclose(h(t), f(t), atol=1e-13)
        assert np.allclose(h.integral(t), F(t), atol=1e-13)
    with pytest.raises(DomainError):
        h(t0 + 2 * tau)


def test_nonlinear_lie_step():
    # c' = -c + c^2 split as F1 = -c, F2 = c^2; each substep solved accurately
    p = NonlinearSplitProblem(lambda t, c: -c, lambda t, c: c**2, np.array([0.5]), TimeGrid(0.0, 0.1, 1))
    c1 = 0.5 * np.exp(-0.1)
    expected = c1 / (1 - 0.1 * c1)
    assert nonlinear_lie_step(p, 0, substeps=64)[0] == pytest.approx(expected, rel=1e-10)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_nonlinear_blowup_names_subproblem():
    bad = NonlinearSplitProblem(lambda t, c: -c, lambda t, c: np.exp(c * 1e3), np.array([1.0]),
                                TimeGrid(0.0, 1.0, 1))
    with pytest.raises(DivergenceError, match="F2"):
        nonlinear_lie_step(bad, 0)


def test_lie_leading_term_on_standard_pair():
    c = np.array([1.0, 1.0])
    assert np.allclose(lie_local_error_leading(A2, B2, c, 0.2), 0.1 * np.array([1.0, -1.0]))
