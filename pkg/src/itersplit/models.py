"""Model problems: a scalar integro-differential test case, Newton--Cotes
closures of ``u' = int_0^t u``, and a 1-D transport system with a memory term.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .errors import DivergenceError, DomainError
from .linalg import DiagonalGenerator, TimeGrid, as_vector
from .quadrature import BOOLE, SIMPSON, QuadratureRule, integrate_vector
from .schemes import (
    IterativeConfig,
    MatrixFlow,
    SplitProblem,
    Trajectory,
    iterative_step,
    run_scheme,
    to_trajectory,
)

__all__ = [
    "example1_exact",
    "example1_problem",
    "trapezoid_closure_exact",
    "simpson_closure_series",
    "TransportConfig",
    "MemoryClosure",
    "build_transport_matrices",
    "memory_case1_B",
    "memory_case2_B",
    "transport_initial_state",
    "solve_transport",
    "reference_solution",
]


# ------------------------------------------------------------- scalar example

def example1_exact(t: float, c0: float = 1.0) -> float:
    """Solution ``c0 exp(t + t^2/2)`` of ``c' = (1 + t) c``."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    return c0 * math.exp(t + 0.5 * t * t)


def example1_problem(dt: float, t_end: float = 1.0, c0: float = 1.0) -> SplitProblem:
    """``c' = A c + B(t) c`` with ``A = 1`` and ``B(t) = t``."""
    B = DiagonalGenerator(lambda t: np.array([t]), lambda t: np.array([0.5 * t * t]))
    return SplitProblem(np.array([[1.0]]), B, np.array([c0]), TimeGrid.from_step(0.0, t_end, dt))


# ---------------------------------------------------------- quadrature closures

def trapezoid_closure_exact(t: float, u0: float) -> float:
    """Exact solution ``(2 exp(t^2/4) - 1) u0`` of ``u' = (t/2)(u0 + u)``, ``u(0) = u0``."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    return (2.0 * math.exp(0.25 * t * t) - 1.0) * u0


def simpson_closure_series(u0, n_terms: int) -> list:
    """Taylor coefficients ``a_0 .. a_{n_terms}`` of the Simpson closure solution.

    The closure ``u' = (t/6)(u(0) + 4 u(t/2) + u(t))`` gives, matching the
    coefficient of ``t^k``, ``(k+1) a_{k+1} = a_{k-1} (1 + 2^{3-k}) / 6`` for
    ``k >= 2`` and ``2 a_2 = a_0``; odd coefficients vanish. Integer or
    `Fraction` `u0` yields exact rationals.
    """
    if n_terms < 2:
        raise DomainError("n_terms must be >= 2")
    if isinstance(u0, (int, Fraction)):
        u0 = Fraction(u0)
    a = [u0, 0 * u0, u0 / 2]
    for k in range(2, n_terms):
        a.append(a[k - 1] * (1 + Fraction(8, 2**k)) / (6 * (k + 1)))
    return a[: n_terms + 1]


# ----------------------------------------------------------------- transport

STENCILS = ("upwind", "display", "in_text")


@dataclass(frozen=True)
class TransportConfig:
    """Grid and physical parameters of the 1-D transport model.

    ``stencil`` selects the sign convention of the transport matrix:
    ``"display"`` is the matrix pair exactly as printed (its convection part
    has eigenvalue ``+v/dx`` and grows), ``"in_text"`` flips both signs, and
    ``"upwind"`` is the stable upwind/central combination
    ``-v/dx (c_i - c_{i-1}) + D/dx^2 (c_{i-1} - 2 c_i + c_{i+1})``.
    """

    v: float = 0.1
    D: float = 1e-4
    lambda1: float = 4.0
    lambda2: float = 4.0
    n_points: int = 100
    domain_length: float = 1.0
    stencil: str = "upwind"

    def __post_init__(self):
        vals = (self.v, self.D, self.lambda1, self.lambda2, self.domain_length)
        if not all(np.isfinite(x) for x in vals):
            raise DomainError("transport parameters must be finite")
        if self.D < 0:
            raise DomainError("D must be nonnegative")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise DomainError(f"n_points must be an integer >= 3, got {self.n_points}")
        if self.domain_length <= 0:
            raise DomainError("domain_length must be positive")
        if self.stencil not in STENCILS:
            raise DomainError(f"stencil must be one of {STENCILS}")

    @property
    def dx(self) -> float:
        return self.domain_length / self.n_points

    @property
    def x(self) -> np.ndarray:
        """Cell-centre coordinates."""
        return (np.arange(self.n_points) + 0.5) * self.dx

    def digest(self) -> str:
        """Short stable hash of the configuration."""
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass(frozen=True)
class MemoryClosure:
    """How ``int_0^t lambda2 c ds`` is closed.

    ``case1_moment`` replaces it by ``lambda2 t c(t)``; ``case2_history``
    integrates the previous iterate over the current step with
    ``history_quad``. With ``restart_memory`` the integral starts afresh at
    every macro step instead of carrying ``int_0^{t^n}`` forward.
    """

    kind: str = "case1_moment"
    history_quad: QuadratureRule = BOOLE
    history_panels: int = 4
    restart_memory: bool = False

    def __post_init__(self):
        if self.kind not in ("case1_moment", "case2_history"):
            raise DomainError(f"unknown closure kind {self.kind!r}")
        if self.history_panels < 1:
            raise DomainError("history_panels must be >= 1")


def build_transport_matrices(cfg: TransportConfig) -> tuple[np.ndarray, np.ndarray]:
    """Transport matrix ``A`` and absorption matrix ``Lambda1 = lambda1 I``."""
    n, dx = cfg.n_points, cfg.dx
    if n < 3:
        raise DomainError("n_points must be >= 3")
    diffusion = (np.diag(np.full(n, -2.0)) + np.diag(np.ones(n - 1), 1)
                 + np.diag(np.ones(n - 1), -1))
    convection = np.eye(n) - np.diag(np.ones(n - 1), -1)
    if cfg.stencil == "display":
        A = cfg.D / dx**2 * diffusion + cfg.v / dx * convection
    elif cfg.stencil == "in_text":
        A = -cfg.D / dx**2 * diffusion - cfg.v / dx * convection
    else:
        A = cfg.D / dx**2 * diffusion - cfg.v / dx * convection
    return A, cfg.lambda1 * np.eye(n)


def memory_case1_B(cfg: TransportConfig) -> DiagonalGenerator:
    """``B(t) = (-lambda1 + lambda2 t) I``; its exact flow over [0, t] is
    ``exp((-lambda1 t + lambda2 t^2 / 2) I)``."""
    n, l1, l2 = cfg.n_points, cfg.lambda1, cfg.lambda2
    return DiagonalGenerator(lambda t: np.full(n, -l1 + l2 * t),
                             lambda t: np.full(n, -l1 * t + 0.5 * l2 * t * t))


def memory_case2_B(history, cfg: TransportConfig, quad: QuadratureRule = SIMPSON,
                   offset=None, t_start: float | None = None, panels: int = 8):
    """Memory source ``g(t) = offset + lambda2 int_{t^n}^{t} c_prev(s) ds``.

    `history` is the previous iterate on the current step. A `History` carries
    its own rule-based running integral; any other callable is integrated with
    `quad` on `panels` panels from `t_start`.
    """
    l2 = cfg.lambda2
    base = 0.0 if offset is None else np.asarray(offset, dtype=float)
    running = getattr(history, "integral", None)
    if running is None:
        if t_start is None:
            raise DomainError("t_start is required for a plain callable history")

        def running(t):
            if t < t_start:
                raise DomainError(f"history starts at {t_start}, asked for t={t}")
            if t == t_start:
                return 0.0 * np.asarray(history(t_start), dtype=float)
            return integrate_vector(history, t_start, t, quad, panels)

    return lambda t: base + l2 * running(t)


def transport_initial_state(cfg: TransportConfig) -> np.ndarray:
    """Gaussian bump ``exp(-100 (x - 0.5 L)^2)`` on the cell centres."""
    return np.exp(-100.0 * (cfg.x - 0.5 * cfg.domain_length) ** 2)


def _case2_augmented(cfg: TransportConfig, c0, grid: TimeGrid) -> SplitProblem:
    """Case 2 as a linear system in ``(c, w)`` with ``w = int_0^t lambda2 c``."""
    A, L1 = build_transport_matrices(cfg)
    n = cfg.n_points
    eye = np.eye(n)
    A_aug = np.zeros((2 * n, 2 * n))
    A_aug[:n, :n] = A
    B_aug = np.block([[-L1, eye], [cfg.lambda2 * eye, np.zeros((n, n))]])
    return SplitProblem(A_aug, B_aug, np.concatenate([c0, np.zeros(n)]), grid)


def solve_transport(cfg: TransportConfig, closure: MemoryClosure, grid: TimeGrid,
                    scheme: str, iter_cfg: IterativeConfig | None = None,
                    c0=None) -> Trajectory:
    """Run a splitting scheme on the transport model with the given memory closure."""
    c0 = transport_initial_state(cfg) if c0 is None else as_vector(c0, size=cfg.n_points)
    A, _ = build_transport_matrices(cfg)
    if closure.kind == "case1_moment":
        return to_trajectory(run_scheme(SplitProblem(A, memory_case1_B(cfg), c0, grid), scheme, iter_cfg))
    if scheme != "iterative":
        traj = to_trajectory(run_scheme(_case2_augmented(cfg, c0, grid), scheme))
        return Trajectory(traj.times, traj.states[:, : cfg.n_points])
    return _case2_iterative(cfg, closure, grid, iter_cfg or IterativeConfig(), c0, A)


def _case2_iterative(cfg, closure, grid, iter_cfg, c0, A) -> Trajectory:
    n, l1 = cfg.n_points, cfg.lambda1
    iter_cfg = IterativeConfig(iter_cfg.max_iters, iter_cfg.eps, iter_cfg.mode,
                               closure.history_quad, closure.history_panels,
                               iter_cfg.reverse_history)
    flows = {"A": MatrixFlow(A), "B": MatrixFlow(-l1 * np.eye(n))}
    memory = np.zeros(n)
    c = c0
    states = [c0.copy()]
    for step in range(grid.n_steps):
        tn = grid.time(step)

        def forcing_A(hist, s, memory=memory):
            return -l1 * hist(s) + memory_case2_B(hist, cfg, closure.history_quad, memory)(s)

        def forcing_B(hist, s, memory=memory):
            return A @ hist(s) + memory_case2_B(hist, cfg, closure.history_quad, memory)(s)

        res = iterative_step(c, tn, grid.tau, flows, {"A": forcing_A, "B": forcing_B}, iter_cfg)
        c = res.state
        if not closure.restart_memory:
            memory = memory + cfg.lambda2 * res.history.integral(tn + grid.tau)
        states.append(c)
    return Trajectory(grid.times, np.array(states))


def reference_solution(cfg: TransportConfig, closure: MemoryClosure, grid: TimeGrid,
                       refinement: int = 16, c0=None) -> Trajectory:
    """Unsplit classical RK4 solution sampled on `grid`.

    Case 1 integrates ``c' = (A - lambda1 + lambda2 t) c``; case 2 carries
    ``w = int_0^t lambda2 c`` as extra state: ``c' = A c - lambda1 c + w``,
    ``w' = lambda2 c``.
    """
    if refinement < 4:
        raise DomainError("refinement must be >= 4")
    c0 = transport_initial_state(cfg) if c0 is None else as_vector(c0, size=cfg.n_points)
    A, _ = build_transport_matrices(cfg)
    n, l1, l2 = cfg.n_points, cfg.lambda1, cfg.lambda2

    if closure.kind == "case1_moment":
        def f(t, y):
            return A @ y + (-l1 + l2 * t) * y
        y = c0.copy()
    else:
        def f(t, y):
            c, w = y[:n], y[n:]
            return np.concatenate([A @ c - l1 * c + w, l2 * c])
        y = np.concatenate([c0, np.zeros(n)])

    h = grid.tau / refinement
    states = [c0.copy()]
    for step in range(grid.n_steps):
        t = grid.time(step)
        for sub in range(refinement):
            ts = t + sub * h
            k1 = f(ts, y)
            k2 = f(ts + h / 2, y + h / 2 * k1)
            k3 = f(ts + h / 2, y + h / 2 * k2)
            k4 = f(ts + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > 1e12:
            raise DivergenceError(
                f"reference solution blew up near t={grid.time(step + 1):g}; "
                f"try a smaller dt or a larger refinement (now dt/{refinement})")
        states.append(y[:n].copy())
    return Trajectory(grid.times, np.array(states))
