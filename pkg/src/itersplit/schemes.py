"""Operator-splitting integrators for ``c' = A c + B(t) c``.

Non-iterative schemes (sequential/Lie, symmetrically weighted sequential,
Strang--Marchuk) compose exact sub-flows. The iterative scheme solves one
operator exactly per sweep and feeds the other operator, applied to the
previous sweep's trajectory, in as a source term through the variation of
constants formula.

Time-dependent ``B`` is exponentiated as ``exp(int B dt)``, which is only exact
when the values ``B(t)`` commute; this module accepts time-dependent ``B``
for exponentiation only when its integral is diagonal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, DivergenceError, DomainError, UnsupportedOperatorError
from .linalg import DiagonalGenerator, TimeGrid, as_matrix, as_vector, commutator, expm
from .quadrature import (
    BOOLE,
    QuadratureRule,
    composite_weights,
    integrate_vector,
)

__all__ = [
    "SplitProblem",
    "NonlinearSplitProblem",
    "IterativeConfig",
    "StepRecord",
    "IterateResult",
    "Trajectory",
    "History",
    "MODES",
    "SCHEMES",
    "lie_step",
    "swss_step",
    "strang_step",
    "nonlinear_lie_step",
    "iterative_step",
    "iterative_solve",
    "lie_local_error_leading",
    "strang_local_error_leading",
    "run_scheme",
    "to_trajectory",
]

MODES = ("one_sided_A", "one_sided_B", "alternating")
SCHEMES = ("lie", "swss", "strang", "iterative")
DIVERGENCE_NORM = 1e12


# --------------------------------------------------------------------------- flows

class MatrixFlow:
    """Exact flow of ``c' = M c`` with exponentials cached by step length."""

    def __init__(self, M):
        self.M = as_matrix(M)
        self._cache: dict[float, np.ndarray] = {}

    def __call__(self, t: float, dt: float, v: np.ndarray) -> np.ndarray:
        if dt == 0:
            return v
        E = self._cache.get(dt)
        if E is None:
            E = self._cache[dt] = expm(dt * self.M)
        return E @ v

    def apply(self, t: float, v: np.ndarray) -> np.ndarray:
        return self.M @ v


class DiagonalFlow:
    """Exact flow of ``c' = B(t) c`` for a time-dependent diagonal ``B``."""

    def __init__(self, gen: DiagonalGenerator):
        self.gen = gen

    def __call__(self, t: float, dt: float, v: np.ndarray) -> np.ndarray:
        if dt == 0:
            return v
        return np.exp(self.gen.integral_diagonal(t, t + dt)) * v

    def apply(self, t: float, v: np.ndarray) -> np.ndarray:
        return np.asarray(self.gen.values(t), dtype=float) * v


class CallableFlow:
    """Flow of ``c' = B(t) c`` for a general callable ``B``.

    Exponentiation uses ``int B dt`` (``B.integral`` when provided, Boole's rule
    otherwise) and is refused unless that integral is diagonal.
    """

    def __init__(self, B: Callable[[float], np.ndarray], size: int):
        self.B = B
        self.size = size

    def _integral(self, t0: float, t1: float) -> np.ndarray:
        integral = getattr(self.B, "integral", None)
        if integral is not None:
            return np.asarray(integral(t0, t1), dtype=float)
        flat = integrate_vector(lambda s: np.asarray(self.B(s), dtype=float).ravel(), t0, t1, BOOLE, 2)
        return flat.reshape(self.size, self.size)

    def __call__(self, t: float, dt: float, v: np.ndarray) -> np.ndarray:
        if dt == 0:
            return v
        S = self._integral(t, t + dt)
        d = np.diagonal(S)
        if np.any(S - np.diag(d)):
            raise UnsupportedOperatorError(
                "time-dependent B must be diagonal to be exponentiated exactly; "
                "pass a constant matrix or a DiagonalGenerator")
        return np.exp(d) * v

    def apply(self, t: float, v: np.ndarray) -> np.ndarray:
        return np.asarray(self.B(t), dtype=float) @ v


def make_flow(op, size: int):
    if isinstance(op, DiagonalGenerator):
        return DiagonalFlow(op)
    if callable(op):
        return CallableFlow(op, size)
    return MatrixFlow(op)


# ------------------------------------------------------------------------ problems

@dataclass(frozen=True)
class SplitProblem:
    """Linear split problem ``c' = A c + B(t) c`` on a uniform grid.

    `B` is a constant matrix, a `DiagonalGenerator`, or any callable
    ``t -> matrix`` (optionally with an ``integral(t0, t1)`` method).
    """

    A: np.ndarray
    B: object
    c0: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        A = as_matrix(self.A, name="A")
        object.__setattr__(self, "A", A)
        n = A.shape[0]
        if callable(self.B):
            B0 = np.asarray(self.B(self.grid.t0), dtype=float)
            if B0.shape != A.shape:
                raise DimensionError(f"B(t) has shape {B0.shape}, A has {A.shape}")
        else:
            B = as_matrix(self.B, name="B")
            if B.shape != A.shape:
                raise DimensionError(f"B has shape {B.shape}, A has {A.shape}")
            object.__setattr__(self, "B", B)
        object.__setattr__(self, "c0", as_vector(self.c0, size=n, name="c0"))

    @property
    def size(self) -> int:
        return self.A.shape[0]

    @cached_property
    def flow_A(self) -> MatrixFlow:
        return MatrixFlow(self.A)

    @cached_property
    def flow_B(self):
        return make_flow(self.B, self.size)


@dataclass(frozen=True)
class NonlinearSplitProblem:
    """``c' = F1(t, c) + F2(t, c)`` split into its two right-hand sides."""

    F1: Callable[[float, np.ndarray], np.ndarray]
    F2: Callable[[float, np.ndarray], np.ndarray]
    c0: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        object.__setattr__(self, "c0", as_vector(self.c0, name="c0"))


@dataclass(frozen=True)
class IterativeConfig:
    """Settings of the iterative splitting scheme.

    `mode` picks the exponentiated operator per sweep: always ``A``, always
    ``B``, or ``A`` on odd and ``B`` on even sweeps. `reverse_history`
    evaluates the previous iterate at the reflected time ``t^n + t^{n+1} - s``.
    """

    max_iters: int = 8
    eps: float = 1e-12
    mode: str = "one_sided_A"
    history_quad: QuadratureRule = BOOLE
    history_panels: int = 4
    reverse_history: bool = False

    def __post_init__(self):
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise DomainError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.eps > 0:
            raise DomainError(f"eps must be positive, got {self.eps}")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        if int(self.history_panels) != self.history_panels or self.history_panels < 1:
            raise DomainError("history_panels must be a positive integer")

    def operator(self, sweep: int) -> str:
        """Which operator ('A' or 'B') sweep number `sweep` (1-based) exponentiates."""
        if self.mode == "one_sided_A":
            return "A"
        if self.mode == "one_sided_B":
            return "B"
        return "A" if sweep % 2 == 1 else "B"


@dataclass(frozen=True)
class StepRecord:
    t: float
    state: np.ndarray
    iterations_used: int = 0
    converged: bool = True


@dataclass(frozen=True)
class Trajectory:
    """States ``states[k]`` at ``times[k]``."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise DimensionError("times and states differ in length")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def to_trajectory(records: Sequence[StepRecord]) -> Trajectory:
    return Trajectory(np.array([r.t for r in records]), np.array([r.state for r in records]))


# ------------------------------------------------------------------------- history

class History:
    """Trajectory of one sweep on ``[t0, t0 + tau]`` sampled at composite-rule nodes.

    Between nodes the trajectory is the panel-wise interpolating polynomial of
    the rule's degree, which is the function the Newton--Cotes rule integrates
    exactly; `integral` returns its exact running integral.
    """

    def __init__(self, t0: float, tau: float, values: np.ndarray,
                 rule: QuadratureRule, panels: int):
        self.t0 = t0
        self.tau = tau
        self.values = np.asarray(values, dtype=float)
        self.rule = rule
        self.panels = panels
        deg = rule.degree
        if self.values.shape[0] != panels * deg + 1:
            raise DimensionError("history needs panels * degree + 1 samples")
        self._width = tau / panels
        self._basis, self._basis_int = _lagrange_tables(deg)
        blocks = self.values[:-1].reshape(panels, deg, -1)
        ends = self.values[deg::deg][:, None, :]
        panel_vals = np.concatenate([blocks, ends], axis=1)  # (panels, deg+1, n)
        self._panel_vals = panel_vals
        w = rule.float_weights
        panel_int = self._width * np.tensordot(w, panel_vals, axes=([0], [1]))
        self._cum = np.vstack([np.zeros((1, self.values.shape[1])), np.cumsum(panel_int, axis=0)])

    @classmethod
    def zeros(cls, t0, tau, size, rule, panels):
        return cls(t0, tau, np.zeros((panels * rule.degree + 1, size)), rule, panels)

    def _locate(self, t: float) -> tuple[int, float]:
        x = (t - self.t0) / self._width
        slack = 1e-9 * self.panels
        if x < -slack or x > self.panels + slack:
            raise DomainError(f"history covers [{self.t0}, {self.t0 + self.tau}], asked for t={t}")
        p = min(max(int(math.floor(x)), 0), self.panels - 1)
        return p, min(max(x - p, 0.0), 1.0)

    def __call__(self, t: float) -> np.ndarray:
        p, u = self._locate(t)
        lag = np.polynomial.polynomial.polyval(u, self._basis.T)
        return lag @ self._panel_vals[p]

    def integral(self, t: float) -> np.ndarray:
        """``int_{t0}^{t}`` of the interpolated trajectory."""
        p, u = self._locate(t)
        lag_int = np.polynomial.polynomial.polyval(u, self._basis_int.T)
        return self._cum[p] + self._width * (lag_int @ self._panel_vals[p])


_LAGRANGE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _lagrange_tables(deg: int):
    """Power-basis coefficients of the Lagrange basis on nodes j/deg and of its antiderivative."""
    if deg not in _LAGRANGE_CACHE:
        P = np.polynomial.polynomial
        nodes = np.arange(deg + 1) / deg
        basis = np.zeros((deg + 1, deg + 1))
        for j in range(deg + 1):
            poly = np.array([1.0])
            for m in range(deg + 1):
                if m != j:
                    poly = P.polymul(poly, np.array([-nodes[m], 1.0]) / (nodes[j] - nodes[m]))
            basis[j] = poly
        basis_int = np.zeros((deg + 1, deg + 2))
        for j in range(deg + 1):
            basis_int[j] = P.polyint(basis[j])
        _LAGRANGE_CACHE[deg] = (basis, basis_int)
    return _LAGRANGE_CACHE[deg]


# ------------------------------------------------------------------- basic schemes

def _state(p, n, c):
    if not 0 <= n < p.grid.n_steps:
        raise DomainError(f"step index {n} outside [0, {p.grid.n_steps})")
    return p.c0 if c is None else as_vector(c, size=p.c0.size, name="state")


def lie_step(p: SplitProblem, n: int, c=None) -> np.ndarray:
    """Sequential splitting step ``exp(int B) exp(tau A) c`` from ``t^n``.

    `c` defaults to the initial state.
    """
    c = _state(p, n, c)
    t, tau = p.grid.time(n), p.grid.tau
    return p.flow_B(t, tau, p.flow_A(t, tau, c))


def swss_step(p: SplitProblem, n: int, c=None) -> np.ndarray:
    """Symmetrically weighted sequential splitting: mean of the A-B and B-A orderings."""
    c = _state(p, n, c)
    t, tau = p.grid.time(n), p.grid.tau
    ab = p.flow_B(t, tau, p.flow_A(t, tau, c))
    ba = p.flow_A(t, tau, p.flow_B(t, tau, c))
    return 0.5 * (ab + ba)


def strang_step(p: SplitProblem, n: int, c=None) -> np.ndarray:
    """Strang--Marchuk step: A over a half step, B over the full step, A over a half step."""
    c = _state(p, n, c)
    t, tau = p.grid.time(n), p.grid.tau
    half = 0.5 * tau
    c = p.flow_A(t, half, c)
    c = p.flow_B(t, tau, c)
    return p.flow_A(t + half, half, c)


def _rk4(f, t0, t1, c, substeps, label):
    h = (t1 - t0) / substeps
    t = t0
    for _ in range(substeps):
        k1 = f(t, c)
        k2 = f(t + h / 2, c + h / 2 * k1)
        k3 = f(t + h / 2, c + h / 2 * k2)
        k4 = f(t + h, c + h * k3)
        c = c + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
        if not np.all(np.isfinite(c)):
            raise DivergenceError(f"sub-problem {label} produced a non-finite state at t={t:g}")
    return c


def nonlinear_lie_step(p: NonlinearSplitProblem, n: int, substeps: int = 32, c=None) -> np.ndarray:
    """Sequential splitting for ``c' = F1 + F2``; each sub-problem is solved by classical RK4."""
    if substeps < 1:
        raise DomainError("substeps must be >= 1")
    c = _state(p, n, c)
    t0 = p.grid.time(n)
    t1 = t0 + p.grid.tau
    c = _rk4(lambda t, y: np.asarray(p.F1(t, y), dtype=float), t0, t1, c, substeps, "F1")
    return _rk4(lambda t, y: np.asarray(p.F2(t, y), dtype=float), t0, t1, c, substeps, "F2")


# ----------------------------------------------------------------- iterative scheme

@dataclass(frozen=True)
class IterateResult:
    state: np.ndarray
    iterations: int
    converged: bool
    history: History = field(repr=False)
    sweep_ends: tuple = field(default=(), repr=False)


def _sweep(flow, forcing, cn, tn, tau, rule: QuadratureRule, panels: int) -> np.ndarray:
    """Solve ``c' = L c + f(t)``, ``c(tn) = cn`` at the composite nodes of one step.

    Interior nodes are reached by marching node to node with a single panel
    of `rule`; the end value uses the composite rule on the full step.
    """
    deg = rule.degree
    N = panels * deg
    fine = N * deg
    hf = tau / fine
    F = [forcing(tn + q * hf) for q in range(fine + 1)]

    w = rule.float_weights
    h = deg * hf
    out = np.empty((N + 1, cn.size))
    out[0] = cn
    for k in range(1, N):
        base = (k - 1) * deg
        acc = flow(tn + base * hf, deg * hf, out[k - 1])
        for j in range(deg + 1):
            acc = acc + h * w[j] * flow(tn + (base + j) * hf, (deg - j) * hf, F[base + j])
        out[k] = acc

    W = tau * composite_weights(rule, panels)
    end = flow(tn, fine * hf, cn)
    for k in range(N + 1):
        end = end + W[k] * flow(tn + k * deg * hf, (N - k) * deg * hf, F[k * deg])
    out[N] = end
    return out


def iterative_step(cn, tn: float, tau: float, flows: dict, forcings: dict,
                   cfg: IterativeConfig) -> IterateResult:
    """One macro step of iterative splitting.

    Parameters
    ----------
    flows : dict
        ``{'A': flow, 'B': flow}``; ``flow(t, dt, v)`` propagates `v` exactly
        from ``t`` to ``t + dt`` under that operator alone.
    forcings : dict
        ``{'A': f, 'B': f}``; ``f(history, s)`` is the source term used while
        the keyed operator is exponentiated, built from the previous sweep.
    """
    cn = np.asarray(cn, dtype=float)
    rule, panels = cfg.history_quad, cfg.history_panels
    prev = History.zeros(tn, tau, cn.size, rule, panels)
    ends = [np.zeros_like(cn)]
    converged = False
    t_mirror = 2 * tn + tau
    for sweep in range(1, cfg.max_iters + 1):
        op = cfg.operator(sweep)
        src, hist = forcings[op], prev
        if cfg.reverse_history:
            forcing = lambda s, src=src, hist=hist: src(_Reflected(hist, t_mirror), s)
        else:
            forcing = lambda s, src=src, hist=hist: src(hist, s)
        values = _sweep(flows[op], forcing, cn, tn, tau, rule, panels)
        if not np.all(np.isfinite(values)) or np.max(np.abs(values)) > DIVERGENCE_NORM:
            raise DivergenceError(f"iterate {sweep} ({op} exponentiated) exceeded {DIVERGENCE_NORM:g}")
        prev = History(tn, tau, values, rule, panels)
        ends.append(values[-1])
        if sweep >= 2 and np.max(np.abs(ends[sweep] - ends[sweep - 2])) < cfg.eps:
            converged = True
            break
    return IterateResult(ends[-1], sweep, converged, prev, tuple(ends[1:]))


class _Reflected:
    """View of a history evaluated at ``t_mirror - s``."""

    def __init__(self, hist: History, t_mirror: float):
        self.hist = hist
        self.t_mirror = t_mirror

    def __call__(self, s):
        return self.hist(self.t_mirror - s)

    def integral(self, s):
        t0 = self.hist.t0
        total = self.hist.integral(t0 + self.hist.tau)
        return total - self.hist.integral(self.t_mirror - s)


def split_forcings(p: SplitProblem) -> dict:
    """Source terms of the linear iteration: ``B c_prev`` under A, ``A c_prev`` under B."""
    flow_B = p.flow_B
    return {
        "A": lambda hist, s: flow_B.apply(s, hist(s)),
        "B": lambda hist, s: p.A @ hist(s),
    }


def iterative_solve(p: SplitProblem, cfg: IterativeConfig, n: int, c=None) -> IterateResult:
    """Iterative splitting over step `n` starting from state `c` (default ``p.c0``).

    Unconverged iterations are returned with ``converged=False`` rather than raised.
    """
    c = _state(p, n, c)
    flows = {"A": p.flow_A, "B": p.flow_B}
    return iterative_step(c, p.grid.time(n), p.grid.tau, flows, split_forcings(p), cfg)


# ------------------------------------------------------------- local error terms

def _check_pair(A, B, c):
    A = as_matrix(A, name="A")
    B = as_matrix(B, name="B")
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    return A, B, as_vector(c, size=A.shape[0], name="c")


def lie_local_error_leading(A, B, c, tau: float) -> np.ndarray:
    """Leading term ``(tau/2) [A, B] c`` of ``(exp(tau(A+B)) - exp(tau B) exp(tau A)) c / tau``."""
    A, B, c = _check_pair(A, B, c)
    return 0.5 * tau * (commutator(A, B) @ c)


def strang_local_error_leading(A, B, c, tau: float) -> np.ndarray:
    """``(tau^2/24) ([B,[B,A]] - 2[A,[A,B]]) c``.

    This is the leading term of the scaled one-step defect of the Strang
    splitting whose half steps use `B` and whose full middle step uses `A`.
    For `strang_step` (half steps in A) pass the operators swapped.
    """
    A, B, c = _check_pair(A, B, c)
    AB = commutator(A, B)
    inner = commutator(B, -AB) - 2.0 * commutator(A, AB)
    return tau**2 / 24.0 * (inner @ c)


# -------------------------------------------------------------------- time march

_STEPS = {"lie": lie_step, "swss": swss_step, "strang": strang_step}


def run_scheme(p: SplitProblem, scheme: str, cfg: IterativeConfig | None = None) -> list[StepRecord]:
    """March `scheme` over the whole grid; the first record is the initial state."""
    if scheme not in SCHEMES:
        raise DomainError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    if scheme == "iterative" and cfg is None:
        cfg = IterativeConfig()
    c = p.c0
    records = [StepRecord(p.grid.t0, c.copy(), 0, True)]
    for n in range(p.grid.n_steps):
        try:
            if scheme == "iterative":
                res = iterative_solve(p, cfg, n, c)
                c, its, ok = res.state, res.iterations, res.converged
            else:
                c, its, ok = _STEPS[scheme](p, n, c), 0, True
        except (DivergenceError, UnsupportedOperatorError, DomainError) as exc:
            raise type(exc)(f"step {n} (t={p.grid.time(n):g}): {exc}") from exc
        records.append(StepRecord(p.grid.time(n + 1), c, its, ok))
    return records
