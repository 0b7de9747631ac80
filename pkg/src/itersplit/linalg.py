"""Dense linear algebra kernels: matrix exponential and exponential propagators.

Matrices and vectors are plain float64 numpy arrays; the ``as_matrix`` and
``as_vector`` helpers validate shape and finiteness at API boundaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, DomainError
from .quadrature import QuadratureRule, composite_nodes, composite_weights

__all__ = [
    "as_matrix",
    "as_vector",
    "TimeGrid",
    "DiagonalGenerator",
    "expm",
    "propagate_homogeneous",
    "propagate_affine",
    "propagate_affine_exact",
    "commutator",
    "log_norm_inf",
    "norm_inf",
]

# diagonal Pade(6, 6) numerator coefficients b_k = (12-k)! 6! / (12! k! (6-k)!)
_PADE6 = tuple(
    math.factorial(12 - k) * math.factorial(6)
    / (math.factorial(12) * math.factorial(k) * math.factorial(6 - k))
    for k in range(7)
)
_SCALED_NORM_MAX = 0.5


def as_matrix(M, *, square: bool = True, name: str = "matrix") -> np.ndarray:
    """Return `M` as a finite 2-D float array, optionally requiring it square."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.size == 0:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DomainError(f"{name} has non-finite entries")
    return M


def as_vector(v, *, size: int | None = None, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError(f"{name} must be a non-empty 1-D array, got shape {v.shape}")
    if size is not None and v.size != size:
        raise DimensionError(f"{name} has length {v.size}, expected {size}")
    if not np.all(np.isfinite(v)):
        raise DomainError(f"{name} has non-finite entries")
    return v


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t0 < t0 + tau < ... < t_end`` with `n_steps` steps."""

    t0: float
    t_end: float
    n_steps: int

    def __post_init__(self):
        if not (np.isfinite(self.t0) and np.isfinite(self.t_end)) or self.t_end <= self.t0:
            raise DomainError(f"need finite t_end > t0, got [{self.t0}, {self.t_end}]")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise DomainError(f"n_steps must be a positive integer, got {self.n_steps}")

    @classmethod
    def from_step(cls, t0: float, t_end: float, dt: float) -> "TimeGrid":
        """Grid with step `dt`; (t_end - t0) must be an integer multiple of it."""
        n = round((t_end - t0) / dt)
        if n < 1 or not math.isclose(n * dt, t_end - t0, rel_tol=1e-9):
            raise DomainError(f"dt={dt} does not divide [{t0}, {t_end}]")
        return cls(t0, t_end, n)

    @property
    def tau(self) -> float:
        return (self.t_end - self.t0) / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.tau * np.arange(self.n_steps + 1)

    def time(self, n: int) -> float:
        return self.t0 + n * self.tau


class DiagonalGenerator:
    """Time-dependent diagonal operator ``B(t) = diag(values(t))``.

    Parameters
    ----------
    values : callable
        ``t -> (n,)`` array of diagonal entries.
    antiderivative : callable
        ``t -> (n,)`` array ``F`` with ``F' = values``; used to build the exact
        propagator ``exp(F(t1) - F(t0))`` of ``c' = B(t) c``.
    """

    def __init__(self, values: Callable[[float], np.ndarray],
                 antiderivative: Callable[[float], np.ndarray]):
        self.values = values
        self.antiderivative = antiderivative

    def __call__(self, t: float) -> np.ndarray:
        return np.diag(np.asarray(self.values(t), dtype=float))

    def integral(self, t0: float, t1: float) -> np.ndarray:
        """Matrix ``int_{t0}^{t1} B(s) ds``."""
        return np.diag(self.integral_diagonal(t0, t1))

    def integral_diagonal(self, t0: float, t1: float) -> np.ndarray:
        return (np.asarray(self.antiderivative(t1), dtype=float)
                - np.asarray(self.antiderivative(t0), dtype=float))


def expm(M) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a diagonal Pade(6,6) approximant.

    The scaling count ``s`` is the smallest integer with ``||M||_1 / 2**s <= 0.5``.

    Raises
    ------
    DimensionError
        If `M` is not square.
    DomainError
        If `M` has NaN or Inf entries.
    """
    M = as_matrix(M, name="expm argument")
    n = M.shape[0]
    norm = np.linalg.norm(M, 1)
    s = 0 if norm <= _SCALED_NORM_MAX else int(math.ceil(math.log2(norm / _SCALED_NORM_MAX)))
    X = M / 2.0**s

    ident = np.eye(n)
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    b = _PADE6
    U = X @ (b[1] * ident + b[3] * X2 + b[5] * X4)
    V = b[0] * ident + b[2] * X2 + b[4] * X4 + b[6] * X6
    E = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        E = E @ E
    return E


def propagate_homogeneous(M, c0, tau: float) -> np.ndarray:
    """``exp(tau M) c0``."""
    M = as_matrix(M)
    c0 = as_vector(c0, size=M.shape[0], name="c0")
    if tau < 0:
        raise DomainError(f"tau must be nonnegative, got {tau}")
    if tau == 0:
        return c0.copy()
    return expm(tau * M) @ c0


def propagate_affine(M, g: Callable[[float], np.ndarray], c0, t0: float, t1: float,
                     quad: QuadratureRule, panels: int) -> np.ndarray:
    """Variation-of-constants solution of ``c' = M c + g(t)``, ``c(t0) = c0``.

    Returns ``exp((t1-t0) M) c0 + int_{t0}^{t1} exp((t1-s) M) g(s) ds`` with
    the integral evaluated by the composite rule `quad` on `panels` panels.
    The equally spaced nodes let ``exp((t1 - s_k) M)`` be applied by a Horner
    recursion with a single node-spacing exponential.
    """
    M = as_matrix(M)
    c0 = as_vector(c0, size=M.shape[0], name="c0")
    if t1 < t0:
        raise DomainError(f"need t1 >= t0, got [{t0}, {t1}]")
    nodes = composite_nodes(t0, t1, quad, panels)
    if t1 == t0:
        return c0.copy()
    weights = (t1 - t0) * composite_weights(quad, panels)
    step = expm((nodes[1] - nodes[0]) * M)

    acc = weights[0] * as_vector(g(nodes[0]), size=c0.size, name="g")
    for w, s in zip(weights[1:], nodes[1:]):
        acc = step @ acc + w * as_vector(g(s), size=c0.size, name="g")
    return expm((t1 - t0) * M) @ c0 + acc


def propagate_affine_exact(M, b, c0, tau: float) -> np.ndarray:
    """Exact solution of ``c' = M c + b`` (constant `b`) after time `tau`.

    Exponentiates the augmented matrix ``[[M, b], [0, 0]]`` whose last column
    then holds ``tau * phi_1(tau M) b``; no quadrature is involved.
    """
    M = as_matrix(M)
    n = M.shape[0]
    b = as_vector(b, size=n, name="b")
    c0 = as_vector(c0, size=n, name="c0")
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = M
    aug[:n, n] = b
    E = expm(tau * aug)
    return E[:n, :n] @ c0 + E[:n, n]


def commutator(A, B) -> np.ndarray:
    """``[A, B] = AB - BA``."""
    A = as_matrix(A, name="A")
    B = as_matrix(B, name="B")
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    return A @ B - B @ A


def log_norm_inf(M) -> float:
    """Logarithmic infinity-norm ``max_i (M_ii + sum_{j != i} |M_ij|)``."""
    M = as_matrix(M)
    off = np.abs(M).sum(axis=1) - np.abs(np.diagonal(M))
    return float(np.max(np.diagonal(M) + off))


def norm_inf(x) -> float:
    """Infinity norm of a vector or induced infinity norm of a matrix."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return float(np.max(np.abs(x))) if x.size else 0.0
    return float(np.max(np.abs(x).sum(axis=1)))
