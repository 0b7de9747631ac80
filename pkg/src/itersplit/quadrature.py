"""Closed Newton--Cotes rules and their composite application.

Rules are stored with exact rational weights normalised to the panel width,
so ``sum(weights) == 1`` and ``integral ~ (b - a) * sum(w_i f(x_i))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = [
    "QuadratureRule",
    "rule_coefficients",
    "composite_nodes",
    "composite_weights",
    "integrate",
    "integrate_vector",
    "TRAPEZOID",
    "SIMPSON",
    "SIMPSON38",
    "BOOLE",
]


@dataclass(frozen=True)
class QuadratureRule:
    """A closed Newton--Cotes rule on ``degree + 1`` equally spaced nodes.

    Attributes
    ----------
    degree : int
        Interpolation degree; the rule uses nodes ``a + i (b - a) / degree``.
    name : str
    weights : tuple of Fraction
        Weights relative to the panel width ``b - a``.
    error_order : int
        Power of ``(b - a)`` in the single-panel remainder term.
    exactness : int
        Highest polynomial degree integrated exactly.
    """

    degree: int
    name: str
    weights: tuple[Fraction, ...]
    error_order: int
    exactness: int

    def __post_init__(self):
        if len(self.weights) != self.degree + 1:
            raise ValueError("need degree + 1 weights")
        if sum(self.weights) != 1:
            raise ValueError(f"{self.name}: weights must sum to 1")
        if tuple(reversed(self.weights)) != self.weights:
            raise ValueError(f"{self.name}: weights must be symmetric")

    @property
    def float_weights(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])


def _rule(degree, name, numerators, denominator, error_order, exactness):
    weights = tuple(Fraction(k, denominator) for k in numerators)
    return QuadratureRule(degree, name, weights, error_order, exactness)


TRAPEZOID = _rule(1, "trapezoid", (1, 1), 2, 3, 1)
SIMPSON = _rule(2, "simpson", (1, 4, 1), 6, 5, 3)
SIMPSON38 = _rule(3, "simpson38", (1, 3, 3, 1), 8, 5, 3)
BOOLE = _rule(4, "boole", (7, 32, 12, 32, 7), 90, 7, 5)

_RULES = {r.degree: r for r in (TRAPEZOID, SIMPSON, SIMPSON38, BOOLE)}
_BY_NAME = {r.name: r for r in _RULES.values()}


def rule_coefficients(degree: int | str) -> QuadratureRule:
    """Return the closed Newton--Cotes rule of the given degree (1-4) or name."""
    if isinstance(degree, str):
        try:
            return _BY_NAME[degree]
        except KeyError:
            raise DomainError(f"unknown rule {degree!r}; expected one of {sorted(_BY_NAME)}") from None
    if degree not in _RULES:
        raise DomainError(f"unsupported Newton-Cotes degree {degree}; expected 1, 2, 3 or 4")
    return _RULES[degree]


def _check_interval(a, b, panels):
    if not (np.isfinite(a) and np.isfinite(b)):
        raise DomainError("integration limits must be finite")
    if b < a:
        raise DomainError(f"upper limit {b} is below lower limit {a}")
    if int(panels) != panels or panels < 1:
        raise DomainError(f"panels must be a positive integer, got {panels}")


def composite_nodes(a: float, b: float, rule: QuadratureRule, panels: int) -> np.ndarray:
    """Nodes of the composite rule, ``panels * degree + 1`` points from a to b."""
    _check_interval(a, b, panels)
    n = panels * rule.degree
    return a + (b - a) * np.arange(n + 1) / n


def composite_weights(rule: QuadratureRule, panels: int) -> np.ndarray:
    """Composite weights relative to the full interval length ``b - a``.

    Shared panel endpoints accumulate the contributions of both neighbours.
    """
    w = rule.float_weights
    out = np.zeros(panels * rule.degree + 1)
    for p in range(panels):
        out[p * rule.degree:(p + 1) * rule.degree + 1] += w
    return out / panels


def integrate(f: Callable[[float], float], a: float, b: float,
              rule: QuadratureRule, panels: int = 1) -> float:
    """Composite Newton--Cotes approximation of the integral of `f` over [a, b].

    Raises
    ------
    DomainError
        If ``b < a``; reversed limits are not silently reinterpreted.

    Examples
    --------
    >>> integrate(lambda x: x**3, 0.0, 1.0, SIMPSON)
    0.25
    """
    x = composite_nodes(a, b, rule, panels)
    w = composite_weights(rule, panels)
    return float((b - a) * sum(wi * f(xi) for wi, xi in zip(w, x)))


def integrate_vector(f: Callable[[float], np.ndarray], a: float, b: float,
                     rule: QuadratureRule, panels: int = 1) -> np.ndarray:
    """Componentwise `integrate` for vector-valued integrands."""
    x = composite_nodes(a, b, rule, panels)
    w = composite_weights(rule, panels)
    values = np.array([np.asarray(f(xi), dtype=float) for xi in x])
    return (b - a) * np.tensordot(w, values, axes=1)
