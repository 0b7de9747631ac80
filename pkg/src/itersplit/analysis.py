"""Error measures, observed convergence orders and splitting-error diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, DomainError
from .linalg import TimeGrid, as_matrix, as_vector, expm, log_norm_inf, norm_inf
from .schemes import (
    SplitProblem,
    Trajectory,
    lie_local_error_leading,
    lie_step,
    strang_local_error_leading,
    strang_step,
)

__all__ = [
    "ErrorRecord",
    "OrderEstimate",
    "LeadingTermFit",
    "GrowthReport",
    "ROUNDING_FLOOR",
    "error_vs_reference",
    "observed_order",
    "loglog_slope",
    "leading_term_fit",
    "growth_bound_check",
]

ROUNDING_FLOOR = 1e-12


@dataclass(frozen=True)
class ErrorRecord:
    scheme: str
    dt: float
    iterations: int
    error: float
    norm: str = "inf"

    def __post_init__(self):
        if not self.error >= 0:
            raise DomainError(f"error must be nonnegative, got {self.error}")
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")


@dataclass(frozen=True)
class OrderEstimate:
    scheme: str
    observed_order: float
    pairs_used: int
    exact: bool = False


@dataclass(frozen=True)
class LeadingTermFit:
    """Ratio of the measured one-step defect to its predicted leading term.

    ``constant`` should approach 1; ``residual_order`` is the log-log slope
    of ``|defect/tau - predicted|`` against ``tau``.
    """

    scheme: str
    constant: float
    residual_order: float
    constants: tuple[float, ...] = ()
    exact: bool = False


@dataclass(frozen=True)
class GrowthReport:
    times: tuple[float, ...]
    norms: tuple[float, ...]
    bounds: tuple[float, ...]
    log_norm: float
    min_slack: float
    max_slack: float
    holds: bool


def error_vs_reference(approx: Trajectory, ref: Trajectory, norm: str = "inf",
                       dx: float | None = None, full: bool = False) -> float:
    """Distance between two trajectories sampled at the same times.

    By default the infinity norm of the final-state difference. ``norm="l2"``
    uses ``sqrt(dx) * ||.||_2`` and needs `dx`; ``full=True`` takes the maximum
    over all sampled times instead of the final one.
    """
    if approx.states.shape != ref.states.shape or not np.allclose(approx.times, ref.times, rtol=0, atol=1e-12):
        raise DimensionError("trajectories are sampled differently")
    diff = approx.states - ref.states
    if not full:
        diff = diff[-1:]
    if norm == "inf":
        return float(np.max(np.abs(diff)))
    if norm in ("l2", "l2-weighted"):
        if dx is None:
            raise DomainError("l2-weighted norm needs dx")
        return float(math.sqrt(dx) * np.max(np.linalg.norm(diff, axis=1)))
    raise DomainError(f"unknown norm {norm!r}")


def _pairs(errors):
    pts = sorted(((float(dt), float(e)) for dt, e in errors), key=lambda p: -p[0])
    return list(zip(pts[:-1], pts[1:]))


def observed_order(errors: Iterable[tuple[float, float]], scheme: str = "") -> OrderEstimate:
    """Mean of ``log(e1/e2) / log(dt1/dt2)`` over consecutive step sizes.

    For a halving sequence this is the mean of ``log2(e(dt)/e(dt/2))``. Pairs
    with an error below the rounding floor are dropped; if nothing is left the
    estimate is flagged exact.
    """
    errors = list(errors)
    if len(errors) < 2:
        raise DomainError("need at least two (dt, error) entries")
    slopes = []
    for (dt1, e1), (dt2, e2) in _pairs(errors):
        if e1 < ROUNDING_FLOOR or e2 < ROUNDING_FLOOR:
            continue
        slopes.append(math.log(e1 / e2) / math.log(dt1 / dt2))
    if not slopes:
        return OrderEstimate(scheme, math.nan, 0, exact=True)
    return OrderEstimate(scheme, float(np.mean(slopes)), len(slopes))


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def leading_term_fit(scheme: str, A, B, c, dts: Sequence[float]) -> LeadingTermFit:
    """Compare the one-step defect of `scheme` with its predicted leading term.

    The defect is ``(exp(tau (A+B)) c - step(c)) / tau``. For ``lie`` the
    prediction is ``(tau/2)[A,B]c``; for ``strang`` (half steps in A) it is the
    nested-commutator term with the roles of A and B exchanged.
    """
    A = as_matrix(A, name="A")
    B = as_matrix(B, name="B")
    c = as_vector(c, size=A.shape[0], name="c")
    dts = [float(t) for t in dts]
    if any(b >= a for a, b in zip(dts, dts[1:])):
        raise DomainError("dts must be strictly decreasing")
    if scheme == "lie":
        step, predict = lie_step, lambda tau: lie_local_error_leading(A, B, c, tau)
    elif scheme == "strang":
        step, predict = strang_step, lambda tau: strang_local_error_leading(B, A, c, tau)
    else:
        raise DomainError(f"no leading-term formula for scheme {scheme!r}")

    constants, residuals = [], []
    for tau in dts:
        p = SplitProblem(A, B, c, TimeGrid(0.0, tau, 1))
        defect = (expm(tau * (A + B)) @ c - step(p, 0)) / tau
        pred = predict(tau)
        if norm_inf(pred) <= 1e-14 * max(1.0, norm_inf(c)):
            return LeadingTermFit(scheme, math.nan, math.nan, exact=True)
        constants.append(float(defect @ pred / (pred @ pred)))
        residuals.append(norm_inf(defect - pred))
    return LeadingTermFit(scheme, float(np.mean(constants)), loglog_slope(dts, residuals),
                          tuple(constants))


def growth_bound_check(M, times: Iterable[float], tol: float = 1e-10) -> GrowthReport:
    """Check ``||exp(tM)||_inf <= exp(t mu_inf(M)) + tol`` at each time."""
    M = as_matrix(M)
    mu = log_norm_inf(M)
    times = tuple(float(t) for t in times)
    norms = tuple(norm_inf(expm(t * M)) for t in times)
    bounds = tuple(math.exp(t * mu) for t in times)
    slack = [b - n for b, n in zip(bounds, norms)]
    return GrowthReport(times, norms, bounds, mu, min(slack), max(slack),
                        all(s >= -tol for s in slack))
