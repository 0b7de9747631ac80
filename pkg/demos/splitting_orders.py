"""
Splitting error on a noncommuting pair
======================================

Lie, symmetrically weighted and Strang splitting on the 2x2 pair
A = [[0, 1], [0, 0]], B = [[0, 0], [1, 0]]. We measure global errors at t = 1,
the observed orders, and how well the commutator terms predict one-step
defects.
"""

import numpy as np

from itersplit import SplitProblem, TimeGrid, expm, leading_term_fit, observed_order, run_scheme, to_trajectory

A = np.array([[0.0, 1.0], [0.0, 0.0]])
B = np.array([[0.0, 0.0], [1.0, 0.0]])
c0 = np.array([1.0, 1.0])
exact = expm(A + B) @ c0

# global errors on a halving sequence
dts = [0.1 / 2**k for k in range(6)]
print(f"{'dt':>10} {'lie':>12} {'swss':>12} {'strang':>12}")
errors = {s: [] for s in ("lie", "swss", "strang")}
for dt in dts:
    p = SplitProblem(A, B, c0, TimeGrid.from_step(0.0, 1.0, dt))
    for s in errors:
        errors[s].append((dt, np.max(np.abs(to_trajectory(run_scheme(p, s)).final - exact))))
    print(f"{dt:10.5f} " + " ".join(f"{errors[s][-1][1]:12.3e}" for s in errors))

for s, errs in errors.items():
    print(f"observed order {s:>6}: {observed_order(errs).observed_order:.3f}")

# one-step defects against the commutator predictions; a constant near 1
# means the leading term is right, the residual order says what is left
fit_dts = [0.1, 0.05, 0.025, 0.0125]
for s in ("lie", "strang"):
    fit = leading_term_fit(s, A, B, c0, fit_dts)
    print(f"{s:>6}: constant {fit.constant:.4f}, residual order {fit.residual_order:.2f}")

# if A and B commute every scheme is exact up to rounding
D1, D2 = np.diag([1.0, -2.0]), np.diag([0.5, 0.25])
p = SplitProblem(D1, D2, c0, TimeGrid(0.0, 1.0, 10))
for s in ("lie", "swss", "strang"):
    err = np.max(np.abs(to_trajectory(run_scheme(p, s)).final - expm(D1 + D2) @ c0))
    print(f"commuting pair, {s}: {err:.1e}")
