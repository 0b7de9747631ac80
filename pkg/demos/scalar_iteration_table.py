"""
Iterative splitting on c' = (1 + t) c
=====================================

The split A = 1, B(t) = t commutes, so Lie and Strang are exact here and the
interest is in how the iterative scheme approaches exp(t + t^2/2). Iterate 0
is the zero trajectory; iterate 1 therefore only sees the operator it
exponentiates.
"""

import numpy as np

from itersplit import SIMPSON, IterativeConfig, example1_exact, example1_problem, run_scheme, to_trajectory

exact = example1_exact(1.0)
dts = [1.0, 0.5, 0.25, 0.125, 0.0625]


def error(dt, mode, k, **quad):
    cfg = IterativeConfig(max_iters=k, eps=1e-300, mode=mode, **quad)
    return abs(to_trajectory(run_scheme(example1_problem(dt), "iterative", cfg)).final[0] - exact)


# one sweep with A = 1 gives e at t = 1, an error of exp(1.5) - e
print(f"iterate 1 error at dt = 1: {error(1.0, 'one_sided_A', 1):.4f}")

# errors by iteration count, default history quadrature
for mode in ("one_sided_A", "one_sided_B", "alternating"):
    print(f"\n{mode}")
    print(f"{'k':>3} " + " ".join(f"{dt:>10}" for dt in dts))
    for k in range(1, 9):
        print(f"{k:3d} " + " ".join(f"{error(dt, mode, k):10.2e}" for dt in dts))

# the previous iterate is only known at quadrature nodes; with a single
# Simpson panel per step the iteration stalls at a quadrature floor that
# shrinks roughly 16x per halving
print("\none_sided_B, 8 iterations, single Simpson panel")
coarse = dict(history_quad=SIMPSON, history_panels=1)
for dt in dts:
    print(f"dt = {dt:<7} error {error(dt, 'one_sided_B', 8, **coarse):.2e}")
print(f"alternating at dt = 1/16: {error(0.0625, 'alternating', 8, **coarse):.2e}")

# for reference, the non-iterative schemes
for s in ("lie", "swss", "strang"):
    err = abs(to_trajectory(run_scheme(example1_problem(0.25), s)).final[0] - exact)
    print(f"{s} at dt = 0.25: {err:.1e}")
