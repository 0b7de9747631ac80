"""
Transport with a memory term
============================

Upwind advection-diffusion on [0, 1] with absorption lambda1 and a memory
source lambda2 * int_0^t c. Two closures of the memory integral are shown: a
moment closure that turns it into lambda2 t c, and a history closure that
integrates the previous iterate over each step.
"""

import numpy as np

from itersplit import IterativeConfig, MemoryClosure, TimeGrid, TransportConfig, reference_solution, solve_transport
from itersplit.linalg import log_norm_inf
from itersplit.models import build_transport_matrices

cfg = TransportConfig()
print(f"v={cfg.v}, D={cfg.D}, lambda1={cfg.lambda1}, lambda2={cfg.lambda2}, n={cfg.n_points}")

# the sign convention matters: only the upwind matrix is dissipative
for stencil in ("upwind", "display", "in_text"):
    A, _ = build_transport_matrices(TransportConfig(stencil=stencil))
    print(f"{stencil:>8}: log norm {log_norm_inf(A):9.3f}, max Re eig {np.linalg.eigvals(A).real.max():9.3f}")

grid = TimeGrid.from_step(0.0, 1.0, 0.05)
for kind in ("case1_moment", "case2_history"):
    closure = MemoryClosure(kind=kind)
    ref = reference_solution(cfg, closure, grid)
    print(f"\n{kind}: reference mass at t=1 {ref.final.sum() * cfg.dx:.6f}")
    for s in ("lie", "swss", "strang"):
        err = np.max(np.abs(solve_transport(cfg, closure, grid, s).final - ref.final))
        print(f"  {s:>6}: {err:.2e}")
    for mode in ("one_sided_A", "one_sided_B", "alternating"):
        errs = []
        for k in (1, 2, 4, 6):
            tr = solve_transport(cfg, closure, grid, "iterative", IterativeConfig(max_iters=k, eps=1e-300, mode=mode))
            errs.append(np.max(np.abs(tr.final - ref.final)))
        print(f"  {mode:>12} k=1,2,4,6: " + " ".join(f"{e:.2e}" for e in errs))

# restarting the memory integral each step throws away int_0^{t^n}
closure = MemoryClosure(kind="case2_history", restart_memory=True)
ref = reference_solution(cfg, MemoryClosure(kind="case2_history"), grid)
tr = solve_transport(cfg, closure, grid, "iterative", IterativeConfig(max_iters=6))
print(f"\nrestarted memory, 6 iterations: {np.max(np.abs(tr.final - ref.final)):.2e}")
