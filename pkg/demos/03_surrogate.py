"""The concave surrogate phi(C) and the inner minimization behind it.

phi(C) is defined through a convex minimization over per-entity log-losses
y_j = -log(1 - B_j): carried load discounted by the chosen losses, plus the
utilization area each loss frees up.  Its value tracks the fixed point's
modified objective Q, but unlike Q it is concave in C, which is what the
outer solver exploits.
"""

from pathlib import Path

import numpy as np

from sliceforge import (
    CapacityAllocation,
    diagnostics,
    inner_gradient,
    inner_objective,
    load_model,
    solve_fixed_point,
    surrogate,
)

model = load_model((Path(__file__).parent / "models" / "symmetric_pair.json").read_text())
# one shared pool of 10 units, two erlang_b entities, a load of 8 on each

alloc = CapacityAllocation(np.array([6.0, 4.0]))
sol = surrogate(model, alloc)
print("allocation", alloc.values)
print(f"inner solve: {sol.iterations} iterations, grad norm {sol.grad_norm:.2e}")
print("minimizing log-losses y*:", np.round(sol.log_loss, 6))
print("implied blocking 1-e^-y*:", np.round(-np.expm1(-np.asarray(sol.log_loss)), 6))
print(f"phi = {sol.value:.6f}")

state = solve_fixed_point(model, alloc)
q = diagnostics(model, alloc, state).modified_objective
print(f"fixed-point modified objective Q = {q:.6f}  (phi approximates Q)")

# The objective being minimized is convex in y; a quick look along a line.
print("\nG(t * y*) along the ray through the minimizer:")
y_star = np.asarray(sol.log_loss)
for t in (0.0, 0.5, 1.0, 1.5, 2.0):
    val = inner_objective(model, alloc, t * y_star)
    g = inner_gradient(model, alloc, t * y_star)
    print(f"  t={t:3.1f}  G={val:10.6f}  dG/dy={np.round(g, 4)}")

# phi is concave in the allocation: midpoints beat averages.
print("\nconcavity of phi across allocations of the shared 10 units:")
for c1 in (1.0, 3.0, 5.0, 7.0, 9.0):
    v = surrogate(model, CapacityAllocation(np.array([c1, 10.0 - c1]))).value
    bar = "#" * int(round(4.0 * v))
    print(f"  C=({c1:3.1f},{10-c1:3.1f})  phi={v:8.5f}  {bar}")
