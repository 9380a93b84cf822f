"""Monte Carlo check of the analytic blocking model.

Runs the event-driven admission simulator (Poisson arrivals, exponential
holding, a flow occupies its demanded units on every entity simultaneously
or is lost) on the reference network and compares against the fixed point.
"""

from pathlib import Path

import numpy as np

from sliceforge import CapacityAllocation, SimConfig, load_model, simulate, solve_fixed_point

model = load_model((Path(__file__).parent / "models" / "reference_2x3.json").read_text())
alloc = CapacityAllocation(np.array([7.0, 6.0]))

state = solve_fixed_point(model, alloc)
config = SimConfig(seed=404, horizon=2e5, warmup=1e4)
res = simulate(model, alloc, config)

print("rng:", res.rng)
print(f"{res.events} events, {int(res.arrivals.sum())} arrivals "
      f"({int(res.admitted.sum())} admitted, {int(res.blocked.sum())} blocked)\n")

# Per-flow blocking: the analytic value 1 - prod(1-B_i)^A_ir against the
# simulation estimate with its batch-means standard error.
inc = np.array([[fl.demands.get(lg.id, 0) for lg in model.logicals] for fl in model.flows])
analytic = 1.0 - np.prod((1.0 - state.blocking) ** inc, axis=1)
print(f"{'flow':>6} {'analytic':>10} {'simulated':>10} {'std err':>9} {'rel gap':>9}")
for r, fl in enumerate(model.flows):
    rel = abs(res.blocking[r] - analytic[r]) / analytic[r]
    print(f"{fl.id:>6} {analytic[r]:10.5f} {res.blocking[r]:10.5f} "
          f"{res.blocking_se[r]:9.5f} {rel:9.2%}")
print("\nThe single-entity flows sit inside Monte Carlo noise.  The crossing")
print("flow fab shows a few percent of bias: the fixed point treats the two")
print("entities' losses as independent, and a horizon this long resolves the")
print("approximation error behind that assumption.")

print(f"\n{'flow':>6} {'carried (analytic)':>19} {'carried (sim)':>14} {'std err':>9}")
for r, fl in enumerate(model.flows):
    print(f"{fl.id:>6} {state.carried_per_flow[r]:19.4f} {res.carried[r]:14.4f} "
          f"{res.carried_se[r]:9.4f}")

# Same seed, same trajectory, bit for bit.
again = simulate(model, alloc, config)
print("\nrerun with the same seed identical:",
      bool(np.array_equal(res.blocking, again.blocking) and res.events == again.events))
other = simulate(model, alloc, SimConfig(seed=405, horizon=2e5, warmup=1e4))
print("a different seed moves the estimates:",
      bool(not np.array_equal(res.blocking, other.blocking)))
