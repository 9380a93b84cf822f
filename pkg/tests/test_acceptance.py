"""Acceptance gate: one test per shipping criterion, one PASS/FAIL line each.

Each test prints its verdict to the real stderr (bypassing capture) so the
lines are visible in any pytest run, then asserts.  Tolerances are the
contract; do not loosen them here.
"""

import itertools
import math
import sys
import time

import numpy as np

import sliceforge as sf
from sliceforge import CapacityAllocation, LossSpec, loss

from conftest import (
    erlang_recursion,
    random_small_instance,
    single_entity,
    symmetric_pair,
    three_potentials,
)


def _verdict(num, label, ok, detail=""):
    line = f"ACCEPTANCE {num:2d} {label}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  [{detail}]"
    print(line, file=sys.__stderr__, flush=True)
    assert ok, line


def test_criterion_01_erlang_continuous_vs_recursion():
    spec = LossSpec("erlang_b")
    t0 = time.perf_counter()
    worst = 0.0
    for rho in (0.5, 1.0, 2.0, 5.0, 10.0, 20.0):
        for servers in range(1, 31):
            cont = float(loss(spec, rho, float(servers)))
            exact = erlang_recursion(rho, servers)
            worst = max(worst, abs(cont - exact))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 5.0
    _verdict(1, "erlang-B continuous extension vs integer recursion", ok,
             f"worst |dB|={worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_fixed_point_closed_forms():
    worst = 0.0
    for kind in ("erlang_b", "linear_clip", "exp_overflow"):
        for nu in (0.5, 2.0, 7.0):
            for cap in (0.5, 1.0, 3.0, 10.0):
                model = single_entity(nu, kind=kind)
                state = sf.solve_fixed_point(model, CapacityAllocation(np.array([cap])))
                worst = max(worst, abs(float(state.offered[0]) - nu))
    # one flow demanding 2 circuits of a unit-capacity clipped entity
    model = single_entity(1.0, kind="linear_clip", demand=2)
    state = sf.solve_fixed_point(model, CapacityAllocation(np.array([1.0])))
    dev_rho = abs(float(state.offered[0]) - math.sqrt(2.0))
    dev_t = abs(sf.carried_total(model, state) - 0.5)
    ok = worst <= 1e-8 and dev_rho <= 1e-8 and dev_t <= 1e-8
    _verdict(2, "fixed-point closed forms", ok,
             f"rho=nu worst {worst:.2e}, sqrt2 dev {dev_rho:.2e}, T dev {dev_t:.2e}")


def test_criterion_03_correction_bounds_random_instances():
    violations = []
    for seed in range(200):
        model, alloc = random_small_instance(seed)
        state = sf.solve_fixed_point(model, alloc)
        assert state.converged, f"instance {seed} did not converge"
        diag = sf.diagnostics(model, alloc, state)
        if not (0.0 <= diag.correction <= diag.correction_bound):
            violations.append(seed)
    ok = not violations
    _verdict(3, "correction within [0, sum rho*B] on 200 random instances", ok,
             f"violations={violations}")


def test_criterion_04_low_blocking_objective_bound():
    # four lightly loaded entities plus one flow crossing all of them
    model = sf.NetworkModel(
        physicals=tuple(sf.PhysicalEntity(f"p{i}", "unit", 16.0) for i in range(4)),
        logicals=tuple(
            sf.LogicalEntity(f"l{i}", (f"p{i}",), LossSpec("erlang_b")) for i in range(4)
        ),
        flows=tuple(sf.Flow(f"f{i}", 6.0, {f"l{i}": 1}) for i in range(4))
        + (sf.Flow("f_long", 2.0, {f"l{i}": 1 for i in range(4)}),),
    )
    alloc = CapacityAllocation(np.full(4, 16.0))
    state = sf.solve_fixed_point(model, alloc)
    diag = sf.diagnostics(model, alloc, state)
    b_max = float(np.max(state.blocking))
    ok = (
        b_max < 0.005
        and diag.max_route_length == 4
        and diag.carried_total <= diag.modified_objective <= 1.02 * diag.carried_total
    )
    # the general form of the same bound on the criterion-3 distribution
    violations = []
    for seed in range(200):
        model, alloc = random_small_instance(seed)
        state = sf.solve_fixed_point(model, alloc)
        diag = sf.diagnostics(model, alloc, state)
        bm = float(np.max(state.blocking)) if state.blocking.size else 0.0
        if diag.modified_objective > (1.0 + bm * diag.max_route_length) * diag.carried_total:
            violations.append(seed)
    ok = ok and not violations
    _verdict(4, "low-blocking bound T <= Q <= 1.02T (and general form)", ok,
             f"B_max={b_max:.5f}, Q/T={diag.modified_objective/diag.carried_total:.6f}"
             if not violations else f"violations={violations}")


def test_criterion_05_inner_gradient_vs_central_differences():
    def family_model(kind):
        return sf.NetworkModel(
            physicals=(sf.PhysicalEntity("p", "unit", 1000.0),),
            logicals=(
                sf.LogicalEntity("a", ("p",), LossSpec(kind)),
                sf.LogicalEntity("b", ("p",), LossSpec(kind)),
            ),
            flows=(
                sf.Flow("fa", 3.0, {"a": 1}),
                sf.Flow("fb", 2.0, {"b": 1}),
                sf.Flow("fab", 1.5, {"a": 1, "b": 1}),
            ),
        )

    worst = {}
    for kind in ("erlang_b", "linear_clip", "exp_overflow"):
        model = family_model(kind)
        rng = np.random.default_rng(507)
        worst[kind] = 0.0
        for _ in range(100):
            alloc = CapacityAllocation(rng.uniform(0.5, 15.0, size=2))
            y = rng.uniform(0.02, 2.5, size=2)
            grad = sf.inner_gradient(model, alloc, y)
            fd = np.empty(2)
            for j in range(2):
                h = 1e-6 * (1.0 + abs(y[j]))
                yp, ym = y.copy(), y.copy()
                yp[j] += h
                ym[j] -= h
                fd[j] = (
                    sf.inner_objective(model, alloc, yp)
                    - sf.inner_objective(model, alloc, ym)
                ) / (2.0 * h)
            rel = float(np.max(np.abs(fd - grad)) / max(np.max(np.abs(grad)), 1e-12))
            worst[kind] = max(worst[kind], rel)
    ok = all(w <= 1e-4 for w in worst.values())
    _verdict(5, "inner gradient vs central differences (100/family)", ok,
             ", ".join(f"{k}={v:.1e}" for k, v in worst.items()))


def test_criterion_06_surrogate_closed_forms():
    nu = 2.0
    worst_cf = worst_dual = 0.0
    for cap in (0.3, 0.5, 1.0, 1.5, 1.9, 2.0, 2.5, 5.0):
        model = single_entity(nu, kind="linear_clip")
        alloc = CapacityAllocation(np.array([cap]))
        phi = sf.surrogate(model, alloc).value
        expected = cap + cap * math.log(nu / cap) if cap < nu else nu
        worst_cf = max(worst_cf, abs(phi - expected) / abs(expected))
        state = sf.solve_fixed_point(model, alloc)
        q = sf.diagnostics(model, alloc, state).modified_objective
        worst_dual = max(worst_dual, abs(phi - q) / abs(q))
    ok = worst_cf <= 1e-6 and worst_dual <= 1e-6
    _verdict(6, "surrogate closed forms and fixed-point agreement", ok,
             f"closed-form rel {worst_cf:.1e}, dual-route rel {worst_dual:.1e}")


def test_criterion_07_midpoint_concavity_under_scaling():
    model = sf.NetworkModel(
        physicals=(
            sf.PhysicalEntity("p0", "unit", 1.0),
            sf.PhysicalEntity("p1", "unit", 0.8),
        ),
        logicals=(
            sf.LogicalEntity("l0", ("p0",), LossSpec("erlang_b")),
            sf.LogicalEntity("l1", ("p1",), LossSpec("erlang_b")),
            sf.LogicalEntity("l2", ("p0", "p1"), LossSpec("erlang_b")),
        ),
        flows=(
            sf.Flow("f0", 35.0, {"l0": 1}),
            sf.Flow("f1", 25.0, {"l1": 1}),
            sf.Flow("f2", 15.0, {"l2": 1}),
        ),
    )
    s_mat = sf.incidence(model)
    caps = model.physical_capacities()
    rng = np.random.default_rng(20260823)

    def sample():
        raw = rng.uniform(0.05, 1.0, size=3)
        usage = s_mat.T @ raw
        t = float(np.min(caps / usage)) * float(rng.uniform(0.5, 1.0))
        return raw * t

    def phi(c):
        return sf.surrogate(model, CapacityAllocation(c)).value

    pairs = [(sample(), sample()) for _ in range(100)]
    detail = []
    ok = True
    for s in (10.0, 50.0, 100.0):
        worst = math.inf
        violations = 0
        for c1, c2 in pairs:
            mid = phi(s * 0.5 * (c1 + c2))
            avg = 0.5 * (phi(s * c1) + phi(s * c2))
            slack = mid - avg
            worst = min(worst, slack)
            if slack < -1e-6 * s:
                violations += 1
        ok = ok and violations == 0
        detail.append(f"s={s:g}: worst slack {worst:+.1e}, viol {violations}")
    _verdict(7, "midpoint concavity of phi under scaling", ok, "; ".join(detail))


def test_criterion_08_outer_solver_vs_grid_oracle():
    model = symmetric_pair()
    t0 = time.perf_counter()
    grid_best = max(
        sf.surrogate(model, CapacityAllocation(np.array([c1, 10.0 - c1]))).value
        for c1 in np.linspace(0.0, 10.0, 101)
    )
    alloc, trace = sf.maximize_surrogate(model)
    elapsed = time.perf_counter() - t0
    phi_star = trace.final_value
    dev_alloc = float(np.max(np.abs(alloc.values - 5.0))) / 5.0
    dev_phi = abs(phi_star - grid_best) / abs(grid_best)
    ok = (
        dev_alloc <= 0.02
        and dev_phi <= 0.01
        and trace.certificate <= 1e-5 * (1.0 + abs(phi_star))
        and elapsed < 60.0
    )
    _verdict(8, "outer solver vs 101-point grid oracle", ok,
             f"alloc dev {dev_alloc:.2%}, phi dev {dev_phi:.2e}, "
             f"cert {trace.certificate:.1e}, {elapsed:.1f}s")


def test_criterion_09_reconfiguration_vs_enumeration():
    model = three_potentials()
    oracle_best = None
    for mask in itertools.product((0, 1), repeat=3):
        if sum(mask) > 1:
            continue
        scaled = sf.NetworkModel(
            physicals=tuple(
                sf.PhysicalEntity(p.id, p.ctype, p.capacity * mask[k])
                for k, p in enumerate(model.physicals)
            ),
            logicals=model.logicals,
            flows=model.flows,
        )
        _, trace = sf.maximize_surrogate(scaled)
        if oracle_best is None or trace.final_value > oracle_best[1]:
            oracle_best = (mask, trace.final_value)
    result = sf.solve_reconfig(sf.ReconfigProblem(model=model, budget=1.0))
    active = np.asarray(result.active, dtype=float)
    is_01 = bool(np.all((active == 0.0) | (active == 1.0)))
    in_budget = float(active.sum()) <= 1.0 + 1e-12
    matches = tuple(int(a) for a in active) == oracle_best[0]
    ok = is_01 and in_budget and matches
    _verdict(9, "reconfigurable solve vs exhaustive 0-1 enumeration", ok,
             f"active={[int(a) for a in active]}, oracle={list(oracle_best[0])}, "
             f"0-1={is_01}, budget ok={in_budget}")


def test_criterion_10_simulation_vs_analytic():
    detail = []
    ok = True
    for nu, cap in ((1.0, 1.0), (5.0, 10.0)):
        model = single_entity(nu, kind="erlang_b")
        alloc = CapacityAllocation(np.array([float(cap)]))
        config = sf.SimConfig(seed=11, horizon=2e5, warmup=1e4)
        t0 = time.perf_counter()
        res = sf.simulate(model, alloc, config)
        elapsed = time.perf_counter() - t0
        exact = erlang_recursion(nu, int(cap))
        dev = abs(float(res.blocking[0]) - exact)
        within = dev <= 3.0 * float(res.blocking_se[0])
        # same seed, bit-identical output
        twin = sf.simulate(model, alloc, config)
        identical = (
            np.array_equal(res.blocking, twin.blocking)
            and np.array_equal(res.blocking_se, twin.blocking_se)
            and np.array_equal(res.carried, twin.carried)
            and np.array_equal(res.carried_se, twin.carried_se)
            and np.array_equal(res.arrivals, twin.arrivals)
            and np.array_equal(res.admitted, twin.admitted)
            and np.array_equal(res.blocked, twin.blocked)
            and res.events == twin.events
        )
        ok = ok and within and identical and elapsed < 30.0
        detail.append(
            f"(nu={nu:g},C={cap:g}): dev {dev:.1e} vs 3SE "
            f"{3*float(res.blocking_se[0]):.1e}, identical={identical}, {elapsed:.1f}s"
        )
    _verdict(10, "simulation within 3 SE of analytic blocking", ok, "; ".join(detail))
