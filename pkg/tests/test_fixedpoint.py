import math

import numpy as np
import pytest

from sliceforge import (
    CapacityAllocation,
    FixedPointOptions,
    Flow,
    LogicalEntity,
    LossSpec,
    NetworkModel,
    PhysicalEntity,
    carried_total,
    diagnostics,
    loss,
    no_blocking_loads,
    solve_fixed_point,
)

from conftest import random_small_instance, single_entity, symmetric_pair


def test_single_entity_offered_equals_input_load():
    # the (1 - F) factors cancel, so rho = nu for every family and capacity
    for kind in ("erlang_b", "linear_clip", "exp_overflow"):
        for cap in (0.5, 1.0, 3.7, 12.0):
            for nu in (0.3, 1.0, 6.0):
                model = single_entity(nu, kind=kind)
                state = solve_fixed_point(model, CapacityAllocation([cap]))
                assert state.converged
                assert state.offered[0] == pytest.approx(nu, abs=1e-8)


def test_linear_clip_double_demand_closed_form():
    # one flow holding two units on one clipped entity: rho = 2 nu / rho
    model = single_entity(1.0, kind="linear_clip", demand=2)
    state = solve_fixed_point(model, CapacityAllocation([1.0]))
    assert state.converged
    assert state.offered[0] == pytest.approx(math.sqrt(2.0), abs=1e-8)
    assert carried_total(model, state) == pytest.approx(0.5, abs=1e-8)


def test_zero_flows():
    model = NetworkModel(
        physicals=(PhysicalEntity("p", "u", 1.0),),
        logicals=(LogicalEntity("l", ("p",), LossSpec("erlang_b")),),
        flows=(),
    )
    state = solve_fixed_point(model, CapacityAllocation([1.0]))
    assert state.converged and state.iterations == 1
    assert state.offered.tolist() == [0.0]
    assert state.carried_per_flow.shape == (0,)
    d = diagnostics(model, CapacityAllocation([1.0]), state)
    assert d.carried_total == 0.0 and d.modified_objective == 0.0 and d.correction == 0.0


def test_blocking_is_recomputable(small_instances):
    for model, alloc in small_instances[:15]:
        state = solve_fixed_point(model, alloc)
        for i, lg in enumerate(model.logicals):
            expect = loss(lg.loss, float(state.offered[i]), float(alloc.values[i]))
            assert state.blocking[i] == pytest.approx(expect, abs=1e-12)


def test_carried_load_identity(small_instances):
    from sliceforge import demand_matrix, offered_vector

    for model, alloc in small_instances[:15]:
        state = solve_fixed_point(model, alloc)
        a = demand_matrix(model)
        nu = offered_vector(model)
        expect = nu * np.prod((1.0 - state.blocking)[:, None] ** a, axis=0)
        assert state.carried_per_flow == pytest.approx(expect.tolist(), rel=1e-10)
        assert np.all(state.carried_per_flow <= nu + 1e-12)
        assert carried_total(model, state) == pytest.approx(float(state.carried_per_flow.sum()))


def test_residual_meets_tolerance(small_instances):
    for model, alloc in small_instances[:15]:
        state = solve_fixed_point(model, alloc)
        assert state.converged
        assert state.residual <= 1e-9


def test_non_convergence_is_reported_not_raised():
    # the double-demand instance iterates from rho = 2 toward sqrt(2), so a
    # two-step budget cannot reach the 1e-9 residual
    model = single_entity(1.0, kind="linear_clip", demand=2)
    state = solve_fixed_point(
        model, CapacityAllocation([1.0]), FixedPointOptions(max_iters=2)
    )
    assert not state.converged
    assert state.iterations == 2
    assert state.residual > 1e-9


def test_fully_blocked_entity():
    # zero capacity on the only entity: B = 1, carried load 0, offered
    # pinned at the no-blocking load rather than dividing by 1 - F = 0
    model = single_entity(3.0, kind="erlang_b")
    state = solve_fixed_point(model, CapacityAllocation([0.0]))
    assert state.converged
    assert state.blocking[0] == 1.0
    assert state.offered[0] == pytest.approx(no_blocking_loads(model)[0])
    assert carried_total(model, state) == 0.0


def test_ample_capacity_carries_everything():
    model = symmetric_pair(nu=2.0, phys_cap=200.0)
    state = solve_fixed_point(model, CapacityAllocation([100.0, 100.0]))
    assert np.all(state.blocking < 1e-12)
    assert carried_total(model, state) == pytest.approx(4.0, rel=1e-9)


def test_diagnostics_linear_clip_worked_example():
    model = single_entity(2.0, kind="linear_clip")
    alloc = CapacityAllocation([1.0])
    state = solve_fixed_point(model, alloc)
    d = diagnostics(model, alloc, state)
    assert state.blocking[0] == pytest.approx(0.5, abs=1e-9)
    assert d.carried_total == pytest.approx(1.0, abs=1e-8)
    assert d.correction == pytest.approx(math.log(2.0), rel=1e-6)
    assert d.modified_objective == pytest.approx(1.0 + math.log(2.0), rel=1e-6)
    assert d.correction_bound == pytest.approx(1.0, abs=1e-8)
    assert d.correction <= d.correction_bound


def test_weighted_carried_and_route_length():
    # one flow of length 2 (demands two entities), one of length 1
    model = NetworkModel(
        physicals=(PhysicalEntity("p", "u", 50.0),),
        logicals=(
            LogicalEntity("a", ("p",), LossSpec("erlang_b")),
            LogicalEntity("b", ("p",), LossSpec("erlang_b")),
        ),
        flows=(Flow("f1", 1.0, {"a": 1, "b": 1}), Flow("f2", 2.0, {"b": 1})),
    )
    alloc = CapacityAllocation([20.0, 20.0])
    state = solve_fixed_point(model, alloc)
    d = diagnostics(model, alloc, state)
    assert d.max_route_length == 2.0
    c1, c2 = state.carried_per_flow
    assert d.weighted_carried == pytest.approx(2.0 * c1 + 1.0 * c2, rel=1e-12)


def test_correction_bounds_on_random_instances(small_instances):
    for model, alloc in small_instances[:40]:
        state = solve_fixed_point(model, alloc)
        assert state.converged
        d = diagnostics(model, alloc, state)
        assert 0.0 <= d.correction <= d.correction_bound + 1e-12


def test_carried_load_monotone_in_capacity():
    # raising one logical capacity never hurts total carried load; with a
    # non-unique fixed point this could in principle fail, so any hit is
    # reported loudly rather than silently tolerated
    violations = []
    for seed in range(30):
        model, alloc = random_small_instance(seed)
        base = carried_total(model, solve_fixed_point(model, alloc))
        rng = np.random.default_rng(1000 + seed)
        i = int(rng.integers(0, model.m))
        bumped = alloc.values.copy()
        bumped[i] += float(rng.uniform(0.1, 1.0))
        t2 = carried_total(model, solve_fixed_point(model, CapacityAllocation(bumped)))
        if t2 < base - 1e-9:
            violations.append((seed, i, base, t2))
    assert violations == []


def test_infeasible_allocation_still_solvable():
    # feasibility is not a precondition of the load system
    model = symmetric_pair(phys_cap=10.0)
    state = solve_fixed_point(model, CapacityAllocation([50.0, 50.0]))
    assert state.converged
    assert np.all(state.blocking < 1e-10)
