"""Discrete-event admission simulator for validating the analytic model.

Poisson arrivals per flow, unit-mean exponential holding times, and
atomic all-or-nothing admission: an arrival takes its full demand on
every entity of its route or is blocked outright.  Entities hold
integer capacities and blocked work is lost (no retries, no queueing),
which is exactly the regime the erlang_b loss family describes, so
only erlang_b models are accepted.

Determinism: each flow owns a counter-based Philox stream keyed by
(seed, flow index), so results are bit-identical for a given seed and
independent of scheduling or platform.  Every arrival consumes its
(interarrival, holding) draw whether or not it is admitted.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .model import CapacityAllocation, NetworkModel, demand_matrix, offered_vector

__all__ = ["SimConfig", "SimResult", "simulate"]

_CHUNK = 65536

RNG_DESCRIPTION = "philox4x64 per-flow streams, key=(seed, flow_index)"


@dataclass(frozen=True)
class SimConfig:
    seed: int
    horizon: float
    warmup: float = 0.0
    batches: int = 20
    debug: bool = False  # verify occupancy invariants after every event

    def __post_init__(self):
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not (0 <= self.seed < 2**64):
            raise ValueError("seed must be an integer in [0, 2^64)")
        if not (math.isfinite(self.horizon) and self.horizon > 0.0):
            raise ValueError("horizon must be finite and > 0")
        if not (0.0 <= self.warmup < self.horizon):
            raise ValueError("warmup must lie in [0, horizon)")
        if self.batches < 2:
            raise ValueError("need at least 2 batches for standard errors")


@dataclass(frozen=True)
class SimResult:
    """Batch-means estimates (post-warmup) plus whole-run event counts."""

    blocking: np.ndarray = field(repr=False)  # per-flow blocking estimate
    blocking_se: np.ndarray = field(repr=False)
    carried: np.ndarray = field(repr=False)  # nu_r * admitted fraction
    carried_se: np.ndarray = field(repr=False)
    arrivals: np.ndarray = field(repr=False)  # whole-run counts per flow
    admitted: np.ndarray = field(repr=False)
    blocked: np.ndarray = field(repr=False)
    events: int
    rng: str = RNG_DESCRIPTION


def _flow_stream(seed: int, index: int, rate: float, horizon: float):
    """Arrival times in (0, horizon] and matching holding times."""
    if rate <= 0.0:
        return np.empty(0), np.empty(0)
    bits = np.random.Philox(key=np.array([seed, index], dtype=np.uint64))
    gen = np.random.Generator(bits)
    parts = []
    last = 0.0
    while last <= horizon:
        gaps = gen.exponential(1.0 / rate, size=_CHUNK)
        times = last + np.cumsum(gaps)
        parts.append(times)
        last = float(times[-1])
    times = np.concatenate(parts)
    times = times[times <= horizon]
    holds = gen.exponential(1.0, size=times.size)
    return times, holds


def simulate(model: NetworkModel, alloc: CapacityAllocation, config: SimConfig) -> SimResult:
    for lg in model.logicals:
        if lg.loss.kind != "erlang_b":
            raise ValueError(f"simulation requires erlang_b loss on every logical entity (got '{lg.loss.kind}' on '{lg.id}')")
    raw = np.asarray(alloc.values, dtype=float)
    if raw.size != model.m:
        raise ValueError(f"allocation length {raw.size} != m={model.m}")
    caps = np.rint(raw)
    if np.any(np.abs(raw - caps) > 1e-9):
        raise ValueError("simulation requires integer capacities")
    caps = [int(c) for c in caps]

    nu = offered_vector(model)
    demands = demand_matrix(model).astype(np.int64)
    num_flows = model.num_flows
    routes = [
        [(j, int(demands[j, r])) for j in range(model.m) if demands[j, r]]
        for r in range(num_flows)
    ]

    streams = [_flow_stream(config.seed, r, float(nu[r]), config.horizon) for r in range(num_flows)]
    if num_flows:
        times = np.concatenate([s[0] for s in streams])
        holds = np.concatenate([s[1] for s in streams])
        flow_of = np.concatenate(
            [np.full(s[0].size, r, dtype=np.int64) for r, s in enumerate(streams)]
        )
        order = np.argsort(times, kind="stable")
    else:
        times = holds = np.empty(0)
        flow_of = np.empty(0, dtype=np.int64)
        order = np.empty(0, dtype=np.int64)

    occupied = [0] * model.m
    admitted_flag = np.zeros(times.size, dtype=bool)
    heap: list[tuple[float, int, int]] = []  # (departure time, seq, flow)
    seq = 0
    events = 0

    def release(flow: int) -> None:
        for j, units in routes[flow]:
            occupied[j] -= units

    def invariant() -> None:
        assert all(0 <= occupied[j] <= caps[j] for j in range(model.m)), "occupancy out of range"

    times_list = times.tolist()
    holds_list = holds.tolist()
    flow_list = flow_of.tolist()
    for idx in order.tolist():
        t = times_list[idx]
        while heap and heap[0][0] <= t:
            release(heapq.heappop(heap)[2])
            events += 1
            if config.debug:
                invariant()
        flow = flow_list[idx]
        route = routes[flow]
        for j, units in route:
            if occupied[j] + units > caps[j]:
                break
        else:
            for j, units in route:
                occupied[j] += units
            heapq.heappush(heap, (t + holds_list[idx], seq, flow))
            seq += 1
            admitted_flag[idx] = True
        events += 1
        if config.debug:
            invariant()
    while heap and heap[0][0] <= config.horizon:
        release(heapq.heappop(heap)[2])
        events += 1
        if config.debug:
            invariant()

    post_warmup = sum(
        int(times.size - np.searchsorted(times, config.warmup, side="right"))
        for times, _ in streams
    )
    if post_warmup < config.batches and float(nu.sum()) > 0.0:
        raise ValueError("horizon too short for requested batches")

    edges = np.linspace(config.warmup, config.horizon, config.batches + 1)
    blocking = np.zeros(num_flows)
    blocking_se = np.zeros(num_flows)
    carried = np.zeros(num_flows)
    carried_se = np.zeros(num_flows)
    arrivals = np.zeros(num_flows, dtype=np.int64)
    admitted = np.zeros(num_flows, dtype=np.int64)
    offset = 0
    root_batches = math.sqrt(config.batches)
    for r in range(num_flows):
        flow_times = streams[r][0]
        count = flow_times.size
        flags = admitted_flag[offset : offset + count]
        offset += count
        arrivals[r] = count
        admitted[r] = int(flags.sum())
        cut = np.searchsorted(flow_times, edges, side="right")
        arr_b = np.diff(cut).astype(float)
        cum = np.concatenate([[0], np.cumsum(flags)])
        adm_b = (cum[cut[1:]] - cum[cut[:-1]]).astype(float)
        # empty batch: no arrivals to block, so its blocking sample is 0
        block_b = np.where(arr_b > 0, (arr_b - adm_b) / np.maximum(arr_b, 1.0), 0.0)
        blocking[r] = float(block_b.mean())
        blocking_se[r] = float(block_b.std(ddof=1) / root_batches)
        carried_b = nu[r] * (1.0 - block_b)
        carried[r] = float(carried_b.mean())
        carried_se[r] = float(carried_b.std(ddof=1) / root_batches)

    return SimResult(
        blocking=blocking,
        blocking_se=blocking_se,
        carried=carried,
        carried_se=carried_se,
        arrivals=arrivals,
        admitted=admitted,
        blocked=arrivals - admitted,
        events=events,
    )
