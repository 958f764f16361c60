"""Slot-by-slot Monte Carlo of a sensor running a transmission policy.

Within a slot the order of events is: sense ``x``; observe the channel state;
decide (forced DISCARD on an empty battery); on TRANSMIT spend one unit and
earn ``U(x)`` if the success coin falls below ``p_s``; harvest one unit if the
harvest coin falls below ``pi``; count the slot; shut down if the battery is
empty and ``shutdown_on_empty`` holds.

Each replication draws one trace (valuations, channel states, success and
harvest coins) from its own stream and replays it for every policy and every
initial battery level.  :func:`run_slot` is the scalar reference step;
:func:`run_lanes` advances many (replication, N0) lanes at once and must agree
with it exactly.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .dp import DpConfig, PolicyTables, compute_tables
from .errors import InvalidState
from .policies import Action, DecisionContext, Optimal, PolicyKind

_CHUNK = 2000


@dataclass(frozen=True)
class SensorState:
    battery: int
    remaining: int
    alive: bool = True
    attempts: int = 0
    successes: int = 0
    harvested: int = 0


class SlotDraws(NamedTuple):
    x: float
    good: bool
    success_coin: float
    harvest_coin: float


@dataclass(frozen=True)
class Trace:
    """Random inputs for ``horizon`` slots; arrays are (horizon,) or (reps, horizon)."""

    x: np.ndarray
    good: np.ndarray
    success_coin: np.ndarray
    harvest_coin: np.ndarray

    def slot(self, i: int) -> SlotDraws:
        return SlotDraws(float(self.x[i]), bool(self.good[i]),
                         float(self.success_coin[i]), float(self.harvest_coin[i]))


@dataclass(frozen=True)
class SimOutcome:
    policy: str
    n0: int
    replication: int
    total_utility: float
    battery_lifetime: int
    attempts: int
    successes: int
    harvested: int
    final_battery: int


@dataclass(frozen=True)
class SimConfig:
    dp: DpConfig
    horizon: int = 1000
    initial_battery_levels: tuple[int, ...] = tuple(range(1, 101))
    replications: int = 100
    seed: int = 0
    policies: tuple = ()
    threads: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.initial_battery_levels or min(self.initial_battery_levels) < 1:
            raise ValueError("initial battery levels must be >= 1")
        if self.horizon < 1 or self.horizon > self.dp.n_max:
            raise ValueError("horizon must lie in 1..dp.n_max")
        if not self.policies:
            raise ValueError("at least one policy is required")


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    """Independent stream for one replication, fixed by (seed, replication)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replication,)))


def draw_trace(cfg: DpConfig, horizon: int, rng: np.random.Generator) -> Trace:
    x = np.asarray(cfg.valuation.sample(rng, horizon), dtype=float)
    good = np.asarray(cfg.channel.sample_state(rng, horizon), dtype=bool)
    return Trace(x, good, rng.random(horizon), rng.random(horizon))


def run_slot(state: SensorState, policy: PolicyKind, draws: SlotDraws, cfg: DpConfig,
             slot_index: int) -> tuple[SensorState, float]:
    if not state.alive or state.remaining < 1:
        raise InvalidState("run_slot called on a sensor that is shut down or finished")
    ch = cfg.channel
    p_s = ch.alpha1 if draws.good else ch.alpha0
    battery, utility = state.battery, 0.0
    attempts, successes, harvested = state.attempts, state.successes, state.harvested
    if battery >= 1:
        ctx = DecisionContext(slot_index, draws.x, p_s, battery, state.remaining)
        if policy.decide(ctx) is Action.TRANSMIT:
            battery -= 1
            attempts += 1
            if draws.success_coin < p_s:
                successes += 1
                utility = float(cfg.valuation.utility(draws.x))
    if draws.harvest_coin < cfg.pi:
        battery += 1
        harvested += 1
    alive = not (battery == 0 and cfg.shutdown_on_empty)
    new = SensorState(battery, state.remaining - 1, alive, attempts, successes, harvested)
    return new, utility


def simulate_trace(policy: PolicyKind, trace: Trace, n0: int, cfg: DpConfig,
                   replication: int = 0) -> SimOutcome:
    """Scalar reference run of one sensor over one trace."""
    horizon = len(trace.x)
    state = SensorState(n0, horizon)
    total, lifetime = 0.0, horizon
    for i in range(horizon):
        state, u = run_slot(state, policy, trace.slot(i), cfg, i)
        total += u
        if not state.alive:
            lifetime = i + 1
            break
    return SimOutcome(policy.name, n0, replication, total, lifetime, state.attempts,
                      state.successes, state.harvested, state.battery)


@dataclass
class LaneResult:
    total_utility: np.ndarray
    lifetime: np.ndarray
    attempts: np.ndarray
    successes: np.ndarray
    harvested: np.ndarray
    final_battery: np.ndarray


def run_lanes(policy: PolicyKind, trace: Trace, lane_rep: np.ndarray, lane_n0: np.ndarray,
              cfg: DpConfig) -> LaneResult:
    """Advance every lane through the whole horizon in lockstep.

    ``trace`` arrays are (reps, horizon); lane ``k`` replays row
    ``lane_rep[k]`` starting from ``lane_n0[k]`` units.
    """
    horizon = trace.x.shape[1]
    lanes = len(lane_rep)
    battery = np.asarray(lane_n0, dtype=np.int64).copy()
    alive = np.ones(lanes, dtype=bool)
    total = np.zeros(lanes)
    lifetime = np.full(lanes, horizon, dtype=np.int64)
    attempts = np.zeros(lanes, dtype=np.int64)
    successes = np.zeros(lanes, dtype=np.int64)
    harvested = np.zeros(lanes, dtype=np.int64)
    a0, a1 = cfg.channel.alpha0, cfg.channel.alpha1
    utility = cfg.valuation.utility

    for i in range(horizon):
        if not alive.any():
            break
        x = trace.x[lane_rep, i]
        p_s = np.where(trace.good[lane_rep, i], a1, a0)
        remaining = horizon - i
        can = alive & (battery >= 1)
        tx = np.zeros(lanes, dtype=bool)
        if can.any():
            tx[can] = policy.decide_batch(i, x[can], p_s[can], battery[can], np.full(can.sum(), remaining))
        battery -= tx
        attempts += tx
        ok = tx & (trace.success_coin[lane_rep, i] < p_s)
        successes += ok
        if ok.any():
            total[ok] += np.asarray(utility(x[ok]), dtype=float)
        got = alive & (trace.harvest_coin[lane_rep, i] < cfg.pi)
        battery += got
        harvested += got
        if cfg.shutdown_on_empty:
            died = alive & (battery == 0)
            lifetime[died] = i + 1
            alive &= ~died
    return LaneResult(total, lifetime, attempts, successes, harvested, battery)


def _bind(policies: Sequence[PolicyKind], tables: PolicyTables | None) -> list[PolicyKind]:
    out = []
    for p in policies:
        if isinstance(p, Optimal) and p.tables is None:
            p = replace(p, tables=tables)
        out.append(p)
    return out


def _resolve_threads(threads: int) -> int:
    if threads and threads > 0:
        return threads
    return os.cpu_count() or 1


def run_campaign(cfg: SimConfig, tables: PolicyTables | None = None) -> list[SimOutcome]:
    """Run every policy at every initial battery level over shared traces.

    Outcomes are sorted by (policy name, N0, replication) and depend only on
    the config and seed, not on ``threads``.
    """
    needs_tables = any(isinstance(p, Optimal) and p.tables is None for p in cfg.policies)
    if needs_tables and tables is None:
        tables = compute_tables(cfg.dp)
    policies = _bind(cfg.policies, tables)
    levels = np.asarray(sorted(set(cfg.initial_battery_levels)), dtype=np.int64)

    reps = np.arange(cfg.replications)
    chunks = [reps[i:i + _CHUNK] for i in range(0, len(reps), _CHUNK)]

    def work(chunk):
        traces = [draw_trace(cfg.dp, cfg.horizon, replication_rng(cfg.seed, int(r))) for r in chunk]
        stacked = Trace(*(np.stack([getattr(t, f) for t in traces]) for f in Trace.__dataclass_fields__))
        lane_rep = np.tile(np.arange(len(chunk)), len(levels))
        lane_n0 = np.repeat(levels, len(chunk))
        rows = []
        for p in policies:
            res = run_lanes(p, stacked, lane_rep, lane_n0, cfg.dp)
            for k in range(len(lane_rep)):
                rows.append(SimOutcome(
                    p.name, int(lane_n0[k]), int(chunk[lane_rep[k]]), float(res.total_utility[k]),
                    int(res.lifetime[k]), int(res.attempts[k]), int(res.successes[k]),
                    int(res.harvested[k]), int(res.final_battery[k])))
        return rows

    threads = min(_resolve_threads(cfg.threads), len(chunks))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    outcomes = [o for part in parts for o in part]
    outcomes.sort(key=lambda o: (o.policy, o.n0, o.replication))
    return outcomes


@dataclass(frozen=True)
class Summary:
    policy: str
    n0: int
    count: int
    mean_utility: float
    ci95_utility: float
    mean_lifetime: float
    ci95_lifetime: float


def _mean_ci(values: Sequence[float]) -> tuple[float, float]:
    k = len(values)
    mean = math.fsum(values) / k
    if k < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (k - 1)
    return mean, 1.959963984540054 * math.sqrt(var / k)


def summarize(outcomes: Sequence[SimOutcome]) -> list[Summary]:
    """Per-(policy, N0) sample means with normal-approximation 95% half-widths."""
    if not outcomes:
        raise ValueError("nothing to summarize")
    groups: dict[tuple[str, int], list[SimOutcome]] = {}
    for o in sorted(outcomes, key=lambda o: (o.policy, o.n0, o.replication)):
        groups.setdefault((o.policy, o.n0), []).append(o)
    out = []
    for (policy, n0), rows in groups.items():
        mu, cu = _mean_ci([r.total_utility for r in rows])
        ml, cl = _mean_ci([float(r.battery_lifetime) for r in rows])
        out.append(Summary(policy, n0, len(rows), mu, cu, ml, cl))
    return out
