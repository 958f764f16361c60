"""Exhaustive evaluation of small instances, used to check the DP tables.

The oracle expands the decision tree outcome by outcome: every valuation atom,
both channel states, the success coin and the harvest coin.  At each
information node it compares the two actions directly, so no threshold, gap
or tail integral is involved.  Subtrees are cached on ``(battery, remaining)``,
which is exact because rewards and transitions depend on nothing else.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .channel import ChannelModel
from .dp import DpConfig, compute_tables
from .errors import TooLarge
from .policies import Action, DecisionContext, Greedy, Periodic, PolicyKind, StaticThreshold
from .valuation import ValuationModel

MAX_SUPPORT = 4
MAX_BATTERY = 4
MAX_MEASUREMENTS = 6


@dataclass(frozen=True)
class OracleInstance:
    """``observe_channel`` False makes the decision before the channel is seen."""

    valuation: ValuationModel
    channel: ChannelModel
    pi: float
    n0: int
    n: int
    shutdown_on_empty: bool = True
    observe_channel: bool = True

    def check(self) -> None:
        if self.valuation.kind != "discrete":
            raise TooLarge("oracle needs a discrete valuation")
        if len(self.valuation.support) > MAX_SUPPORT:
            raise TooLarge(f"support of {len(self.valuation.support)} exceeds {MAX_SUPPORT}")
        if not 0 <= self.n0 <= MAX_BATTERY:
            raise TooLarge(f"N0={self.n0} outside 0..{MAX_BATTERY}")
        if not 0 <= self.n <= MAX_MEASUREMENTS:
            raise TooLarge(f"n={self.n} outside 0..{MAX_MEASUREMENTS}")

    def atoms(self):
        U = self.valuation.utility
        return [(v, p, float(U(v))) for v, p in zip(self.valuation.support, self.valuation.probs)]

    def channel_outcomes(self):
        g = self.channel.good_prob
        return [(self.channel.alpha1, g), (self.channel.alpha0, 1.0 - g)]


def _harvest(inst: OracleInstance, battery: int, future) -> float:
    """Average ``future(battery')`` over the harvest coin, applying shutdown."""
    total = 0.0
    for gained, w in ((1, inst.pi), (0, 1.0 - inst.pi)):
        if w == 0:
            continue
        b = battery + gained
        if b == 0 and inst.shutdown_on_empty:
            continue
        total += w * future(b)
    return total


def oracle_value(inst: OracleInstance) -> float:
    """Optimal expected total utility from ``(n0, n)``."""
    inst.check()
    atoms = inst.atoms()
    chan = inst.channel_outcomes()

    @lru_cache(maxsize=None)
    def best(battery: int, remaining: int) -> float:
        if remaining == 0:
            return 0.0
        if battery == 0 and inst.shutdown_on_empty:
            return 0.0
        nxt = remaining - 1

        def skip() -> float:
            return _harvest(inst, battery, lambda b: best(b, nxt))

        def send(u: float, ps: float) -> float:
            total = 0.0
            for reward, w in ((u, ps), (0.0, 1.0 - ps)):
                if w == 0:
                    continue
                total += w * (reward + _harvest(inst, battery - 1, lambda b: best(b, nxt)))
            return total

        value = 0.0
        for _, p, u in atoms:
            if inst.observe_channel:
                for ps, w in chan:
                    options = [skip()]
                    if battery >= 1:
                        options.append(send(u, ps))
                    value += p * w * max(options)
            else:
                options = [skip()]
                if battery >= 1:
                    options.append(sum(w * send(u, ps) for ps, w in chan))
                value += p * max(options)
        return value

    return best(inst.n0, inst.n)


def oracle_policy_value(inst: OracleInstance, policy: PolicyKind) -> float:
    """Exact expected total utility of a fixed ``policy``."""
    inst.check()
    atoms = inst.atoms()
    chan = inst.channel_outcomes()

    @lru_cache(maxsize=None)
    def value(battery: int, remaining: int) -> float:
        if remaining == 0:
            return 0.0
        if battery == 0 and inst.shutdown_on_empty:
            return 0.0
        slot = inst.n - remaining
        nxt = remaining - 1
        total = 0.0
        for x, p, u in atoms:
            for ps, w in chan:
                act = Action.DISCARD
                if battery >= 1:
                    act = policy.decide(DecisionContext(slot, x, ps, battery, remaining))
                if act is Action.TRANSMIT:
                    branch = ps * u + _harvest(inst, battery - 1, lambda b: value(b, nxt))
                else:
                    branch = _harvest(inst, battery, lambda b: value(b, nxt))
                total += p * w * branch
        return total

    return value(inst.n0, inst.n)


@dataclass(frozen=True)
class VerifyRow:
    valuation: str
    pi: float
    n0: int
    n: int
    dp_value: float
    oracle: float
    delta: float
    worst_baseline: float
    passed: bool


def verify_grid(channel: ChannelModel, valuations, pis, battery_levels, measurements, *,
                shutdown_on_empty: bool = True, recursion: str = "channel_aware",
                tolerance: float = 1e-9) -> list[VerifyRow]:
    """Compare DP values with the oracle over a grid of small instances.

    A row passes when the two agree within ``tolerance`` and no baseline
    (greedy, periodic 3/5, static at every support point) beats the oracle.
    """
    observe = recursion == "channel_aware"
    rows = []
    for val in valuations:
        label = "{" + ",".join(f"{v:g}:{p:g}" for v, p in zip(val.support, val.probs)) + "}"
        baselines = [Greedy(), Periodic(3), Periodic(5)] + [StaticThreshold(v) for v in val.support]
        for pi in pis:
            for n in measurements:
                tables = compute_tables(DpConfig(val, channel, pi, n, shutdown_on_empty, recursion))
                for n0 in battery_levels:
                    inst = OracleInstance(val, channel, pi, n0, n, shutdown_on_empty, observe)
                    best = oracle_value(inst)
                    dp_value = tables.ev(n0, n)
                    worst = max(oracle_policy_value(inst, b) - best for b in baselines)
                    delta = abs(dp_value - best)
                    rows.append(VerifyRow(label, pi, n0, n, dp_value, best, delta, worst,
                                          delta <= tolerance and worst <= tolerance))
    return rows
