"""Transmit/discard rules: the DP threshold policy and the comparison baselines.

Every policy answers the same question through :func:`decide` (one slot) or
``decide_batch`` (many simulation lanes at once).  Baselines ignore the
channel state; battery gating is the simulator's job.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .dp import PolicyTables
from .valuation import ValuationModel


class Action(enum.Enum):
    TRANSMIT = "transmit"
    DISCARD = "discard"


@dataclass(frozen=True)
class DecisionContext:
    slot_index: int
    valuation: float
    success_prob: float
    battery: int
    remaining: int


@dataclass(frozen=True, eq=False)
class Optimal:
    """Runtime lookup of the DP thresholds with the slot's own success probability.

    ``tables`` may be left unset in a configuration; the simulator binds the
    tables it computes.
    """

    tables: PolicyTables | None = None

    @property
    def name(self) -> str:
        return "optimal"

    def _tables(self) -> PolicyTables:
        if self.tables is None:
            raise ValueError("optimal policy has no tables bound")
        return self.tables

    def decide(self, ctx: DecisionContext) -> Action:
        a = self._tables().threshold(ctx.battery, ctx.remaining, ctx.success_prob)
        return Action.TRANSMIT if ctx.valuation >= a else Action.DISCARD

    def decide_batch(self, slot_index, x, p_s, battery, remaining):
        a = self._tables().threshold_array(battery, remaining, p_s)
        return x >= a


@dataclass(frozen=True)
class Greedy:
    @property
    def name(self) -> str:
        return "greedy"

    def decide(self, ctx: DecisionContext) -> Action:
        return Action.TRANSMIT

    def decide_batch(self, slot_index, x, p_s, battery, remaining):
        return np.ones(np.shape(x), dtype=bool)


@dataclass(frozen=True)
class Periodic:
    """Transmit on every ``period``-th slot: indices period-1, 2*period-1, ..."""

    period: int

    def __post_init__(self):
        if int(self.period) != self.period or self.period < 1:
            raise ValueError("periodic policy needs an integer period >= 1")

    @property
    def name(self) -> str:
        return f"periodic({self.period})"

    def _on(self, slot_index) -> bool:
        return slot_index % self.period == self.period - 1

    def decide(self, ctx: DecisionContext) -> Action:
        return Action.TRANSMIT if self._on(ctx.slot_index) else Action.DISCARD

    def decide_batch(self, slot_index, x, p_s, battery, remaining):
        return np.full(np.shape(x), self._on(slot_index), dtype=bool)


@dataclass(frozen=True)
class StaticThreshold:
    level: float

    def __post_init__(self):
        if not self.level >= 0:
            raise ValueError("static threshold level must be >= 0")

    @property
    def name(self) -> str:
        return f"static({self.level:.9g})"

    def decide(self, ctx: DecisionContext) -> Action:
        return Action.TRANSMIT if ctx.valuation >= self.level else Action.DISCARD

    def decide_batch(self, slot_index, x, p_s, battery, remaining):
        return np.asarray(x) >= self.level


PolicyKind = Union[Optimal, Greedy, Periodic, StaticThreshold]


def decide(policy: PolicyKind, ctx: DecisionContext) -> Action:
    return policy.decide(ctx)


def default_static_levels(valuation: ValuationModel) -> list[float]:
    """Quartiles of the valuation law, used when no levels are configured."""
    return [float(valuation.ppf(u)) for u in (0.25, 0.5, 0.75)]


def default_policies(valuation: ValuationModel) -> list[PolicyKind]:
    return [Optimal(), Greedy(), Periodic(3), Periodic(5)] + [
        StaticThreshold(level) for level in default_static_levels(valuation)
    ]


def policy_from_dict(entry: dict, valuation: ValuationModel) -> PolicyKind:
    """Build a policy from its config form.

    ``{"kind": "static", "quantile": q}`` is accepted as shorthand for the
    level at quantile ``q`` of the valuation law.
    """
    kind = entry.get("kind")
    if kind == "optimal":
        return Optimal()
    if kind == "greedy":
        return Greedy()
    if kind == "periodic":
        return Periodic(int(entry["period"]))
    if kind == "static":
        if "level" in entry:
            level = entry["level"]
            return StaticThreshold(math.inf if level == "inf" else float(level))
        return StaticThreshold(float(valuation.ppf(float(entry["quantile"]))))
    raise ValueError(f"unknown policy kind {kind!r}")
