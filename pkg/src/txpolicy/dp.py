"""Backward induction for the transmit/discard problem.

State is ``(N, n)``: ``N`` battery units and ``n`` measurements remaining.  In
each slot the sensor sees the valuation ``x`` and the channel success
probability ``p_s``; transmitting spends one unit and earns ``U(x)`` with
probability ``p_s``.  After the decision one unit is harvested with
probability ``pi``.  Writing

    cont_tx(N, n) = pi * EV(N,   n-1) + (1-pi) * EV(N-1, n-1)
    cont_skip(N, n) = pi * EV(N+1, n-1) + (1-pi) * EV(N,   n-1)
    gap(N, n) = cont_skip - cont_tx

the sensor transmits iff ``U(x) * p_s >= gap``, i.e. ``x >= U^-1(gap / p_s)``.

Two recursions are offered:

``channel_aware`` (default)
    the expectation is taken per channel state with that state's own
    threshold, so ``EV`` is the value of the runtime policy that looks the
    channel up before deciding.
``averaged``
    one threshold ``U^-1(gap / E[P_s])`` per cell, the value of a policy that
    decides before seeing the channel.

Cells with ``N >= n`` are never stored: every slot is worth transmitting and
``EV = n * E[U(X)] * E[P_s]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel
from .errors import OutOfRange
from .valuation import ValuationModel

RECURSIONS = ("channel_aware", "averaged")


@dataclass(frozen=True)
class DpConfig:
    valuation: ValuationModel
    channel: ChannelModel
    pi: float = 0.0
    n_max: int = 1000
    shutdown_on_empty: bool = True
    recursion: str = "channel_aware"

    def __post_init__(self):
        if not 0.0 <= self.pi <= 1.0:
            raise ValueError("harvest probability pi must lie in [0, 1]")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError("n_max must be a positive integer")
        if self.recursion not in RECURSIONS:
            raise ValueError(f"recursion must be one of {RECURSIONS}")


def _offset(n):
    return n * (n + 1) // 2


@dataclass(frozen=True, eq=False)
class PolicyTables:
    """Expected values and value gaps on the triangle ``0 <= N <= n <= n_max``.

    Entries are packed column by column: cell ``(N, n)`` lives at
    ``n*(n+1)/2 + N``.
    """

    config: DpConfig
    ev_packed: np.ndarray
    gap_packed: np.ndarray
    expected_utility: float
    expected_success: float

    @property
    def n_max(self) -> int:
        return self.config.n_max

    @property
    def full_slot_value(self) -> float:
        """E[U(X)] * E[P_s], the value of one unconditional transmission."""
        return self.expected_utility * self.expected_success

    def _check(self, N, n):
        if n < 0 or n > self.n_max or N < 0:
            raise OutOfRange(f"cell (N={N}, n={n}) outside table with n_max={self.n_max}")

    def ev(self, N: int, n: int) -> float:
        self._check(N, n)
        if N > n:
            return n * self.full_slot_value
        return float(self.ev_packed[_offset(n) + N])

    def gap(self, N: int, n: int) -> float:
        self._check(N, n)
        if N >= n:
            return 0.0
        return float(self.gap_packed[_offset(n) + N])

    def threshold(self, N: int, n: int, p_s: float) -> float:
        """Smallest valuation worth transmitting in state ``(N, n)`` at success prob ``p_s``."""
        if N < 1 or n < 1:
            raise OutOfRange(f"no decision at (N={N}, n={n})")
        self._check(N, n)
        if N >= n:
            return 0.0
        return _threshold_value(self.config.valuation, self.gap(N, n), p_s)

    def gap_array(self, N, n) -> np.ndarray:
        """Vectorised ``gap`` for integer arrays ``N >= 0`` and ``0 <= n <= n_max``."""
        N = np.asarray(N, dtype=np.int64)
        n = np.asarray(n, dtype=np.int64)
        if np.any(n > self.n_max) or np.any(n < 0) or np.any(N < 0):
            raise OutOfRange("gap lookup outside table")
        inside = N < n
        idx = _offset(n) + np.where(inside, N, 0)
        return np.where(inside, self.gap_packed[idx], 0.0)

    def threshold_array(self, N, n, p_s) -> np.ndarray:
        gap = self.gap_array(N, n)
        p_s = np.broadcast_to(np.asarray(p_s, dtype=float), gap.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(p_s > 0, gap / np.where(p_s > 0, p_s, 1.0), np.inf)
        ratio = np.where(gap <= 0, 0.0, ratio)
        out = np.asarray(self.config.valuation.utility.inv(ratio), dtype=float)
        return np.where(gap <= 0, 0.0, out)

    def column(self, n: int) -> np.ndarray:
        """EV(0..n, n) as a fresh array."""
        self._check(0, n)
        return self.ev_packed[_offset(n): _offset(n) + n + 1].copy()


def _threshold_value(valuation: ValuationModel, gap: float, p_s: float) -> float:
    if gap <= 0:
        return 0.0
    if p_s <= 0:
        return math.inf
    return float(valuation.utility.inv(gap / p_s))


def compute_tables(cfg: DpConfig) -> PolicyTables:
    """Fill EV and gap for every cell of the triangle by backward induction."""
    val, pi = cfg.valuation, cfg.pi
    eu = val.expected_utility
    ps_mean = cfg.channel.expected_success_prob()
    q = eu * ps_mean
    if cfg.recursion == "channel_aware":
        states = [(w, ps) for w, ps in cfg.channel.states() if w > 0]
    else:
        states = [(1.0, ps_mean)]

    size = _offset(cfg.n_max + 1)
    ev = np.zeros(size)
    gap = np.zeros(size)
    prev = np.zeros(1)  # EV(., 0)
    for n in range(1, cfg.n_max + 1):
        # EV(k, n-1) for k = 0..n+1; entries past the stored column are (n-1)*q
        ext = np.empty(n + 2)
        ext[:n] = prev
        ext[n:] = (n - 1) * q
        lo, mid, hi = ext[0:n - 1], ext[1:n], ext[2:n + 1]  # EV(N-1), EV(N), EV(N+1) for N=1..n-1
        cont_tx = pi * mid + (1.0 - pi) * lo
        cont_skip = pi * hi + (1.0 - pi) * mid
        g = np.maximum(cont_skip - cont_tx, 0.0)

        col = np.empty(n + 1)
        col[0] = 0.0 if cfg.shutdown_on_empty else pi * ext[1] + (1.0 - pi) * ext[0]
        value = np.zeros(n - 1)
        for w, ps in states:
            if ps <= 0:
                value += w * cont_skip
                continue
            a = np.asarray(val.utility.inv(g / ps), dtype=float)
            a = np.where(g <= 0, -np.inf, a)
            surv = np.asarray(val.survival(a), dtype=float)
            tail = np.asarray(val.tail_utility(a), dtype=float)
            value += w * (ps * tail + surv * cont_tx + (1.0 - surv) * cont_skip)
        col[1:n] = value
        col[n] = n * q

        base = _offset(n)
        ev[base: base + n + 1] = col
        gap[base + 1: base + n] = g
        prev = col
    return PolicyTables(cfg, ev, gap, eu, ps_mean)


def threshold_for(tables: PolicyTables, N: int, n: int, p_s: float) -> float:
    return tables.threshold(N, n, p_s)


# -- closed forms printed for small horizons (identity utility) ---------------

def closed_form_exponential_a12(rate: float, pi: float, channel: ChannelModel, p_s: float) -> float:
    return (1.0 - pi) * channel.expected_success_prob() / (rate * p_s)


def closed_form_exponential_a13(rate: float, pi: float, channel: ChannelModel, p_s: float, inner: float) -> float:
    """Printed three-slot threshold; ``inner`` is the two-slot threshold it references."""
    eps = channel.expected_success_prob()
    e1 = math.exp(-rate * inner)
    e2 = math.exp(-2.0 * rate * inner)
    return ((3 * pi - pi ** 2 + e1 * (pi - 1)) * eps / (rate * p_s)
            + (1 - 2 * pi) * (1 + e2 * (rate * inner + 1)) / p_s)


def closed_form_uniform_a12(lower: float, upper: float, pi: float, channel: ChannelModel, p_s: float) -> float:
    return (1.0 - pi) * (upper + lower) * channel.expected_success_prob() / (2.0 * p_s)


def closed_form_uniform_a13(lower: float, upper: float, pi: float, channel: ChannelModel, p_s: float) -> float:
    eps = channel.expected_success_prob()
    return ((-4 * pi ** 2 + 5 * pi + 1) * (upper + lower) * eps / (4 * p_s)
            + (3 * upper ** 2 + 2 * upper * lower + lower ** 2) * (1 - 2 * pi) * eps
            / (16 * (upper - lower) * p_s))
