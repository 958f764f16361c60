"""Two-state abstraction of a Rayleigh-faded uplink.

The gain ``h`` is exponential with mean ``1/mu``.  A slot is GOOD when
``h >= rho_th`` (boundary included) and then succeeds with probability
``alpha1``; otherwise it is BAD and succeeds with ``alpha0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelModel:
    alpha0: float = 0.2
    alpha1: float = 0.8
    mu: float = 0.5
    rho_th: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha0 <= self.alpha1 <= 1.0:
            raise ValueError("channel needs 0 <= alpha0 <= alpha1 <= 1")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError("channel needs a finite mu > 0")
        if not (self.rho_th >= 0 and math.isfinite(self.rho_th)):
            raise ValueError("channel needs a finite rho_th >= 0")

    @property
    def good_prob(self) -> float:
        """P(h >= rho_th) = exp(-mu * rho_th)."""
        return math.exp(-self.mu * self.rho_th)

    def expected_success_prob(self) -> float:
        return self.alpha0 + self.good_prob * (self.alpha1 - self.alpha0)

    def success_prob_given_gain(self, h):
        out = np.where(np.asarray(h, dtype=float) >= self.rho_th, self.alpha1, self.alpha0)
        return float(out) if out.ndim == 0 else out

    def states(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """``((weight, success_prob), ...)`` for the good and bad states."""
        g = self.good_prob
        return (g, self.alpha1), (1.0 - g, self.alpha0)

    def sample_gain(self, rng: np.random.Generator, size=None):
        return rng.exponential(1.0 / self.mu, size)

    def sample_state(self, rng: np.random.Generator, size=None):
        """Draw gains and return True where the channel is good."""
        return np.asarray(self.sample_gain(rng, size)) >= self.rho_th
