"""Valuation distributions of sensed data and the utility map applied to them.

A :class:`ValuationModel` bundles the law of the per-slot valuation ``X`` with
a monotone :class:`UtilityMap`.  Everything the backward induction needs is
exposed array-wise: ``tail_utility(a) = E[U(X); X >= a]`` and
``survival(a) = P(X >= a)``.  Cut-offs are inclusive so that the "transmit when
``x >= threshold``" rule and the tables agree even for atoms of a discrete law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import integrate

from .errors import NonConvergence

QUAD_TOL = 1e-10
_PROBE_POINTS = 1000


@dataclass(frozen=True)
class UtilityMap:
    """Strictly increasing utility ``U`` together with its inverse.

    ``slope`` is set for the linear family ``U(x) = slope * x``; the DP uses it
    to stay on closed-form integrals.
    """

    forward: Callable[[float], float]
    inverse: Callable[[float], float]
    slope: float | None = None
    name: str = "custom"

    @classmethod
    def identity(cls) -> "UtilityMap":
        return cls(_identity, _identity, slope=1.0, name="identity")

    @classmethod
    def linear(cls, slope: float) -> "UtilityMap":
        if not slope > 0:
            raise ValueError("linear utility needs a positive slope")
        return cls(_Scale(slope), _Scale(1.0 / slope), slope=float(slope), name=f"linear({slope:g})")

    def __call__(self, x):
        if self.slope is not None:
            return self.slope * np.asarray(x, dtype=float)
        return _apply(self.forward, x)

    def inv(self, u):
        if self.slope is not None:
            return np.asarray(u, dtype=float) / self.slope
        return _apply(self.inverse, u)


def _identity(x):
    return x


@dataclass(frozen=True)
class _Scale:
    factor: float

    def __call__(self, x):
        return self.factor * x


def _apply(fn, x):
    arr = np.asarray(x, dtype=float)
    out = np.vectorize(fn, otypes=[float])(arr)
    return out if arr.ndim else float(out)


IDENTITY = UtilityMap.identity()


@dataclass(frozen=True)
class ValuationModel:
    """Law of the valuation ``X`` plus the utility map.

    Use the :meth:`exponential`, :meth:`uniform` and :meth:`discrete`
    constructors rather than filling the fields by hand.
    """

    kind: str
    rate: float = 0.0
    lower: float = 0.0
    upper: float = 0.0
    support: tuple[float, ...] = ()
    probs: tuple[float, ...] = ()
    utility: UtilityMap = field(default=IDENTITY, compare=False)

    def __post_init__(self):
        if self.kind == "exponential":
            if not (self.rate > 0 and math.isfinite(self.rate)):
                raise ValueError("exponential valuation needs a finite rate > 0")
        elif self.kind == "uniform":
            if not (self.lower >= 0 and self.upper > self.lower and math.isfinite(self.upper)):
                raise ValueError("uniform valuation needs 0 <= lower < upper < inf")
        elif self.kind == "discrete":
            if not self.support or len(self.support) != len(self.probs):
                raise ValueError("discrete valuation needs matching, nonempty support and probs")
            if any(v < 0 or not math.isfinite(v) for v in self.support):
                raise ValueError("discrete support values must be finite and >= 0")
            if len(set(self.support)) != len(self.support):
                raise ValueError("discrete support values must be distinct")
            if any(p < 0 for p in self.probs) or abs(math.fsum(self.probs) - 1.0) > 1e-12:
                raise ValueError("discrete probabilities must be >= 0 and sum to 1")
            if list(self.support) != sorted(self.support):
                raise ValueError("discrete support must be sorted; use ValuationModel.discrete")
        else:
            raise ValueError(f"unknown valuation kind {self.kind!r}")
        if not self.mean > 0:
            raise ValueError("valuation mean must be positive")
        if self.utility.slope is None:
            _check_utility(self.utility, self._probe_points())

    # -- constructors ---------------------------------------------------------

    @classmethod
    def exponential(cls, rate: float, utility: UtilityMap = IDENTITY) -> "ValuationModel":
        return cls("exponential", rate=float(rate), utility=utility)

    @classmethod
    def uniform(cls, lower: float, upper: float, utility: UtilityMap = IDENTITY) -> "ValuationModel":
        return cls("uniform", lower=float(lower), upper=float(upper), utility=utility)

    @classmethod
    def discrete(
        cls,
        support: Sequence[float] | Mapping[float, float],
        probs: Sequence[float] | None = None,
        utility: UtilityMap = IDENTITY,
    ) -> "ValuationModel":
        if isinstance(support, Mapping):
            pairs = sorted((float(v), float(p)) for v, p in support.items())
        else:
            if probs is None:
                raise ValueError("probs required when support is a sequence")
            pairs = sorted(zip(map(float, support), map(float, probs)))
        return cls(
            "discrete",
            support=tuple(v for v, _ in pairs),
            probs=tuple(p for _, p in pairs),
            utility=utility,
        )

    @classmethod
    def from_dict(cls, entry: Mapping, utility: UtilityMap = IDENTITY) -> "ValuationModel":
        kind = entry.get("kind")
        if kind == "exponential":
            return cls.exponential(entry["rate"], utility)
        if kind == "uniform":
            return cls.uniform(entry["lower"], entry["upper"], utility)
        if kind == "discrete":
            return cls.discrete(entry["support"], entry["probs"], utility)
        raise ValueError(f"unknown valuation kind {kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "exponential":
            return {"kind": "exponential", "rate": self.rate}
        if self.kind == "uniform":
            return {"kind": "uniform", "lower": self.lower, "upper": self.upper}
        return {"kind": "discrete", "support": list(self.support), "probs": list(self.probs)}

    # -- distribution ---------------------------------------------------------

    @property
    def mean(self) -> float:
        if self.kind == "exponential":
            return 1.0 / self.rate
        if self.kind == "uniform":
            return 0.5 * (self.lower + self.upper)
        return math.fsum(v * p for v, p in zip(self.support, self.probs))

    @property
    def expected_utility(self) -> float:
        """E[U(X)]."""
        if self.utility.slope is not None:
            return self.utility.slope * self.mean
        return float(self.tail_utility(self.lower if self.kind == "uniform" else 0.0))

    @property
    def support_max(self) -> float:
        if self.kind == "exponential":
            return math.inf
        if self.kind == "uniform":
            return self.upper
        return self.support[-1]

    def pdf(self, x):
        """Density at ``x``; for the discrete kind, the probability mass."""
        x = np.asarray(x, dtype=float)
        if self.kind == "exponential":
            out = np.where(x >= 0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)
        elif self.kind == "uniform":
            out = np.where((x >= self.lower) & (x <= self.upper), 1.0 / (self.upper - self.lower), 0.0)
        else:
            v, p = self._arrays()
            idx = np.clip(np.searchsorted(v, x), 0, len(v) - 1)
            out = np.where(v[idx] == x, p[idx], 0.0)
        return _scalar(out)

    def cdf(self, x):
        """P(X <= x)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "exponential":
            out = np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)
        elif self.kind == "uniform":
            out = np.clip((x - self.lower) / (self.upper - self.lower), 0.0, 1.0)
        else:
            v, p = self._arrays()
            cum = np.concatenate(([0.0], np.cumsum(p)))
            out = np.minimum(cum[np.searchsorted(v, x, side="right")], 1.0)
        return _scalar(out)

    def survival(self, a):
        """P(X >= a), inclusive at the cut-off."""
        a = np.asarray(a, dtype=float)
        if self.kind == "discrete":
            v, p = self._arrays()
            suffix = _suffix_sums(p)
            return _scalar(suffix[np.searchsorted(v, a, side="left")])
        return _scalar(1.0 - np.asarray(self.cdf(a)))

    def ppf(self, u):
        """Inverse cdf: smallest x with cdf(x) >= u."""
        u = np.asarray(u, dtype=float)
        if self.kind == "exponential":
            out = -np.log1p(-u) / self.rate
        elif self.kind == "uniform":
            out = self.lower + u * (self.upper - self.lower)
        else:
            v, p = self._arrays()
            cum = np.cumsum(p)
            out = v[np.minimum(np.searchsorted(cum, u, side="left"), len(v) - 1)]
        return _scalar(out)

    def tail_utility(self, a):
        """E[U(X) 1{X >= a}] for cut-off(s) ``a``.

        Closed form for exponential/uniform under linear utility, finite sum
        for discrete laws, adaptive quadrature otherwise.
        """
        a = np.asarray(a, dtype=float)
        slope = self.utility.slope
        if self.kind == "discrete":
            v, p = self._arrays()
            suffix = _suffix_sums(np.asarray(self.utility(v)) * p)
            return _scalar(suffix[np.searchsorted(v, a, side="left")])
        if slope is None:
            flat = [self.tail_utility_quad(float(c)) for c in a.ravel()]
            return _scalar(np.asarray(flat, dtype=float).reshape(a.shape))
        if self.kind == "exponential":
            c = np.maximum(a, 0.0)
            out = np.exp(-self.rate * c) * (c + 1.0 / self.rate)
        else:
            lo, hi = self.lower, self.upper
            c = np.clip(a, lo, hi)
            out = (hi * hi - c * c) / (2.0 * (hi - lo))
        return _scalar(slope * out)

    def tail_utility_quad(self, a: float, tol: float = QUAD_TOL) -> float:
        """Adaptive-quadrature evaluation of the tail integral (continuous kinds)."""
        if self.kind == "discrete":
            raise ValueError("quadrature path is for continuous valuations")
        U = self.utility.forward if self.utility.slope is None else self.utility

        def integrand(x):
            return float(U(x)) * float(self.pdf(x))

        if self.kind == "exponential":
            lo, hi = max(a, 0.0), math.inf
        else:
            lo, hi = max(a, self.lower), self.upper
            if lo >= hi:
                return 0.0
        res = integrate.quad(integrand, lo, hi, epsabs=tol, epsrel=1e-13, limit=200, full_output=1)
        value, err = res[0], res[1]
        if len(res) > 3 or err > tol:
            raise NonConvergence(f"tail integral from {a} did not reach {tol:g} (error {err:.3g})")
        return value

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-cdf draws from ``rng``."""
        return self.ppf(rng.random(size))

    # -- helpers --------------------------------------------------------------

    def _arrays(self):
        return np.asarray(self.support, dtype=float), np.asarray(self.probs, dtype=float)

    def _probe_points(self) -> np.ndarray:
        if self.kind == "discrete":
            return np.asarray(self.support, dtype=float)
        u = (np.arange(_PROBE_POINTS) + 0.5) / _PROBE_POINTS
        return np.asarray(self.ppf(u), dtype=float)


def _check_utility(utility: UtilityMap, points: np.ndarray) -> None:
    fx = np.asarray(utility(points), dtype=float)
    if np.any(np.diff(fx) <= 0) and len(points) > 1:
        raise ValueError(f"utility {utility.name} is not strictly increasing on the support")
    back = np.asarray(utility.inv(fx), dtype=float)
    if np.any(np.abs(back - points) > 1e-9 * np.maximum(1.0, np.abs(points))):
        raise ValueError(f"utility {utility.name}: inverse does not undo forward")


def _suffix_sums(w: np.ndarray) -> np.ndarray:
    # suffix[i] = sum(w[i:]), with a trailing 0 for cut-offs above the support
    return np.concatenate((np.cumsum(w[::-1])[::-1], [0.0]))


def _scalar(arr):
    arr = np.asarray(arr)
    return float(arr) if arr.ndim == 0 else arr
