"""JSON experiment configuration: parsing, validation and defaults.

An empty object ``{}`` describes the reference experiment: exponential
valuations with unit rate, alpha1=0.8, alpha0=0.2, rho_th=0.5, mu=0.5, no
harvesting, 1000-slot horizon, N0 = 1..100 and 100 replications.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from .channel import ChannelModel
from .dp import RECURSIONS, DpConfig
from .errors import ParseError, ValidationError
from .policies import Optimal, Greedy, Periodic, StaticThreshold, default_static_levels
from .simulator import SimConfig
from .valuation import UtilityMap, ValuationModel

TOP_LEVEL_KEYS = {
    "valuation", "utility", "alpha0", "alpha1", "mu", "rho_th", "pi", "tau",
    "horizon", "shutdown_on_empty", "recursion", "initial_battery_levels",
    "replications", "seed", "threads", "policies", "verify",
}

DEFAULT_VERIFY_VALUATIONS = (
    {"kind": "discrete", "support": [0.5, 1.5], "probs": [0.5, 0.5]},
    {"kind": "discrete", "support": [0.2, 1.0, 3.0], "probs": [0.3, 0.5, 0.2]},
    {"kind": "discrete", "support": [0.0, 0.7, 1.9, 4.2], "probs": [0.1, 0.4, 0.3, 0.2]},
)


@dataclass(frozen=True)
class VerifyOptions:
    valuations: tuple[ValuationModel, ...]
    pis: tuple[float, ...] = (0.0, 0.3)
    initial_battery_levels: tuple[int, ...] = (1, 2, 3)
    measurements: tuple[int, ...] = (2, 3, 4, 5, 6)
    tolerance: float = 1e-9


@dataclass(frozen=True)
class ExperimentConfig:
    dp: DpConfig
    sim: SimConfig
    verify: VerifyOptions
    tau: float = 0.01  # slot length in seconds; documentation only

    def with_overrides(self, seed: int | None = None, threads: int | None = None) -> "ExperimentConfig":
        sim = self.sim
        if seed is not None:
            sim = replace(sim, seed=seed)
        if threads is not None:
            sim = replace(sim, threads=threads)
        return replace(self, sim=sim)


def load_config(path: str | os.PathLike | None) -> ExperimentConfig:
    if path is None:
        return parse_config({})
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not text.strip():
        return parse_config({})
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_config(raw)


# -- field checkers ------------------------------------------------------------

def _obj(path: str, value: Any, allowed: set[str]) -> dict:
    if not isinstance(value, dict):
        raise ValidationError(path, "expected an object")
    extra = sorted(set(value) - allowed)
    if extra:
        where = f"{path}.{extra[0]}" if path else extra[0]
        raise ValidationError(where, "unknown key")
    return value


def _num(path: str, value: Any, lo: float = -math.inf, hi: float = math.inf,
         lo_open: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValidationError(path, "expected a finite number")
    if value < lo or value > hi or (lo_open and value == lo):
        bound = f"({lo}, {hi}]" if lo_open else f"[{lo}, {hi}]"
        raise ValidationError(path, f"{value} outside {bound}")
    return float(value)


def _int(path: str, value: Any, lo: int = 0, hi: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(path, "expected an integer")
    if value < lo or (hi is not None and value > hi):
        raise ValidationError(path, f"{value} out of range")
    return value


def _bool(path: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise ValidationError(path, "expected true or false")
    return value


def _int_list(path: str, value: Any, lo: int) -> tuple[int, ...]:
    if isinstance(value, dict):
        _obj(path, value, {"start", "stop", "step"})
        start = _int(f"{path}.start", value.get("start", 1), lo)
        stop = _int(f"{path}.stop", value.get("stop", start), start)
        step = _int(f"{path}.step", value.get("step", 1), 1)
        return tuple(range(start, stop + 1, step))
    if not isinstance(value, list) or not value:
        raise ValidationError(path, "expected a nonempty list or {start, stop, step}")
    return tuple(_int(f"{path}[{i}]", v, lo) for i, v in enumerate(value))


def _utility(path: str, value: Any) -> UtilityMap:
    entry = _obj(path, value, {"kind", "slope"})
    kind = entry.get("kind", "identity")
    if kind == "identity":
        if "slope" in entry:
            raise ValidationError(f"{path}.slope", "identity utility takes no slope")
        return UtilityMap.identity()
    if kind == "linear":
        return UtilityMap.linear(_num(f"{path}.slope", entry.get("slope", 1.0), 0.0, lo_open=True))
    raise ValidationError(f"{path}.kind", f"unknown utility kind {kind!r}")


def _valuation(path: str, value: Any, utility: UtilityMap) -> ValuationModel:
    if not isinstance(value, dict):
        raise ValidationError(path, "expected an object")
    kind = value.get("kind")
    if kind == "exponential":
        entry = _obj(path, value, {"kind", "rate"})
        if "rate" not in entry:
            raise ValidationError(f"{path}.rate", "required")
        return ValuationModel.exponential(_num(f"{path}.rate", entry["rate"], 0.0, lo_open=True), utility)
    if kind == "uniform":
        entry = _obj(path, value, {"kind", "lower", "upper"})
        lower = _num(f"{path}.lower", entry.get("lower", 0.0), 0.0)
        if "upper" not in entry:
            raise ValidationError(f"{path}.upper", "required")
        upper = _num(f"{path}.upper", entry["upper"])
        if upper <= lower:
            raise ValidationError(f"{path}.upper", "must exceed lower")
        return ValuationModel.uniform(lower, upper, utility)
    if kind == "discrete":
        entry = _obj(path, value, {"kind", "support", "probs"})
        support, probs = entry.get("support"), entry.get("probs")
        if not isinstance(support, list) or not support:
            raise ValidationError(f"{path}.support", "expected a nonempty list")
        if not isinstance(probs, list) or len(probs) != len(support):
            raise ValidationError(f"{path}.probs", "expected a list matching support")
        vals = [_num(f"{path}.support[{i}]", v, 0.0) for i, v in enumerate(support)]
        ps = [_num(f"{path}.probs[{i}]", p, 0.0, 1.0) for i, p in enumerate(probs)]
        if abs(math.fsum(ps) - 1.0) > 1e-12:
            raise ValidationError(f"{path}.probs", "probabilities must sum to 1")
        try:
            return ValuationModel.discrete(vals, ps, utility)
        except ValueError as exc:
            raise ValidationError(path, str(exc)) from exc
    raise ValidationError(f"{path}.kind", f"unknown valuation kind {kind!r}")


def _policy(path: str, value: Any, valuation: ValuationModel):
    if not isinstance(value, dict):
        raise ValidationError(path, "expected an object")
    kind = value.get("kind")
    if kind == "optimal":
        _obj(path, value, {"kind"})
        return Optimal()
    if kind == "greedy":
        _obj(path, value, {"kind"})
        return Greedy()
    if kind == "periodic":
        entry = _obj(path, value, {"kind", "period"})
        if "period" not in entry:
            raise ValidationError(f"{path}.period", "required")
        return Periodic(_int(f"{path}.period", entry["period"], 1))
    if kind == "static":
        entry = _obj(path, value, {"kind", "level", "quantile"})
        if ("level" in entry) == ("quantile" in entry):
            raise ValidationError(path, "give exactly one of level or quantile")
        if "level" in entry:
            return StaticThreshold(_num(f"{path}.level", entry["level"], 0.0))
        q = _num(f"{path}.quantile", entry["quantile"], 0.0, 1.0)
        return StaticThreshold(float(valuation.ppf(q)))
    raise ValidationError(f"{path}.kind", f"unknown policy kind {kind!r}")


def _verify(path: str, value: Any) -> VerifyOptions:
    entry = _obj(path, value, {"valuations", "pis", "initial_battery_levels", "measurements", "tolerance"})
    raw_vals = entry.get("valuations", list(DEFAULT_VERIFY_VALUATIONS))
    if not isinstance(raw_vals, list) or not raw_vals:
        raise ValidationError(f"{path}.valuations", "expected a nonempty list")
    valuations = []
    for i, v in enumerate(raw_vals):
        model = _valuation(f"{path}.valuations[{i}]", v, UtilityMap.identity())
        if model.kind != "discrete":
            raise ValidationError(f"{path}.valuations[{i}].kind", "oracle checks need discrete valuations")
        valuations.append(model)
    pis = entry.get("pis", [0.0, 0.3])
    if not isinstance(pis, list) or not pis:
        raise ValidationError(f"{path}.pis", "expected a nonempty list")
    return VerifyOptions(
        valuations=tuple(valuations),
        pis=tuple(_num(f"{path}.pis[{i}]", p, 0.0, 1.0) for i, p in enumerate(pis)),
        initial_battery_levels=_int_list(f"{path}.initial_battery_levels",
                                         entry.get("initial_battery_levels", [1, 2, 3]), 0),
        measurements=_int_list(f"{path}.measurements", entry.get("measurements", [2, 3, 4, 5, 6]), 1),
        tolerance=_num(f"{path}.tolerance", entry.get("tolerance", 1e-9), 0.0, lo_open=True),
    )


def parse_config(raw: Any) -> ExperimentConfig:
    cfg = _obj("", raw, TOP_LEVEL_KEYS)
    utility = _utility("utility", cfg.get("utility", {"kind": "identity"}))
    valuation = _valuation("valuation", cfg.get("valuation", {"kind": "exponential", "rate": 1.0}), utility)

    alpha0 = _num("alpha0", cfg.get("alpha0", 0.2), 0.0, 1.0)
    alpha1 = _num("alpha1", cfg.get("alpha1", 0.8), 0.0, 1.0)
    if alpha0 > alpha1:
        raise ValidationError("alpha0", f"alpha0={alpha0} exceeds alpha1={alpha1}")
    channel = ChannelModel(
        alpha0, alpha1,
        _num("mu", cfg.get("mu", 0.5), 0.0, lo_open=True),
        _num("rho_th", cfg.get("rho_th", 0.5), 0.0),
    )

    recursion = cfg.get("recursion", "channel_aware")
    if recursion not in RECURSIONS:
        raise ValidationError("recursion", f"expected one of {list(RECURSIONS)}")
    horizon = _int("horizon", cfg.get("horizon", 1000), 1)
    dp = DpConfig(
        valuation, channel,
        pi=_num("pi", cfg.get("pi", 0.0), 0.0, 1.0),
        n_max=horizon,
        shutdown_on_empty=_bool("shutdown_on_empty", cfg.get("shutdown_on_empty", True)),
        recursion=recursion,
    )

    if "policies" in cfg:
        raw_policies = cfg["policies"]
        if not isinstance(raw_policies, list) or not raw_policies:
            raise ValidationError("policies", "expected a nonempty list")
        policies = [_policy(f"policies[{i}]", p, valuation) for i, p in enumerate(raw_policies)]
    else:
        policies = [Optimal(), Greedy(), Periodic(3), Periodic(5)]
        policies += [StaticThreshold(level) for level in default_static_levels(valuation)]
    names = [p.name for p in policies]
    if len(set(names)) != len(names):
        raise ValidationError("policies", "duplicate policy entries")

    sim = SimConfig(
        dp, horizon,
        initial_battery_levels=_int_list("initial_battery_levels",
                                         cfg.get("initial_battery_levels", {"start": 1, "stop": 100}), 1),
        replications=_int("replications", cfg.get("replications", 100), 1),
        seed=_int("seed", cfg.get("seed", 0), 0, 2 ** 64 - 1),
        policies=tuple(policies),
        threads=_int("threads", cfg.get("threads", 0), 0),
    )
    verify = _verify("verify", cfg.get("verify", {}))
    tau = _num("tau", cfg.get("tau", 0.01), 0.0, lo_open=True)
    return ExperimentConfig(dp, sim, verify, tau)
