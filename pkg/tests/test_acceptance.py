"""Acceptance criteria; each test records one PASS/FAIL line shown after the run."""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from randomgrid import random_configs
from txpolicy import (ChannelModel, DpConfig, Greedy, Optimal, Periodic, SimConfig, StaticThreshold,
                      ValuationModel, compute_tables, run_campaign, summarize, threshold_for)
from txpolicy.cli import RESULT_COLUMNS, result_rows
from txpolicy.config import DEFAULT_VERIFY_VALUATIONS, parse_config
from txpolicy.dp import (closed_form_exponential_a12, closed_form_exponential_a13, closed_form_uniform_a12,
                         closed_form_uniform_a13)
from txpolicy.oracle import verify_grid
from txpolicy.report import render_csv

pytestmark = pytest.mark.acceptance

CHANNEL = ChannelModel(0.2, 0.8, 0.5, 0.5)
EXPO = ValuationModel.exponential(1.0)
UNIF = ValuationModel.uniform(0.0, 2.0)


def record(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_criterion_1_expected_success_probability():
    start = time.perf_counter()
    closed = 0.2 + 0.6 * math.exp(-0.25)
    value = CHANNEL.expected_success_prob()
    ps = CHANNEL.success_prob_given_gain(CHANNEL.sample_gain(np.random.default_rng(101), 10**6))
    mc, se = ps.mean(), ps.std(ddof=1) / 1000.0
    elapsed = time.perf_counter() - start
    ok = abs(value - closed) <= 1e-12 and abs(mc - value) <= 3 * se and elapsed < 1.0
    assert record("1 E[Ps]", ok, f"value={value:.15f} |closed diff|={abs(value - closed):.1e} "
                  f"mc={mc:.6f} z={(mc - value) / se:+.2f} time={elapsed:.2f}s")


def test_criterion_2_closed_form_thresholds():
    eps = CHANNEL.expected_success_prob()
    worst = 0.0
    for pi in (0.0, 0.1):
        te = compute_tables(DpConfig(EXPO, CHANNEL, pi, 3))
        tu = compute_tables(DpConfig(UNIF, CHANNEL, pi, 3))
        for p in (0.2, 0.8, eps):
            worst = max(worst, abs(threshold_for(te, 1, 2, p) - closed_form_exponential_a12(1.0, pi, CHANNEL, p)),
                        abs(threshold_for(tu, 1, 2, p) - closed_form_uniform_a12(0.0, 2.0, pi, CHANNEL, p)))
            # printed three-slot forms: reported only
            inner = closed_form_exponential_a12(1.0, pi, CHANNEL, p)
            de = closed_form_exponential_a13(1.0, pi, CHANNEL, p, inner) - threshold_for(te, 1, 3, p)
            du = closed_form_uniform_a13(0.0, 2.0, pi, CHANNEL, p) - threshold_for(tu, 1, 3, p)
            ACCEPTANCE_LINES.append(f"INFO  2 a13 printed-form deviation pi={pi} p_s={p:.6f}: "
                                    f"exponential {de:+.6f}, uniform {du:+.6f}")
    assert record("2 a12 closed forms", worst <= 1e-9, f"max |dp - closed| = {worst:.2e} over 12 cases")


def test_criterion_3_oracle_equivalence():
    start = time.perf_counter()
    cfg = parse_config({})
    valuations = cfg.verify.valuations
    assert len(valuations) == len(DEFAULT_VERIFY_VALUATIONS)
    rows = verify_grid(CHANNEL, valuations, (0.0, 0.3), (1, 2, 3), (2, 3, 4, 5, 6), tolerance=1e-9)
    elapsed = time.perf_counter() - start
    worst = max(r.delta for r in rows)
    excess = max(r.worst_baseline for r in rows)
    ok = all(r.passed for r in rows) and elapsed < 60
    assert record("3 oracle equivalence", ok, f"{sum(r.passed for r in rows)}/{len(rows)} instances, "
                  f"max |dp - oracle|={worst:.1e}, max baseline excess={excess:.1e}, time={elapsed:.1f}s")


def test_criterion_4_monte_carlo_consistency():
    start = time.perf_counter()
    dp = DpConfig(EXPO, CHANNEL, 0.0, 1000)
    tables = compute_tables(dp)
    out = run_campaign(SimConfig(dp, 1000, (5, 20, 50), 10**4, 2024, (Optimal(),), 0), tables)
    elapsed = time.perf_counter() - start
    parts, ok = [], elapsed < 120
    for n0 in (5, 20, 50):
        vals = np.array([o.total_utility for o in out if o.n0 == n0])
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        z = (vals.mean() - tables.ev(n0, 1000)) / se
        ok &= abs(z) <= 3
        parts.append(f"N0={n0} mean={vals.mean():.4f} ev={tables.ev(n0, 1000):.4f} z={z:+.2f}")
    assert record("4 Monte Carlo vs ev", ok, "; ".join(parts) + f"; time={elapsed:.1f}s")


# -- criterion 5: desk-scale policy orderings ---------------------------------

LEVELS = tuple(range(1, 101, 5))
SCENARIOS = {"exponential pi=0": (EXPO, 0.0), "exponential pi=0.1": (EXPO, 0.1), "uniform pi=0": (UNIF, 0.0)}


def _policies(valuation):
    levels = [float(valuation.ppf(u)) for u in (0.25, 0.5, 0.75)]
    return (Optimal(), Greedy(), Periodic(3), Periodic(5)) + tuple(StaticThreshold(v) for v in levels)


@pytest.fixture(scope="module")
def figure_runs():
    start = time.perf_counter()
    runs = {}
    for label, (val, pi) in SCENARIOS.items():
        dp = DpConfig(val, CHANNEL, pi, 1000)
        out = run_campaign(SimConfig(dp, 1000, LEVELS, 100, 7, _policies(val), 0))
        runs[label] = {(s.policy, s.n0): s for s in summarize(out)}
    return runs, time.perf_counter() - start


def _baselines(summary):
    return sorted({p for p, _ in summary if p != "optimal"})


def test_criterion_5a_optimal_utility_dominates(figure_runs):
    runs, elapsed = figure_runs
    bad = [(lab, p, n0) for lab, s in runs.items() for p in _baselines(s) for n0 in LEVELS
           if s[(p, n0)].mean_utility > s[("optimal", n0)].mean_utility]
    assert record("5a optimal utility >= baselines", not bad and elapsed < 300,
                  f"{len(bad)} violations over {len(runs)} scenarios x {len(LEVELS)} levels; "
                  f"campaign time={elapsed:.1f}s" + (f"; first {bad[0]}" if bad else ""))


def test_criterion_5b_greedy_lifetime(figure_runs):
    runs, _ = figure_runs
    bad = [(lab, n0, s[("greedy", n0)].mean_lifetime) for lab, s in runs.items() if "pi=0.1" not in lab
           for n0 in LEVELS if s[("greedy", n0)].mean_lifetime != n0]
    assert record("5b greedy lifetime = N0 at pi=0", not bad, f"{len(bad)} mismatches")


def test_criterion_5c_optimal_lifetime(figure_runs):
    runs, _ = figure_runs
    bad = [(lab, p, n0) for lab, s in runs.items() for p in _baselines(s) for n0 in LEVELS
           if s[(p, n0)].mean_lifetime > s[("optimal", n0)].mean_lifetime]
    record("5c(i) optimal lifetime >= baselines", not bad, f"{len(bad)} violations")
    u = runs["uniform pi=0"]
    short = {n0: u[("optimal", n0)].mean_lifetime for n0 in LEVELS if n0 <= 10}
    long_enough = all(v >= 900 for v in short.values())
    record("5c(ii) uniform pi=0 optimal lifetime >= 900 for N0<=10", long_enough,
           ", ".join(f"N0={k}: {v:.1f}" for k, v in short.items()))
    ok = not bad and long_enough
    assert record("5c optimal lifetime", ok, "both clauses" if ok else "see sub-lines")


def test_criterion_5d_harvest_lifetime_vs_static(figure_runs):
    runs, _ = figure_runs
    s = runs["exponential pi=0.1"]
    statics = [p for p in _baselines(s) if p.startswith("static")]
    bad = [(p, n0) for p in statics for n0 in LEVELS if n0 <= 20
           if s[("optimal", n0)].mean_lifetime <= s[(p, n0)].mean_lifetime]
    worst = min(s[("optimal", n0)].mean_lifetime - max(s[(p, n0)].mean_lifetime for p in statics)
                for n0 in LEVELS if n0 <= 20)
    assert record("5d pi=0.1 optimal lifetime > static", not bad,
                  f"{len(bad)} violations, smallest margin {worst:.1f} slots")


# -- criterion 6: property suites over a random grid --------------------------

def _threshold_grid(tb, p):
    n = tb.n_max
    T = np.array([[tb.threshold(N, m, p) for m in range(1, n + 1)] for N in range(1, n + 2)])
    return np.where(np.isinf(T), 1e300, T)


def _check_config(cfg):
    failures = set()
    tb = compute_tables(cfg)
    n = cfg.n_max
    q = tb.expected_utility * tb.expected_success
    hi = compute_tables(DpConfig(cfg.valuation, cfg.channel, min(cfg.pi + 0.2, 1.0), n, cfg.shutdown_on_empty))
    for p in {cfg.channel.alpha0, cfg.channel.alpha1, tb.expected_success} - {0.0}:
        T = _threshold_grid(tb, p)
        if np.any(np.diff(T, axis=1) < -1e-9):
            failures.add("threshold nondecreasing in n")
        if np.any(np.diff(T, axis=0) > 1e-9):
            failures.add("threshold nonincreasing in N")
        if np.any(_threshold_grid(hi, p) > T + 1e-9):
            failures.add("harvest lowers thresholds")
    E = np.array([[tb.ev(N, m) for m in range(n + 1)] for N in range(n + 2)])
    if np.any(np.diff(E, axis=0) < -1e-12) or np.any(np.diff(E, axis=1) < -1e-12):
        failures.add("ev monotone")
    if cfg.shutdown_on_empty and any(tb.ev(0, m) != 0.0 for m in range(n + 1)):
        failures.add("terminal ev(0,n)=0")
    if any(abs(tb.ev(m, m) - m * q) > 1e-9 * max(1.0, m * q) for m in range(n + 1)):
        failures.add("terminal ev(n,n)=n q")

    pols = (Optimal(), Greedy(), Periodic(3), StaticThreshold(float(cfg.valuation.ppf(0.5))))
    sim = SimConfig(cfg, n, (1, 2, max(1, n // 2)), 15, 99, pols, 1)
    first = run_campaign(sim, tb)
    if any(o.attempts != o.n0 + o.harvested - o.final_battery for o in first):
        failures.add("energy conservation")
    again = run_campaign(sim, tb)
    if render_csv(RESULT_COLUMNS, result_rows(first)) != render_csv(RESULT_COLUMNS, result_rows(again)):
        failures.add("byte-identical reruns")
    return failures


PROPERTIES = ("threshold nondecreasing in n", "threshold nonincreasing in N", "harvest lowers thresholds",
              "ev monotone", "terminal ev(0,n)=0", "terminal ev(n,n)=n q", "energy conservation",
              "byte-identical reruns")


def test_criterion_6_property_suites():
    configs = random_configs(50, seed=6)
    hits = {name: [] for name in PROPERTIES}
    for i, cfg in enumerate(configs):
        for name in _check_config(cfg):
            hits[name].append(i)
    for name in PROPERTIES:
        bad = hits[name]
        detail = "all 50 configs" if not bad else (
            f"{len(bad)}/50 configs fail, shutdown flags {sorted({configs[i].shutdown_on_empty for i in bad})}")
        record(f"6 {name}", not bad, detail)
    ok = not any(hits.values())
    assert record("6 property suites", ok, "all properties hold" if ok else "see sub-lines")
