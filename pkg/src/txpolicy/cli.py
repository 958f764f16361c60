"""Command line entry point: ``txpolicy <subcommand> --config FILE``.

Exit codes: 0 success, 2 configuration error, 3 oracle verification failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import ExperimentConfig, load_config
from .dp import PolicyTables, compute_tables
from .errors import ConfigError
from .oracle import verify_grid
from .report import emit_csv, emit_json, render_csv
from .simulator import run_campaign, summarize

log = logging.getLogger("txpolicy")

THRESHOLD_COLUMNS = ("n", "N", "gap", "threshold_avg", "threshold_good", "threshold_bad", "ev")
RESULT_COLUMNS = ("policy", "N0", "replication", "total_utility", "battery_lifetime", "attempts", "successes")
SUMMARY_COLUMNS = ("policy", "N0", "mean_utility", "ci95_utility", "mean_lifetime", "ci95_lifetime")
VERIFY_COLUMNS = ("valuation", "pi", "N0", "n", "dp", "oracle", "delta", "baseline_excess", "status")

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 2, 3


def threshold_rows(tables: PolicyTables):
    """One row per cell 0 <= N <= n <= n_max; decision columns are blank where no decision exists."""
    ch = tables.config.channel
    p_avg = tables.expected_success
    for n in range(tables.n_max + 1):
        for N in range(n + 1):
            if N == 0 or n == 0:
                yield (n, N, None, None, None, None, tables.ev(N, n))
                continue
            yield (n, N, tables.gap(N, n), tables.threshold(N, n, p_avg),
                   tables.threshold(N, n, ch.alpha1), tables.threshold(N, n, ch.alpha0),
                   tables.ev(N, n))


def result_rows(outcomes):
    for o in outcomes:
        yield (o.policy, o.n0, o.replication, o.total_utility, o.battery_lifetime, o.attempts, o.successes)


def summary_rows(summaries):
    for s in summaries:
        yield (s.policy, s.n0, s.mean_utility, s.ci95_utility, s.mean_lifetime, s.ci95_lifetime)


def _cmd_thresholds(cfg: ExperimentConfig, out: str) -> int:
    tables = compute_tables(cfg.dp)
    emit_csv(THRESHOLD_COLUMNS, threshold_rows(tables), out)
    return EXIT_OK


def _cmd_simulate(cfg: ExperimentConfig, out: str) -> int:
    emit_csv(RESULT_COLUMNS, result_rows(run_campaign(cfg.sim)), out)
    return EXIT_OK


def _cmd_compare(cfg: ExperimentConfig, out: str) -> int:
    summaries = summarize(run_campaign(cfg.sim))
    if out.endswith(".json"):
        emit_json([dict(zip(SUMMARY_COLUMNS, row)) for row in summary_rows(summaries)], out)
    else:
        emit_csv(SUMMARY_COLUMNS, summary_rows(summaries), out)
    return EXIT_OK


def _cmd_verify(cfg: ExperimentConfig, out: str | None) -> int:
    opts = cfg.verify
    rows = verify_grid(
        cfg.dp.channel, opts.valuations, opts.pis, opts.initial_battery_levels, opts.measurements,
        shutdown_on_empty=cfg.dp.shutdown_on_empty, recursion=cfg.dp.recursion, tolerance=opts.tolerance,
    )
    table = [(r.valuation, r.pi, r.n0, r.n, r.dp_value, r.oracle, r.delta, max(r.worst_baseline, 0.0),
              "PASS" if r.passed else "FAIL") for r in rows]
    sys.stdout.write(render_csv(VERIFY_COLUMNS, table))
    if out:
        emit_csv(VERIFY_COLUMNS, table, out)
    failed = sum(not r.passed for r in rows)
    print(f"{len(rows) - failed}/{len(rows)} instances passed", file=sys.stderr)
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {
    "compute-thresholds": (_cmd_thresholds, "thresholds.csv"),
    "simulate": (_cmd_simulate, "results.csv"),
    "compare": (_cmd_compare, "summary.csv"),
    "verify": (_cmd_verify, None),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="txpolicy", description="Optimal transmit/discard thresholds "
                                     "for energy-harvesting sensors, and policy comparison by simulation.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, default_out) in COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file (defaults apply when omitted)")
        p.add_argument("--out", default=default_out, help=f"output path, '-' for stdout (default {default_out})")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--threads", type=int, help="worker threads, 0 = auto (env TXPOLICY_THREADS)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _threads(arg: int | None) -> int | None:
    if arg is not None:
        return arg
    env = os.environ.get("TXPOLICY_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"TXPOLICY_THREADS={env!r} is not an integer") from None
    return None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        threads = _threads(args.threads)
        if threads is not None and threads < 0:
            raise ConfigError("--threads must be >= 0")
        cfg = cfg.with_overrides(seed=args.seed, threads=threads)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    handler, _ = COMMANDS[args.command]
    log.info("running %s", args.command)
    return handler(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
