"""Command line front end: evaluate, sweep, check, and export.

Subcommands map one-to-one onto the library layers: ``rates`` (probe
rates and the inversion condition), ``clock`` (ladder metrics, with
optional Monte Carlo columns and tick histograms), ``oracle`` (the
finite-size refinement table), ``lifetime`` (battery budget) and
``scan`` (the full phase-diagram row set).  All of them read the same
config document, honor repeatable ``--set section.key=value``
overrides, and write CSV or JSON chosen by ``output.format``.

Exit codes: 0 on success, 2 for configuration problems, 3 when the
requested point or the whole grid is outside the model's domain (every
row flagged), 1 for anything unexpected.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .clock import ladder_rates, sample_tick_times
from .config import RunConfig, apply_overrides, load_config
from .errors import ConfigError, PassiveState, QuenchClockError
from .rates import transition_rates
from .scan import Table, _apply_point, oracle_table, render_table, run_scan

THREADS_ENV = "QUENCHCLOCK_THREADS"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="YAML config file (defaults apply when omitted)")
    common.add_argument("--set", metavar="KEY=VALUE", action="append",
                        default=[], dest="assignments",
                        help="override one config key, e.g. coupling.epsilon0=2.5")
    common.add_argument("--out", metavar="PATH",
                        help="output file (stdout when omitted)")
    common.add_argument("--format", choices=("csv", "json"),
                        help="output format (overrides output.format)")
    common.add_argument("--seed", type=int, metavar="U64",
                        help="Monte Carlo seed (overrides mc.seed)")
    common.add_argument("--threads", type=int, metavar="N",
                        help=f"worker threads (default ${THREADS_ENV} or 1)")

    parser = argparse.ArgumentParser(
        prog="quenchclock",
        description="Clock and battery metrics of a quenched-chain steady state.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("rates", parents=[common],
                   help="probe rates and the inversion condition over the grid")
    clock = sub.add_parser("clock", parents=[common],
                           help="ladder clock metrics over the grid")
    clock.add_argument("--histogram", type=int, metavar="BINS",
                       help="emit a tick-time histogram of the single "
                            "configured point instead of the metric table")
    sub.add_parser("oracle", parents=[common],
                   help="finite-size refinement table at the configured point")
    sub.add_parser("lifetime", parents=[common],
                   help="battery energy budget and lifetime over the grid")
    sub.add_parser("scan", parents=[common],
                   help="full row set: rates, condition, clock and lifetime")
    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    config = apply_overrides(config, list(args.assignments))
    extra: list[str] = []
    if args.seed is not None:
        extra.append(f"mc.seed={args.seed}")
    if args.format is not None:
        extra.append(f"output.format={args.format}")
    if extra:
        config = apply_overrides(config, extra)
    if args.out is not None:
        # Paths bypass the YAML override route: they must stay verbatim.
        config = replace(config, output=replace(config.output, path=args.out))
    return config


def _resolve_threads(args: argparse.Namespace) -> int:
    if args.threads is not None:
        threads = args.threads
    else:
        env = os.environ.get(THREADS_ENV)
        if env is None:
            threads = 1
        else:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigError(
                    f"{THREADS_ENV}={env!r}: not an integer") from None
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    return threads


def _histogram_table(config: RunConfig, bins: int) -> Table:
    if bins < 1:
        raise ConfigError(f"--histogram: bins must be >= 1, got {bins}")
    if config.scan:
        raise ConfigError("--histogram needs a single point; remove scan axes")
    if config.mc.n_trajectories < 1:
        raise ConfigError("--histogram needs mc.n_trajectories >= 1")
    quench, coupling, ladder = _apply_point(config, {})
    rates = transition_rates(quench, coupling)
    lr = ladder_rates(rates, ladder)
    if not lr.p_up > lr.p_down:
        raise PassiveState("tick sampling needs an active point: the walk "
                           "would reach the top only against its own drift")
    times = sample_tick_times(lr, ladder, config.mc.n_trajectories,
                              config.mc.seed)
    counts, edges = np.histogram(times, bins=bins)
    rows = tuple((float(edges[i]), float(edges[i + 1]), int(counts[i]))
                 for i in range(len(counts)))
    return Table(schema="quenchclock.histogram.v1",
                 columns=("bin_lo", "bin_hi", "count"), rows=rows)


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _resolve_config(args)
        threads = _resolve_threads(args)
        if args.command == "oracle":
            table = oracle_table(config)
        elif args.command == "clock" and args.histogram is not None:
            table = _histogram_table(config, args.histogram)
        else:
            table = run_scan(config, args.command, threads)
        _emit(render_table(table, config.output), config.output.path)
        return 3 if table.all_flagged else 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QuenchClockError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
