"""Command line front end: parse a config, run one campaign, emit a CSV.

Usage: sicaloha <analytic|masks|headers|throughput> [--config PATH]
       [--seed N] [--out PATH] [--trials N] [--grid a:b:step]

Exit codes: 0 success, 1 config error, 2 campaign error (including I/O
failures and campaigns with no surviving trials).  Identical config and seed
produce byte-identical CSVs regardless of the worker count; undefined points
are written as empty fields, never as zeros.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analytic import kl_divergence, symbol_pmf, undecodable_count, critical_ratio
from .config import CampaignConfig, ConfigError, parse_config, validate_config
from .experiments import (
    PROTOCOLS,
    CampaignError,
    header_campaign,
    mask_campaign,
    throughput_campaign,
)

__all__ = ["main", "run_subcommand"]

MASK_K_VALUES = (2, 3, 4, 5)


def _derived_threshold(cfg: CampaignConfig) -> int:
    """Undecodable-symbol count for the configured rate/SNR/packet length."""
    x = critical_ratio(cfg.rate, cfg.snr)
    l = undecodable_count(cfg.packet_len, x)
    if l > cfg.packet_len:
        raise CampaignError(
            f"cancellation clears every two-packet collision at this working "
            f"point (undecodable count {l} exceeds the {cfg.packet_len}-symbol packet)"
        )
    return l


def _analytic_rows(cfg: CampaignConfig):
    pmf = symbol_pmf(cfg.packet_len, _derived_threshold(cfg))
    header = ("symbol_index", "p_theory")
    return header, [(i + 1, float(p)) for i, p in enumerate(pmf.p)]


def _mask_unit(args):
    k, packet_len, l, trials, seed, require_all = args
    rng = np.random.default_rng(np.random.SeedSequence((seed, k)))
    pmf = mask_campaign(
        k, packet_len, l, trials, rng, require_all_survive=require_all
    )
    return k, pmf


def _masks_rows(cfg: CampaignConfig):
    from .experiments import _map_units

    l = _derived_threshold(cfg)
    theory = symbol_pmf(cfg.packet_len, l)
    units = [(k, cfg.packet_len, l, cfg.trials, cfg.seed, False) for k in MASK_K_VALUES]
    results = _map_units(_mask_unit, units, cfg.workers)
    rows = []
    for k, pmf in sorted(results, key=lambda r: r[0]):
        kl = kl_divergence(theory.p, pmf.p) if k == 2 else None
        for i in range(cfg.packet_len):
            rows.append(
                (
                    k,
                    i + 1,
                    float(theory.p[i]) if k == 2 else None,
                    float(pmf.p[i]),
                    cfg.trials,
                    kl,
                )
            )
    return ("k", "symbol_index", "p_theory", "p_empirical", "trials", "kl_d"), rows


def _policy_label(cfg: CampaignConfig) -> str:
    return "+".join(cfg.positions)


def _headers_rows(cfg: CampaignConfig):
    result = header_campaign(
        cfg.system_params(),
        cfg.header_policy(),
        cfg.g_values(),
        cfg.trials,
        seed=cfg.seed,
        workers=cfg.workers,
    )
    label = _policy_label(cfg)
    rows = [
        (
            label,
            cfg.header_fraction,
            s.point.offered_load,
            s.point.n_users,
            s.n_frames,
            s.survivors,
            s.p_h_int,
            cfg.seed,
        )
        for s in sorted(result.points, key=lambda s: s.point.offered_load)
    ]
    header = (
        "policy",
        "header_fraction",
        "G",
        "n_users",
        "frames",
        "survivors",
        "p_h_int",
        "seed",
    )
    return header, rows


def _throughput_rows(cfg: CampaignConfig):
    params = cfg.system_params()
    policy = cfg.header_policy()
    label = _policy_label(cfg)
    rows = []
    for protocol in sorted(PROTOCOLS):
        result = throughput_campaign(
            params, protocol, policy, cfg.g_values(), cfg.trials,
            seed=cfg.seed, workers=cfg.workers,
        )
        for s in sorted(result.points, key=lambda s: s.point.offered_load):
            rows.append(
                (
                    protocol,
                    label,
                    cfg.header_fraction,
                    s.point.offered_load,
                    s.point.n_users,
                    s.per,
                    s.throughput,
                    s.n_frames,
                    cfg.seed,
                )
            )
    header = (
        "protocol",
        "policy",
        "header_fraction",
        "G",
        "n_users",
        "per",
        "throughput",
        "trials",
        "seed",
    )
    return header, rows


_SUBCOMMANDS = {
    "analytic": _analytic_rows,
    "masks": _masks_rows,
    "headers": _headers_rows,
    "throughput": _throughput_rows,
}


def _write_csv(path: str, header, rows):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


def run_subcommand(name: str, config: CampaignConfig, out_path: str) -> int:
    """Run one campaign and write its CSV; returns the process exit status."""
    if name not in _SUBCOMMANDS:
        print(f"unknown subcommand {name!r}", file=sys.stderr)
        return 1
    if config.campaign and config.campaign != name:
        print(
            f"config error: config is for campaign {config.campaign!r}, not {name!r}",
            file=sys.stderr,
        )
        return 1
    try:
        header, rows = _SUBCOMMANDS[name](config)
        _write_csv(out_path, header, rows)
    except (CampaignError, ValueError, OSError) as exc:
        print(f"campaign error: {exc}", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sicaloha",
        description="Unslotted random-access simulation campaigns (CRA/ECRA).",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "analytic": "dump the closed-form per-symbol interference probabilities",
        "masks": "empirical post-cancellation interference masks for k=2..5 packets",
        "headers": "header interference probability versus offered load",
        "throughput": "PER and throughput versus offered load for CRA/ECRA/ECRA-perfect",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", help="key=value config file (defaults when omitted)")
        sp.add_argument("--seed", type=int, help="master seed, overrides the config")
        sp.add_argument("--out", help=f"output CSV path (default {name}.csv)")
        sp.add_argument("--trials", type=int, help="trial count, overrides the config")
        sp.add_argument("--grid", help="offered-load grid a:b:step, overrides the config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            config = parse_config(Path(args.config).read_text())
        else:
            config = CampaignConfig()
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.trials is not None:
            overrides["trials"] = args.trials
        if args.grid is not None:
            from .config import _parse_grid

            overrides["grid"] = _parse_grid(args.grid)
        if overrides:
            config = replace(config, **overrides)
            validate_config(config)
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return run_subcommand(args.command, config, args.out or f"{args.command}.csv")


if __name__ == "__main__":
    raise SystemExit(main())
