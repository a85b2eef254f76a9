"""Command-line entry point.

Subcommands: ``net`` (generate/inspect graphs), ``run`` (single config),
``experiment <name>``, ``sweep``, ``calibrate``, ``scrollfit``, and
``metrics`` (offline metric computation on CSVs).

Exit codes: 0 success, 1 configuration/input error, 2 runtime error,
3 fit unavailable.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import __version__, calib, ioutil, metrics, netgen, scrolling
from .config import build_model_config, build_net_spec, load_config
from .errors import (
    ConfigError,
    FitUnavailableError,
    InputError,
    MemesimError,
)
from .experiments import EXPERIMENTS, calibration_report, run_experiment


def _common_flags(p):
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--config", default=None, help="TOML config file")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for replicas and sweep cells")
    p.add_argument("--full-scale", action="store_true",
                   help="publication-scale sizes (20 replicas, 100k tracked memes)")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE",
                   help="override a config key, e.g. --set run.alpha=16")


def build_parser():
    p = argparse.ArgumentParser(prog="memesim",
                                description="meme diffusion simulator and "
                                            "measurement toolkit")
    p.add_argument("--version", action="version", version=f"memesim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    net = sub.add_parser("net", help="generate or inspect synthetic networks")
    net_sub = net.add_subparsers(dest="net_command", required=True)
    gen = net_sub.add_parser("generate", help="write an edge-list file")
    gen.add_argument("--n", type=int, default=1000)
    gen.add_argument("--m", type=int, default=10)
    gen.add_argument("--generator", choices=["ba", "holme_kim"], default="ba")
    gen.add_argument("--triad-prob", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="edge-list output path")
    insp = net_sub.add_parser("inspect", help="print statistics of an edge list")
    insp.add_argument("--in", dest="path", required=True)

    runp = sub.add_parser("run", help="run a single configuration")
    _common_flags(runp)

    exp = sub.add_parser("experiment", help="run a named experiment preset")
    exp.add_argument("name", choices=sorted(EXPERIMENTS))
    _common_flags(exp)

    sweep = sub.add_parser("sweep", help="run a custom mu/alpha sweep")
    _common_flags(sweep)

    cal = sub.add_parser("calibrate",
                         help="naive vs distributional calibration comparison")
    cal.add_argument("--mu-csv", default=None,
                     help="per-user posting CSV (default: shipped stand-in)")
    cal.add_argument("--alpha-csv", default=None,
                     help="per-session attention CSV (default: shipped stand-in)")
    _common_flags(cal)

    fitp = sub.add_parser("scrollfit",
                          help="fit the session model to an empirical histogram")
    fitp.add_argument("--target", choices=["alpha", "mu"], required=True)
    fitp.add_argument("--csv", required=True,
                      help="alpha: session_id,stops; mu: user_id,n_t,n_r")
    fitp.add_argument("--sessions-per-user", type=int, default=200)
    fitp.add_argument("--out", default="out")
    fitp.add_argument("--seed", type=int, default=0)

    met = sub.add_parser("metrics", help="offline metrics over a memes CSV")
    met.add_argument("--memes-csv", required=True,
                     help="CSV with quality and popularity columns")
    met.add_argument("--quality-threshold", type=float, default=0.34)
    met.add_argument("--out", default="out")

    return p


def _cmd_net(args) -> int:
    if args.net_command == "generate":
        spec = netgen.NetSpec(
            generator=netgen.Generator(args.generator),
            n=args.n, m=args.m, triad_prob=args.triad_prob, seed=args.seed)
        g = netgen.generate(spec)
        netgen.write_edge_list(g, args.out)
        print(f"wrote {g.node_count} nodes, {g.edge_count} edges to {args.out}")
        return 0
    g = netgen.read_edge_list(args.path)
    degs = g.degrees()
    print(f"nodes: {g.node_count}")
    print(f"edges: {g.edge_count}")
    print(f"mean degree: {degs.mean():.3f}")
    print(f"min/max degree: {degs.min()}/{degs.max()}")
    print(f"clustering coefficient: {netgen.clustering_coefficient(g):.4f}")
    print(f"connected: {netgen.is_connected(g)}")
    return 0


def _cmd_experiment(name, args) -> int:
    manifest = run_experiment(name, args.out, master_seed=args.seed,
                              jobs=args.jobs, full_scale=args.full_scale,
                              config_path=args.config, overrides=args.overrides)
    print(f"manifest: {manifest}")
    return 0


def _cmd_calibrate(args) -> int:
    overrides = list(args.overrides)
    if args.mu_csv:
        overrides.append(f'calibration.mu_csv="{args.mu_csv}"')
    if args.alpha_csv:
        overrides.append(f'calibration.alpha_csv="{args.alpha_csv}"')
    args.overrides = overrides
    return _cmd_experiment("fig4d", args)


def _cmd_scrollfit(args) -> int:
    if args.target == "alpha":
        dist = calib.ingest_alpha(args.csv)
    else:
        dist = calib.ingest_mu(args.csv)
    grid = scrolling.FitGrid()
    if args.target == "mu":
        grid = scrolling.FitGrid(rho=tuple(np.round(np.arange(0.9, 0.999, 0.004), 4)),
                                 q_mean=(0.05, 0.1, 0.15, 0.2),
                                 sigma=(0.01, 0.05, 0.09, 0.13))
    result = scrolling.fit(dist.values, dist.weights, args.target, grid,
                           sessions_per_user=args.sessions_per_user,
                           seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    path = ioutil.write_json(os.path.join(args.out, "scrollfit.json"), {
        "target": result.target,
        "params": {"rho": result.params.rho, "q_mean": result.params.q_mean,
                   "sigma": result.params.sigma},
        "discrepancy": result.discrepancy,
        "evaluations": result.evaluations,
        "trace": [list(t) for t in result.trace],
    })
    print(f"fit: rho={result.params.rho:.4f} q_mean={result.params.q_mean:.4f} "
          f"sigma={result.params.sigma:.4f} discrepancy={result.discrepancy:.5f}")
    print(f"report: {path}")
    return 0


def _read_memes_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or "quality" not in reader.fieldnames \
                or "popularity" not in reader.fieldnames:
            raise InputError(f"{path}: need columns quality,popularity")
        qs, ps = [], []
        for row in reader:
            qs.append(float(row["quality"]))
            ps.append(int(row["popularity"]))
    if not qs:
        raise InputError(f"{path}: no rows")
    return np.array(qs), np.array(ps)


def _cmd_metrics(args) -> int:
    q, p = _read_memes_csv(args.memes_csv)
    os.makedirs(args.out, exist_ok=True)
    files = []
    payload = {"n_memes": len(q)}
    payload["tau"] = metrics.kendall_tau_b(q, p)
    payload["mutual_information"] = metrics.mutual_information(q, p)
    try:
        fit = metrics.fit_power_law(p)
        payload["powerlaw"] = {"beta": fit.exponent, "x_min": fit.x_min,
                               "ks_distance": fit.ks_distance,
                               "n_tail": fit.n_tail}
    except FitUnavailableError as exc:
        payload["powerlaw"] = {"error": str(exc)}
    split = metrics.popularity_by_quality_group(q, p, args.quality_threshold)
    payload["quality_groups"] = {
        "threshold": args.quality_threshold,
        "high_count": split.high_count,
        "low_count": split.low_count,
        "ks_distance": (metrics.ks_two_sample(p[q >= args.quality_threshold],
                                              p[q < args.quality_threshold])
                        if split.high_count and split.low_count else None),
    }
    files.append(ioutil.write_json(os.path.join(args.out, "metrics.json"), payload))
    files.append(ioutil.write_csv(
        os.path.join(args.out, "popularity_pdf.csv"),
        ["bin_center", "density"], metrics.log_binned_pdf(p)))
    rows = []
    for group, vals, cc in (("high", split.high_values, split.high_ccdf),
                            ("low", split.low_values, split.low_ccdf)):
        for v, c in zip(vals, cc):
            rows.append((group, int(v), float(c)))
    files.append(ioutil.write_csv(os.path.join(args.out, "group_ccdf.csv"),
                                  ["group", "popularity", "ccdf"], rows))
    print(f"tau={payload['tau']:.4f}  files: {', '.join(files)}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "net":
            return _cmd_net(args)
        if args.command == "run":
            return _cmd_experiment("custom", args)
        if args.command == "experiment":
            return _cmd_experiment(args.name, args)
        if args.command == "sweep":
            return _cmd_experiment("custom", args)
        if args.command == "calibrate":
            return _cmd_calibrate(args)
        if args.command == "scrollfit":
            return _cmd_scrollfit(args)
        if args.command == "metrics":
            return _cmd_metrics(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except FitUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (MemesimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
