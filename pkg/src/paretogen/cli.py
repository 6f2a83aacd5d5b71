"""Command-line front end: run, baseline, sample, serve.

Exit codes: 0 on success, 2 for configuration problems (bad config file,
unknown names, malformed snapshots), 3 for runtime failures.  Artifacts
written before a failure are left in place.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import (
    build_benchmark,
    build_estimator,
    load_config,
    resolve_output_dir,
)
from .preferences import make_preference
from .search import run_baseline
from .snapshot import (
    SNAPSHOT_FORMAT_VERSION,
    load_snapshot,
    normalize_preference,
    save_snapshot,
    snapshot_from_estimator,
)
from .validation import ConfigError, SnapshotFormatError

log = logging.getLogger("paretogen.cli")

_PROPOSER_BASELINES = ("random", "random-mutation")
_ENGINE_BASELINES = {
    "vsd": {"conditional": False, "use_alignment": False},
    "cbas": {"beta": 0.0, "fixed_threshold": 1},
}


# ---------------------------------------------------------------------------
# artifact writing
# ---------------------------------------------------------------------------

def _write_jsonl(path, records):
    with open(path, "w") as fh:
        fh.write(json.dumps({"format_version": 1}) + "\n")
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def _write_summary(path, per_seed_records):
    table = np.asarray(
        [[rec["rel_hvi"] for rec in records] for records in per_seed_records]
    )
    mean = table.mean(axis=0)
    std = table.std(axis=0)
    with open(path, "w") as fh:
        fh.write("# format_version: 1\n")
        fh.write("round,mean_rel_hvi,std_rel_hvi\n")
        for i in range(table.shape[1]):
            fh.write(f"{i + 1},{mean[i]:.17g},{std[i]:.17g}\n")


def _execute_runs(cfg, runner, jsonl_name, summary_name):
    """Run every seed, writing artifacts as each seed completes."""
    out = resolve_output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    per_seed = []
    for seed in cfg["seeds"]:
        records = runner(seed, out)
        _write_jsonl(out / jsonl_name(seed), records)
        per_seed.append(records)
        log.info("seed %d: %d rounds, final hv %.6g", seed, len(records),
                 records[-1]["hv"])
    _write_summary(out / summary_name, per_seed)
    return 0


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_run(args) -> int:
    cfg = load_config(args.config)
    bench = build_benchmark(cfg)

    def runner(seed, out):
        est = build_estimator(cfg, seed)
        est.fit(bench)
        save_snapshot(
            out / f"snapshot-seed{seed}.json",
            snapshot_from_estimator(est, benchmark=dict(cfg["benchmark"]),
                                    seed=seed),
        )
        return est.records_

    return _execute_runs(cfg, runner,
                         lambda seed: f"{bench.name}-seed{seed}.jsonl",
                         "summary.csv")


def cmd_baseline(args) -> int:
    cfg = load_config(args.config)
    bench = build_benchmark(cfg)
    name = args.name
    if name not in _PROPOSER_BASELINES and name not in _ENGINE_BASELINES:
        raise ConfigError(
            f"unknown baseline {name!r}; available: "
            f"{', '.join((*_PROPOSER_BASELINES, *_ENGINE_BASELINES))}"
        )
    run_cfg = cfg.get("run", {})

    def runner(seed, out):
        if name in _ENGINE_BASELINES:
            est = build_estimator(cfg, seed, overrides=_ENGINE_BASELINES[name])
            est.fit(bench)
            save_snapshot(
                out / f"snapshot-{name}-seed{seed}.json",
                snapshot_from_estimator(
                    est, benchmark=dict(cfg["benchmark"]), seed=seed),
            )
            return est.records_
        return run_baseline(
            bench, name,
            rounds=run_cfg.get("rounds", 10),
            batch_size=run_cfg.get("batch_size", 5),
            init_points=run_cfg.get("init_points", 64),
            seed=seed,
            reference_point=run_cfg.get("reference_point"),
        )

    return _execute_runs(cfg, runner,
                         lambda seed: f"{bench.name}-{name}-seed{seed}.jsonl",
                         f"summary-{name}.csv")


def _parse_csv_floats(text, flag) -> np.ndarray:
    try:
        return np.asarray([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise ConfigError(f"{flag} expects comma-separated numbers, "
                          f"got {text!r}")


def cmd_sample(args) -> int:
    if (args.u is None) == (args.y is None):
        raise ConfigError("pass exactly one of --u or --y")
    snap = load_snapshot(args.snapshot)
    if args.y is not None:
        y = _parse_csv_floats(args.y, "--y")
        u = make_preference(y, snap.reference_point)
    else:
        u = normalize_preference(_parse_csv_floats(args.u, "--u"),
                                 warn_tol=1e-6)
    rng = np.random.default_rng((args.seed, 0))
    out = {"format_version": SNAPSHOT_FORMAT_VERSION}
    out.update(snap.sample_designs(u, args.n, rng))
    print(json.dumps(out))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.snapshot_dir, session_seed=args.seed)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paretogen",
        description="Amortized preference-conditioned Pareto search runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured optimization run")
    p_run.add_argument("config", help="path to the YAML config file")
    p_run.set_defaults(func=cmd_run)

    p_base = sub.add_parser("baseline", help="run a baseline proposer")
    p_base.add_argument("config", help="path to the YAML config file")
    p_base.add_argument("--name", required=True,
                        help="baseline id (random, random-mutation, vsd, cbas)")
    p_base.set_defaults(func=cmd_baseline)

    p_sample = sub.add_parser(
        "sample", help="draw preference-conditioned designs from a snapshot")
    p_sample.add_argument("snapshot", help="path to a snapshot JSON file")
    p_sample.add_argument("--u", help="comma-separated preference direction")
    p_sample.add_argument("--y", help="comma-separated target outcome "
                                      "(use --y=-1,2 for negative values)")
    p_sample.add_argument("--n", type=int, default=5,
                          help="number of designs to draw")
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.set_defaults(func=cmd_sample)

    p_serve = sub.add_parser(
        "serve", help="serve snapshots over HTTP for the explorer UI")
    p_serve.add_argument("snapshot_dir", help="directory of snapshot files")
    p_serve.add_argument("--port", type=int, default=8321)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--seed", type=int, default=0,
                         help="session seed for request-level sampling")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SnapshotFormatError, FileNotFoundError) as exc:
        print(f"paretogen: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure; partial outputs retained
        print(f"paretogen: run failed: {exc!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
