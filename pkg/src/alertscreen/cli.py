"""Command-line harness: run, synth, project, summarize.

Exit codes: 0 success, 1 configuration error, 2 data error. Every run
writes one directory per (strategy, seed) containing exactly the config
snapshot, the trace CSV, the endpoints file, and the trigger schedule;
each strategy directory also gets a multi-seed summary.
"""

import argparse
import logging
import shutil
import sys
from dataclasses import replace
from pathlib import Path

from .config import (
    CONFIG_KEYS,
    ConfigError,
    RunConfig,
    build_settings,
    load_config,
    serialize_config,
    validate_config,
)
from .controller import run_stream
from .ingest import DataError, SplitSpec, prepare_dataset
from .metrics import Endpoints, bayes_projection, multiseed_summary, trace_to_csv
from .synth import DriftPoint, SyntheticStreamSpec, write_dataset

logger = logging.getLogger(__name__)

RUN_FILES = ("config.txt", "trace.csv", "endpoints.txt", "triggers.txt")


def _add_config_key_flags(parser):
    for key, (attr, _) in CONFIG_KEYS.items():
        if key in ("run.strategies", "run.seeds", "run.out"):
            continue  # covered by the required flags below
        parser.add_argument(f"--{key}", dest=attr, default=None, metavar="VALUE")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="alertscreen",
        description="Streaming alert-screening harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a strategy matrix over seeds")
    p_run.add_argument("--config", help="key-value config file (flags override it)")
    p_run.add_argument(
        "--strategy",
        required=True,
        help="strategy kind, comma-separated for a matrix",
    )
    p_run.add_argument("--seed", required=True, help="seed, comma-separated for a sweep")
    p_run.add_argument("--out", required=True, help="output directory")
    _add_config_key_flags(p_run)

    p_synth = sub.add_parser("synth", help="generate a synthetic alert stream")
    p_synth.add_argument("--out", required=True, help="CSV output path")
    p_synth.add_argument("--manifest", help="manifest output path (default <out>.manifest)")
    p_synth.add_argument("--length", type=int, default=100_000)
    p_synth.add_argument("--prevalence", type=float, default=0.01)
    p_synth.add_argument("--n-features", type=int, default=4)
    p_synth.add_argument("--n-categories", type=int, default=0)
    p_synth.add_argument(
        "--topology", choices=("recurrent-spikes", "single-burst"), default="recurrent-spikes"
    )
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--class-separation", type=float, default=2.0)
    p_synth.add_argument("--burst-start", type=float, default=0.10)
    p_synth.add_argument("--burst-density", type=float, default=0.50)
    p_synth.add_argument(
        "--drift",
        action="append",
        default=[],
        metavar="INDEX:BENIGN_MEAN[:MALICIOUS_MEAN]",
        help="class-conditional mean shift from an event index on (repeatable)",
    )

    p_proj = sub.add_parser("project", help="pre-deployment daily alert projection")
    p_proj.add_argument("--recall", type=float, required=True, help="fraction in [0, 1]")
    p_proj.add_argument("--fpr", type=float, required=True, help="fraction in [0, 1]")
    p_proj.add_argument("--prior", type=float, required=True, help="fraction in (0, 1)")
    p_proj.add_argument("--daily-events", type=int, default=1_000_000)

    p_sum = sub.add_parser("summarize", help="median/IQR summary over per-seed endpoints")
    p_sum.add_argument("--out", required=True, help="run output directory")
    p_sum.add_argument("--strategy", help="restrict to one strategy subdirectory")

    return parser


def _apply_flag_overrides(cfg, args):
    for key, (attr, parser_fn) in CONFIG_KEYS.items():
        raw = getattr(args, attr, None)
        if raw is None:
            continue
        try:
            setattr(cfg, attr, parser_fn(raw))
        except ValueError as exc:
            raise ConfigError(f"bad value for --{key}: {exc}") from exc
    return cfg


def _load_trigger_schedule(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return [int(line) for line in fh if line.strip()]
    except OSError as exc:
        raise DataError(f"cannot read trigger schedule: {exc}") from exc
    except ValueError as exc:
        raise DataError(f"malformed trigger schedule {path!r}: {exc}") from exc


def _write_run_dir(run_dir, cfg, strategy, seed, result):
    run_dir.mkdir(parents=True, exist_ok=True)
    snapshot = replace(cfg, strategies=[strategy], seeds=[seed], out_dir=str(run_dir))
    (run_dir / "config.txt").write_text(serialize_config(snapshot), encoding="utf-8")
    (run_dir / "trace.csv").write_text(trace_to_csv(result.trace), encoding="utf-8")
    (run_dir / "endpoints.txt").write_text(result.endpoints.to_text(), encoding="utf-8")
    (run_dir / "triggers.txt").write_text(
        "".join(f"{t}\n" for t in result.trigger_events), encoding="utf-8"
    )


def _summary_text(endpoint_maps):
    summary = multiseed_summary(endpoint_maps)
    lines = [f"seeds={len(endpoint_maps)}"]
    for key, (median, iqr) in summary.items():
        med_text = "" if median is None else repr(median)
        iqr_text = "" if iqr is None else repr(iqr)
        lines.append(f"{key}.median={med_text}")
        lines.append(f"{key}.iqr={iqr_text}")
    return "\n".join(lines) + "\n"


def cmd_run(args):
    cfg = RunConfig()
    if args.config:
        cfg = load_config(args.config, cfg)
    cfg = _apply_flag_overrides(cfg, args)
    cfg.strategies = [s.strip() for s in args.strategy.split(",") if s.strip()]
    try:
        cfg.seeds = [int(s) for s in args.seed.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --seed value: {exc}") from exc
    cfg.out_dir = args.out
    validate_config(cfg)
    if not cfg.dataset_csv or not cfg.dataset_manifest:
        raise ConfigError("dataset.csv and dataset.manifest are required for run")

    schedule = None
    if "matched-replay" in cfg.strategies:
        schedule = _load_trigger_schedule(cfg.trigger_schedule_path)

    data = prepare_dataset(
        cfg.dataset_csv,
        cfg.dataset_manifest,
        SplitSpec(train_positive_target=cfg.train_positive_target),
    )
    logger.info(
        "prepared dataset: %d train rows (%d positive), %d stream rows (%d positive)",
        data.y_train.size,
        int(data.y_train.sum()),
        data.y_stream.size,
        int(data.y_stream.sum()),
    )

    out_root = Path(cfg.out_dir)
    for strategy in cfg.strategies:
        endpoint_maps = []
        for seed in cfg.seeds:
            settings = build_settings(cfg, strategy, seed, trigger_schedule=schedule)
            run_dir = out_root / strategy / str(seed)
            try:
                result = run_stream(
                    data.X_train, data.y_train, data.X_stream, data.y_stream, settings
                )
                _write_run_dir(run_dir, cfg, strategy, seed, result)
            except Exception:
                if run_dir.exists():
                    shutil.rmtree(run_dir)  # no partial run directories
                raise
            endpoint_maps.append(result.endpoints.as_map())
            print(
                f"{strategy} seed={seed}: fp/1M-benign="
                f"{_round_or_empty(result.endpoints.fp_per_million_benign)} "
                f"queries={result.endpoints.queries} updates={result.endpoints.updates} "
                f"query-rate={100.0 * result.endpoints.realized_query_rate:.2f}%"
            )
        (out_root / strategy / "summary.txt").write_text(
            _summary_text(endpoint_maps), encoding="utf-8"
        )
    return 0


def _round_or_empty(value):
    return "" if value is None else f"{round(value)}"


def _parse_drift(entries):
    points = []
    for entry in entries:
        parts = entry.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"bad --drift value: {entry!r}")
        try:
            index = int(parts[0])
            benign = float(parts[1])
            malicious = float(parts[2]) if len(parts) == 3 else None
        except ValueError as exc:
            raise ConfigError(f"bad --drift value {entry!r}: {exc}") from exc
        points.append(DriftPoint(index=index, benign_mean=benign, malicious_mean=malicious))
    return points


def cmd_synth(args):
    try:
        spec = SyntheticStreamSpec(
            length=args.length,
            prevalence=args.prevalence,
            n_features=args.n_features,
            drift_points=_parse_drift(args.drift),
            attack_topology=args.topology,
            seed=args.seed,
            class_separation=args.class_separation,
            n_categories=args.n_categories,
            burst_start_frac=args.burst_start,
            burst_density=args.burst_density,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    manifest_path = args.manifest or args.out + ".manifest"
    write_dataset(spec, args.out, manifest_path)
    print(f"wrote {args.out} and {manifest_path}")
    return 0


def cmd_project(args):
    try:
        projection = bayes_projection(args.recall, args.fpr, args.prior, args.daily_events)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    precision = (
        "undefined" if projection.precision is None else f"{100.0 * projection.precision:.2f}%"
    )
    print(f"daily_events   {args.daily_events}")
    print(f"prior          {100.0 * args.prior:.2f}%")
    print(f"true_alerts    {projection.true_alerts}")
    print(f"false_alerts   {projection.false_alerts}")
    print(f"precision      {precision}")
    return 0


def cmd_summarize(args):
    root = Path(args.out)
    if not root.is_dir():
        raise DataError(f"no such output directory: {root}")
    strategies = [args.strategy] if args.strategy else sorted(
        p.name for p in root.iterdir() if p.is_dir()
    )
    for strategy in strategies:
        strat_dir = root / strategy
        endpoint_maps = []
        for seed_dir in sorted(strat_dir.iterdir(), key=lambda p: p.name):
            endpoint_file = seed_dir / "endpoints.txt"
            if not endpoint_file.is_file():
                continue
            endpoint_maps.append(
                Endpoints.from_text(endpoint_file.read_text(encoding="utf-8")).as_map()
            )
        if not endpoint_maps:
            raise DataError(f"no endpoint files under {strat_dir}")
        text = _summary_text(endpoint_maps)
        (strat_dir / "summary.txt").write_text(text, encoding="utf-8")
        print(f"[{strategy}]")
        print(text, end="")
    return 0


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="[%(levelname)s] %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "project":
            return cmd_project(args)
        return cmd_summarize(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
