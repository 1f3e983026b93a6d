"""Flat key-value run configuration with dotted section keys.

The format is line-oriented ``section.key=value`` text: minimal parsing
surface, diff-friendly, and exactly round-trippable (parse -> serialize ->
parse yields the same configuration). Every streaming default is populated
when a key is omitted.
"""

from dataclasses import dataclass, field

from . import gbt
from .controller import STRATEGY_KINDS, RunSettings, StrategyConfig
from .objectives import OBJECTIVE_KINDS, Objective


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


def _parse_bool(text):
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _parse_str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _fmt_value(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class RunConfig:
    """One experiment: dataset, strategy matrix, seeds, and module knobs."""

    dataset_csv: str | None = None
    dataset_manifest: str | None = None
    train_positive_target: int = 100
    strategies: list = field(default_factory=lambda: ["adwin-hybrid"])
    seeds: list = field(default_factory=lambda: [42])
    out_dir: str | None = None

    objective_kind: str = "focal"
    objective_alpha: float = 0.25
    objective_gamma: float = 2.0
    objective_pos_weight: float | None = None

    train_initial_rounds: int = 100
    train_rounds_per_update: int = 10
    train_learning_rate: float = 0.10
    train_max_depth: int = 6
    train_max_trees: int = 500
    train_bins: int = 256
    train_min_child_weight: float = 1.0
    train_subsample: float = 0.90
    train_colsample: float = 0.90
    train_l2_reg: float = 1.00

    threshold_policy: str = "max-f1"
    threshold_tail_fraction: float = 0.20
    threshold_grid_points: int = 101
    threshold_min_recall: float = 0.95

    adwin_delta: float = 0.002

    acquisition_policy: str = "hybrid"
    acquisition_nominal_budget_fraction: float = 0.01

    controller_periodic_interval: int = 10_000
    controller_cooldown_events: int = 2_000
    controller_b_min: int = 32
    controller_buffer_capacity: int = 5_000
    controller_batch_size: int = 1_000
    periodic_max_updates: int | None = None
    trigger_schedule_path: str | None = None

    replay_enabled: bool = False
    replay_capacity: int = 512
    replay_ratio: float = 0.5

    metrics_rolling_window: int = 10_000
    metrics_burst_gap: int = 10_000
    metrics_burst_delay_mode: str = "positives"


# key -> (attribute, parser)
CONFIG_KEYS = {
    "dataset.csv": ("dataset_csv", str),
    "dataset.manifest": ("dataset_manifest", str),
    "dataset.train_positive_target": ("train_positive_target", int),
    "run.strategies": ("strategies", _parse_str_list),
    "run.seeds": ("seeds", _parse_int_list),
    "run.out": ("out_dir", str),
    "objective.kind": ("objective_kind", str),
    "objective.alpha": ("objective_alpha", float),
    "objective.gamma": ("objective_gamma", float),
    "objective.pos_weight": ("objective_pos_weight", float),
    "train.initial_rounds": ("train_initial_rounds", int),
    "train.rounds_per_update": ("train_rounds_per_update", int),
    "train.learning_rate": ("train_learning_rate", float),
    "train.max_depth": ("train_max_depth", int),
    "train.max_trees": ("train_max_trees", int),
    "train.bins": ("train_bins", int),
    "train.min_child_weight": ("train_min_child_weight", float),
    "train.subsample": ("train_subsample", float),
    "train.colsample": ("train_colsample", float),
    "train.l2_reg": ("train_l2_reg", float),
    "threshold.policy": ("threshold_policy", str),
    "threshold.tail_fraction": ("threshold_tail_fraction", float),
    "threshold.grid_points": ("threshold_grid_points", int),
    "threshold.min_recall": ("threshold_min_recall", float),
    "adwin.delta": ("adwin_delta", float),
    "acquisition.policy": ("acquisition_policy", str),
    "acquisition.nominal_budget_fraction": ("acquisition_nominal_budget_fraction", float),
    "controller.periodic_interval": ("controller_periodic_interval", int),
    "controller.cooldown_events": ("controller_cooldown_events", int),
    "controller.b_min": ("controller_b_min", int),
    "controller.buffer_capacity": ("controller_buffer_capacity", int),
    "controller.batch_size": ("controller_batch_size", int),
    "periodic.max_updates": ("periodic_max_updates", int),
    "strategy.trigger_schedule": ("trigger_schedule_path", str),
    "replay.enabled": ("replay_enabled", _parse_bool),
    "replay.capacity": ("replay_capacity", int),
    "replay.ratio": ("replay_ratio", float),
    "metrics.rolling_window": ("metrics_rolling_window", int),
    "metrics.burst_gap": ("metrics_burst_gap", int),
    "metrics.burst_delay_mode": ("metrics_burst_delay_mode", str),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _) in CONFIG_KEYS.items()}


def parse_config_text(text, base=None):
    cfg = base if base is not None else RunConfig()
    for line_num, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {line_num}: expected key=value, got {line!r}")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {line_num}: unknown config key {key!r}")
        attr, parser = CONFIG_KEYS[key]
        if value == "":
            setattr(cfg, attr, [] if parser in (_parse_str_list, _parse_int_list) else None)
            continue
        try:
            setattr(cfg, attr, parser(value))
        except ValueError as exc:
            raise ConfigError(f"line {line_num}: bad value for {key}: {exc}") from exc
    return cfg


def load_config(path, base=None):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config_text(fh.read(), base)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc


def serialize_config(cfg):
    lines = []
    for key, (attr, _) in CONFIG_KEYS.items():
        lines.append(f"{key}={_fmt_value(getattr(cfg, attr))}")
    return "\n".join(lines) + "\n"


def validate_config(cfg):
    for strategy in cfg.strategies:
        if strategy not in STRATEGY_KINDS:
            raise ConfigError(f"unknown strategy: {strategy!r}")
    if cfg.objective_kind not in OBJECTIVE_KINDS:
        raise ConfigError(f"unknown objective kind: {cfg.objective_kind!r}")
    if cfg.threshold_policy not in ("max-f1", "recall-constrained"):
        raise ConfigError(f"unknown threshold policy: {cfg.threshold_policy!r}")
    if not cfg.seeds:
        raise ConfigError("at least one seed is required")
    if "matched-replay" in cfg.strategies and not cfg.trigger_schedule_path:
        raise ConfigError("matched-replay requires strategy.trigger_schedule")
    return cfg


def build_settings(cfg, strategy_kind, seed, trigger_schedule=None):
    """RunSettings for one (strategy, seed) cell of the matrix."""
    strategy = StrategyConfig(
        kind=strategy_kind,
        periodic_interval=cfg.controller_periodic_interval,
        cooldown_events=cfg.controller_cooldown_events,
        b_min=cfg.controller_b_min,
        buffer_capacity=cfg.controller_buffer_capacity,
        batch_size=cfg.controller_batch_size,
        replay_enabled=cfg.replay_enabled,
        replay_capacity=cfg.replay_capacity,
        replay_ratio=cfg.replay_ratio,
        trigger_schedule=trigger_schedule,
        periodic_max_updates=cfg.periodic_max_updates,
    )
    objective = Objective(
        kind=cfg.objective_kind,
        alpha=cfg.objective_alpha,
        gamma=cfg.objective_gamma,
        pos_weight=cfg.objective_pos_weight,
    )
    train = gbt.TrainConfig(
        initial_rounds=cfg.train_initial_rounds,
        rounds_per_update=cfg.train_rounds_per_update,
        learning_rate=cfg.train_learning_rate,
        max_depth=cfg.train_max_depth,
        max_trees=cfg.train_max_trees,
        bins=cfg.train_bins,
        min_child_weight=cfg.train_min_child_weight,
        subsample=cfg.train_subsample,
        colsample=cfg.train_colsample,
        l2_reg=cfg.train_l2_reg,
    )
    return RunSettings(
        strategy=strategy,
        objective=objective,
        train=train,
        threshold_policy=cfg.threshold_policy,
        tail_fraction=cfg.threshold_tail_fraction,
        grid_points=cfg.threshold_grid_points,
        min_recall=cfg.threshold_min_recall,
        adwin_delta=cfg.adwin_delta,
        acquisition_policy=cfg.acquisition_policy,
        nominal_budget_fraction=cfg.acquisition_nominal_budget_fraction,
        rolling_window=cfg.metrics_rolling_window,
        burst_gap=cfg.metrics_burst_gap,
        burst_delay_mode=cfg.metrics_burst_delay_mode,
        seed=seed,
    )
