"""The streaming loop: score, trigger, query, accumulate, warm-start.

Per stream batch the controller predicts with the current ensemble,
updates rolling metrics, appends scored events to the recent buffer, and
runs the strategy's trigger branch. Queried labels accumulate in a
pending set across triggers; once the minimum update batch is reached the
booster warm-starts on the pending labels, the pending set clears, and an
event-based cooldown suppresses further querying. The updated ensemble
takes effect at the next batch boundary (hot-swap between batches).

Strategies: frozen (no updates), threshold-only (frozen at the
recall-constrained threshold), periodic (fixed-interval random queries),
adwin-random / adwin-hybrid (score-shift-triggered queries), and
matched-replay (consumes a recorded trigger schedule instead of a live
detector, still gated by cooldown and dedup eligibility).
"""

import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import gbt
from .acquisition import ReplayBuffer, mix_with_replay, select_query_batch
from .drift import AdwinDetector
from .metrics import (
    Endpoints,
    RollingWindow,
    TraceRow,
    fp_burden,
    missed_positive_stats,
    positive_window_recall,
    realized_query_rate,
)
from .objectives import Objective, resolve_pos_weight
from .threshold import select_threshold

logger = logging.getLogger(__name__)

STRATEGY_KINDS = (
    "frozen",
    "periodic",
    "adwin-random",
    "adwin-hybrid",
    "threshold-only",
    "matched-replay",
)


@dataclass
class StrategyConfig:
    kind: str = "adwin-hybrid"
    periodic_interval: int = 10_000
    cooldown_events: int = 2_000
    b_min: int = 32
    buffer_capacity: int = 5_000
    batch_size: int = 1_000
    replay_enabled: bool = False
    replay_capacity: int = 512
    replay_ratio: float = 0.5
    trigger_schedule: list | None = None
    periodic_max_updates: int | None = None

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind: {self.kind!r}")


@dataclass
class RunSettings:
    """Everything one streaming run needs besides the data itself."""

    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    objective: Objective = field(default_factory=Objective)
    train: gbt.TrainConfig = field(default_factory=gbt.TrainConfig)
    threshold_policy: str = "max-f1"
    tail_fraction: float = 0.20
    grid_points: int = 101
    min_recall: float = 0.95
    adwin_delta: float = 0.002
    acquisition_policy: str = "hybrid"
    nominal_budget_fraction: float = 0.01
    rolling_window: int = 10_000
    burst_gap: int = 10_000
    burst_delay_mode: str = "positives"
    seed: int = 42


@dataclass
class RunLedger:
    """Query/update accounting, sufficient for the budget invariants."""

    trigger_events: list = field(default_factory=list)
    update_events: list = field(default_factory=list)
    per_trigger_sizes: list = field(default_factory=list)
    queried_ids: list = field(default_factory=list)
    pending_before_trigger: list = field(default_factory=list)
    max_pending_after_check: int = 0
    schedule_skipped_beyond_end: int = 0
    schedule_suppressed_by_cooldown: int = 0


@dataclass
class RunResult:
    trace: list
    endpoints: Endpoints
    trigger_events: list
    operating_point: object
    ensemble: gbt.BoostedEnsemble
    ledger: RunLedger


def _effective_policy(kind, configured):
    if kind == "periodic" or kind == "adwin-random":
        return "random"
    if kind == "adwin-hybrid":
        return "hybrid"
    return configured  # matched-replay substitutes the configured policy


def run_stream(X_train, y_train, X_stream, y_stream, settings):
    """Execute one full streaming run; deterministic for a fixed seed."""
    strat = settings.strategy
    X_train = np.asarray(X_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.int64)
    X_stream = np.asarray(X_stream, dtype=np.float64)
    y_stream = np.asarray(y_stream, dtype=np.int64)

    rng = np.random.default_rng(settings.seed)
    objective = resolve_pos_weight(settings.objective, y_train)
    ensemble = gbt.train_initial(X_train, y_train, objective, settings.train, rng=rng)

    tail_n = max(1, int(round(settings.tail_fraction * y_train.size)))
    tail_scores = ensemble.predict_proba(X_train[-tail_n:])
    tail_labels = y_train[-tail_n:]
    policy_name = (
        "recall-constrained" if strat.kind == "threshold-only" else settings.threshold_policy
    )
    operating_point = select_threshold(
        tail_scores, tail_labels, policy_name, settings.grid_points, settings.min_recall
    )
    theta = operating_point.theta

    adwin = (
        AdwinDetector(settings.adwin_delta)
        if strat.kind in ("adwin-random", "adwin-hybrid")
        else None
    )
    acquisition_policy = _effective_policy(strat.kind, settings.acquisition_policy)
    budget = int(round(settings.nominal_budget_fraction * strat.buffer_capacity))
    schedule = sorted(set(strat.trigger_schedule or [])) if strat.kind == "matched-replay" else []
    schedule_set = set(schedule)

    buffer = deque(maxlen=strat.buffer_capacity)  # (stream index, score)
    queried = set()
    pending = []  # stream indices with oracle labels outstanding for the next update
    replay = ReplayBuffer(strat.replay_capacity) if strat.replay_enabled else None
    window = RollingWindow(settings.rolling_window)
    ledger = RunLedger()

    n = y_stream.size
    preds = np.zeros(n, dtype=np.int8)
    cum_fp = 0
    cum_missed = 0
    recalls = []
    cooldown = 0
    updates_done = 0
    queries_total = 0
    applied_pos = 0
    applied_neg = 0
    replayed = 0
    trace = []

    for start in range(0, n, strat.batch_size):
        end = min(start + strat.batch_size, n)
        yb = y_stream[start:end]
        p = ensemble.predict_proba(X_stream[start:end])
        yhat = p >= theta
        preds[start:end] = yhat
        cum_fp += int(((yb == 0) & yhat).sum())
        cum_missed += int(((yb == 1) & ~yhat).sum())
        window.push_batch(yb, yhat)
        for offset in range(end - start):
            buffer.append((start + offset, float(p[offset])))

        triggered = False
        if adwin is not None:
            for value in p:
                if adwin.update(float(value)):
                    triggered = True
        elif strat.kind == "periodic":
            crossed = end // strat.periodic_interval > start // strat.periodic_interval
            capped = (
                strat.periodic_max_updates is not None
                and updates_done >= strat.periodic_max_updates
            )
            triggered = crossed and not capped
        elif strat.kind == "matched-replay":
            triggered = end in schedule_set
            if triggered and cooldown > 0:
                ledger.schedule_suppressed_by_cooldown += 1

        trigger_fired = 0
        if (
            triggered
            and cooldown == 0
            and budget > 0
            and ensemble.n_trees < ensemble.max_trees
        ):
            eligible = [(idx, score) for idx, score in buffer if idx not in queried]
            if eligible:
                scores = np.array([score for _, score in eligible])
                batch = select_query_batch(scores, theta, budget, acquisition_policy, rng)
                ids = [eligible[j][0] for j in batch.indices]
                ledger.pending_before_trigger.append(len(pending))
                queried.update(ids)
                pending.extend(ids)
                queries_total += len(ids)
                ledger.queried_ids.extend(ids)
                ledger.per_trigger_sizes.append(len(ids))
                ledger.trigger_events.append(end)
                trigger_fired = 1

        update_fired = 0
        if len(pending) >= strat.b_min:
            idx = np.array(pending, dtype=np.int64)
            X_batch = X_stream[idx]
            y_batch = y_stream[idx]  # oracle labels: stream ground truth
            applied_pos += int((y_batch == 1).sum())
            applied_neg += int((y_batch == 0).sum())
            if replay is not None:
                X_batch, y_batch, n_rep = mix_with_replay(
                    X_batch, y_batch, replay, strat.replay_ratio, rng
                )
                replayed += n_rep
            result = gbt.warm_start_update(ensemble, X_batch, y_batch, objective, settings.train)
            if result.cap_reached:
                logger.info("tree cap reached at %d trees", result.ensemble.n_trees)
            ensemble = result.ensemble  # hot-swap; effective from the next batch
            if result.appended > 0:
                updates_done += 1
                ledger.update_events.append(end)
                update_fired = 1
            pending.clear()
            cooldown = strat.cooldown_events
        ledger.max_pending_after_check = max(ledger.max_pending_after_check, len(pending))

        cooldown = max(cooldown - (end - start), 0)

        m = window.metrics()
        recalls.append(m["recall"])
        trace.append(
            TraceRow(
                batch_end_index=end,
                rolling_f1=m["f1"],
                rolling_precision=m["precision"],
                rolling_recall=m["recall"],
                rolling_fpr=m["fpr"],
                cum_fp=cum_fp,
                cum_missed_pos=cum_missed,
                cum_queries=queries_total,
                cum_updates=updates_done,
                trigger_fired=trigger_fired,
                update_fired=update_fired,
            )
        )

    if strat.kind == "matched-replay":
        beyond = [t for t in schedule if t > n]
        if beyond:
            ledger.schedule_skipped_beyond_end = len(beyond)
            logger.warning(
                "%d scheduled trigger(s) beyond stream end ignored: %s", len(beyond), beyond
            )

    benign_count = int((y_stream == 0).sum())
    stats = missed_positive_stats(
        y_stream, preds, settings.burst_gap, settings.burst_delay_mode
    )
    endpoints = Endpoints(
        stream_events=n,
        benign_count=benign_count,
        positive_count=n - benign_count,
        theta=theta,
        final_rolling_fpr=trace[-1].rolling_fpr if trace else None,
        cum_fp=cum_fp,
        fp_per_million_benign=fp_burden(cum_fp, benign_count),
        cum_missed_pos=stats.count,
        positive_window_recall=positive_window_recall(recalls),
        max_missed_streak=stats.max_streak,
        mean_burst_delay=stats.mean_burst_delay,
        queries=queries_total,
        updates=updates_done,
        applied_pos=applied_pos,
        applied_neg=applied_neg,
        replayed_labels=replayed,
        realized_query_rate=realized_query_rate(queries_total, n) if n else 0.0,
        trees=ensemble.n_trees,
    )
    return RunResult(
        trace=trace,
        endpoints=endpoints,
        trigger_events=list(ledger.trigger_events),
        operating_point=operating_point,
        ensemble=ensemble,
        ledger=ledger,
    )
