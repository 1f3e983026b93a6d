"""Rolling and cumulative screening metrics, plus projection arithmetic.

Rolling metrics are computed over a trailing event window and reported as
explicit None when undefined (no positives for recall/F1, no predicted
positives for precision, no negatives for FPR); undefined values serialize
as empty fields, never as 0 or NaN. Endpoint quantities are chosen so every
reported number can be recomputed offline from the persisted trace.
"""

import math
from collections import deque
from dataclasses import dataclass, fields

import numpy as np


class RollingWindow:
    """Trailing (label, prediction) window with running confusion counters."""

    def __init__(self, capacity=10_000):
        if capacity <= 0:
            raise ValueError("window capacity must be positive")
        self.capacity = capacity
        self._pairs = deque()
        self.tp = 0
        self.fp = 0
        self.tn = 0
        self.fn = 0

    def __len__(self):
        return len(self._pairs)

    def push(self, label, pred):
        if len(self._pairs) == self.capacity:
            old_label, old_pred = self._pairs.popleft()
            self._bump(old_label, old_pred, -1)
        self._pairs.append((label, pred))
        self._bump(label, pred, +1)

    def push_batch(self, labels, preds):
        for label, pred in zip(labels, preds):
            self.push(int(label), int(pred))

    def _bump(self, label, pred, delta):
        if label == 1:
            if pred == 1:
                self.tp += delta
            else:
                self.fn += delta
        else:
            if pred == 1:
                self.fp += delta
            else:
                self.tn += delta

    def counts(self):
        return self.tp, self.fp, self.tn, self.fn

    def metrics(self):
        return rolling_metrics(self)


def rolling_metrics(window):
    """{f1, precision, recall, fpr} with None for undefined entries."""
    tp, fp, tn, fn = window.counts()
    out = {"f1": None, "precision": None, "recall": None, "fpr": None}
    if tp + fn > 0:
        out["recall"] = tp / (tp + fn)
        out["f1"] = 2.0 * tp / (2.0 * tp + fp + fn)
    if tp + fp > 0:
        out["precision"] = tp / (tp + fp)
    if fp + tn > 0:
        out["fpr"] = fp / (fp + tn)
    return out


def positive_window_recall(recalls):
    """Mean rolling recall over windows that had positive support.

    ``recalls`` holds one entry per snapshot, None where recall was
    undefined. Returns None when no window had a positive.
    """
    defined = [r for r in recalls if r is not None]
    if not defined:
        return None
    return sum(defined) / len(defined)


@dataclass
class MissedPositiveStats:
    count: int
    max_streak: int
    mean_burst_delay: float | None


def missed_positive_stats(labels, preds, burst_gap=10_000, delay_mode="positives"):
    """Missed-positive count, longest missed streak, mean burst delay.

    A burst is a maximal run of positives in which consecutive positives
    are separated by fewer than ``burst_gap`` benign events. The delay of
    a burst counts positives (or all events, with delay_mode="events")
    from the burst start until its first detected positive; a burst with
    no detection contributes its full extent.
    """
    labels = np.asarray(labels)
    preds = np.asarray(preds)
    if labels.shape != preds.shape:
        raise ValueError("labels and predictions must have equal length")
    if delay_mode not in ("positives", "events"):
        raise ValueError(f"unknown delay mode: {delay_mode!r}")
    pos_idx = np.nonzero(labels == 1)[0]
    missed = (labels == 1) & (preds == 0)
    count = int(missed.sum())

    max_streak = 0
    streak = 0
    for i in pos_idx:
        if missed[i]:
            streak += 1
            max_streak = max(max_streak, streak)
        else:
            streak = 0

    if pos_idx.size == 0:
        return MissedPositiveStats(count, max_streak, None)

    delays = []
    burst_start = 0  # index into pos_idx
    for k in range(1, pos_idx.size + 1):
        new_burst = k == pos_idx.size or pos_idx[k] - pos_idx[k - 1] - 1 >= burst_gap
        if not new_burst:
            continue
        burst = pos_idx[burst_start:k]
        detected = np.nonzero(~missed[burst])[0]
        if detected.size == 0:
            if delay_mode == "positives":
                delays.append(float(burst.size))
            else:
                delays.append(float(burst[-1] - burst[0] + 1))
        else:
            first = int(detected[0])
            if delay_mode == "positives":
                delays.append(float(first))
            else:
                delays.append(float(burst[first] - burst[0]))
        burst_start = k
    return MissedPositiveStats(count, max_streak, sum(delays) / len(delays))


def fp_burden(cum_fp, benign_count):
    """False positives per million benign events; None without benign events."""
    if benign_count == 0:
        return None
    return cum_fp / benign_count * 1e6


def realized_query_rate(queries, stream_events):
    if stream_events <= 0:
        raise ValueError("stream_events must be positive")
    return queries / stream_events


@dataclass
class Projection:
    true_alerts: int
    false_alerts: int
    precision: float | None


def bayes_projection(recall, fpr, prior, daily_events):
    """Daily alert volume projected from offline recall/FPR at a prior.

    n_pos = round(prior * daily_events); alert counts floor downwards and
    precision comes from the integer counts.
    """
    if not 0.0 < prior < 1.0:
        raise ValueError("prior must lie in (0, 1)")
    if daily_events <= 0:
        raise ValueError("daily_events must be positive")
    n_pos = int(round(prior * daily_events))
    n_neg = int(daily_events) - n_pos
    tp = math.floor(recall * n_pos)
    fp = math.floor(fpr * n_neg)
    precision = tp / (tp + fp) if tp + fp > 0 else None
    return Projection(tp, fp, precision)


def multiseed_summary(endpoint_maps):
    """Per-metric median and IQR (linear-interpolation quartiles).

    Takes a list of flat {metric: value} maps, one per seed; metrics whose
    value is None in some seed are summarized over the defined values only,
    or reported as (None, None) when never defined.
    """
    if not endpoint_maps:
        raise ValueError("need at least one seed")
    keys = list(endpoint_maps[0].keys())
    out = {}
    for key in keys:
        values = [m.get(key) for m in endpoint_maps]
        defined = [v for v in values if v is not None]
        if not defined:
            out[key] = (None, None)
            continue
        arr = np.asarray(defined, dtype=np.float64)
        q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
        out[key] = (float(med), float(q3 - q1))
    return out


# --- trace and endpoint serialization ---------------------------------------

TRACE_COLUMNS = (
    "batch_end_index",
    "rolling_f1",
    "rolling_precision",
    "rolling_recall",
    "rolling_fpr",
    "cum_fp",
    "cum_missed_pos",
    "cum_queries",
    "cum_updates",
    "trigger_fired",
    "update_fired",
)


@dataclass
class TraceRow:
    batch_end_index: int
    rolling_f1: float | None
    rolling_precision: float | None
    rolling_recall: float | None
    rolling_fpr: float | None
    cum_fp: int
    cum_missed_pos: int
    cum_queries: int
    cum_updates: int
    trigger_fired: int
    update_fired: int


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trace_to_csv(rows):
    lines = [",".join(TRACE_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(getattr(row, col)) for col in TRACE_COLUMNS))
    return "\n".join(lines) + "\n"


def trace_from_csv(text):
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != ",".join(TRACE_COLUMNS):
        raise ValueError("unrecognized trace header")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        vals = dict(zip(TRACE_COLUMNS, parts))
        rows.append(
            TraceRow(
                batch_end_index=int(vals["batch_end_index"]),
                rolling_f1=float(vals["rolling_f1"]) if vals["rolling_f1"] else None,
                rolling_precision=float(vals["rolling_precision"]) if vals["rolling_precision"] else None,
                rolling_recall=float(vals["rolling_recall"]) if vals["rolling_recall"] else None,
                rolling_fpr=float(vals["rolling_fpr"]) if vals["rolling_fpr"] else None,
                cum_fp=int(vals["cum_fp"]),
                cum_missed_pos=int(vals["cum_missed_pos"]),
                cum_queries=int(vals["cum_queries"]),
                cum_updates=int(vals["cum_updates"]),
                trigger_fired=int(vals["trigger_fired"]),
                update_fired=int(vals["update_fired"]),
            )
        )
    return rows


@dataclass
class Endpoints:
    """Stream-end summary; sufficient to reproduce every reported number."""

    stream_events: int
    benign_count: int
    positive_count: int
    theta: float
    final_rolling_fpr: float | None
    cum_fp: int
    fp_per_million_benign: float | None
    cum_missed_pos: int
    positive_window_recall: float | None
    max_missed_streak: int
    mean_burst_delay: float | None
    queries: int
    updates: int
    applied_pos: int
    applied_neg: int
    replayed_labels: int
    realized_query_rate: float
    trees: int

    def to_text(self):
        lines = []
        for f in fields(self):
            lines.append(f"{f.name}={_fmt(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        raw = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, _, value = line.partition("=")
            raw[key] = value
        kwargs = {}
        for f in fields(cls):
            value = raw[f.name]
            if value == "":
                kwargs[f.name] = None
            elif f.name in (
                "stream_events",
                "benign_count",
                "positive_count",
                "cum_fp",
                "cum_missed_pos",
                "max_missed_streak",
                "queries",
                "updates",
                "applied_pos",
                "applied_neg",
                "replayed_labels",
                "trees",
            ):
                kwargs[f.name] = int(value)
            else:
                kwargs[f.name] = float(value)
        return cls(**kwargs)

    def as_map(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}
