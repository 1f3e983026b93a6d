"""Synthetic low-prevalence alert streams for desk-scale evaluation.

Gaussian class-conditional numeric features with optional mean shifts at
configured drift points, labels arranged as recurrent attack spikes or a
single concentrated burst, and an optional categorical column with
class-dependent category frequencies. Written as CSV plus a manifest so
generated data flows through the same ingestion path as real exports.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .ingest import DatasetManifest, save_manifest

TOPOLOGIES = ("recurrent-spikes", "single-burst")

CATEGORY_NAMES = ("info", "scan", "policy", "exploit", "malware")


@dataclass
class DriftPoint:
    """From this event on, classes draw from the new scalar means."""

    index: int
    benign_mean: float
    malicious_mean: float | None = None  # None keeps the previous value


@dataclass
class SyntheticStreamSpec:
    length: int = 100_000
    prevalence: float = 0.01
    n_features: int = 4
    drift_points: list = field(default_factory=list)
    attack_topology: str = "recurrent-spikes"
    seed: int = 0
    class_separation: float = 2.0
    n_categories: int = 0
    burst_start_frac: float = 0.10
    burst_density: float = 0.50
    spike_count: int = 5
    timestamp_start: int = 1_600_000_000_000
    timestamp_step: int = 1_000

    def __post_init__(self):
        if not 0.0 < self.prevalence <= 0.05:
            raise ValueError("prevalence must lie in (0, 0.05] for the low-prevalence regime")
        if self.attack_topology not in TOPOLOGIES:
            raise ValueError(f"unknown attack topology: {self.attack_topology!r}")
        if self.n_categories > len(CATEGORY_NAMES):
            raise ValueError(f"at most {len(CATEGORY_NAMES)} categories supported")


def _place_positives(spec, rng):
    n_pos = int(rng.binomial(spec.length, spec.prevalence))
    n_pos = min(n_pos, spec.length)
    labels = np.zeros(spec.length, dtype=np.int64)
    if n_pos == 0:
        return labels
    if spec.attack_topology == "single-burst":
        width = min(spec.length, max(n_pos, int(np.ceil(n_pos / spec.burst_density))))
        start = min(int(spec.burst_start_frac * spec.length), spec.length - width)
        positions = rng.choice(width, size=n_pos, replace=False) + start
    else:
        k = max(1, min(spec.spike_count, n_pos))
        centers = np.linspace(spec.length * 0.1, spec.length * 0.9, k)
        width = max(n_pos // k * 3, 64)
        chunks = []
        per_spike = np.full(k, n_pos // k, dtype=np.int64)
        per_spike[: n_pos % k] += 1
        for center, count in zip(centers, per_spike):
            lo = int(max(0, center - width // 2))
            hi = int(min(spec.length, lo + width))
            lo = max(0, hi - width)
            chunks.append(rng.choice(hi - lo, size=min(count, hi - lo), replace=False) + lo)
        positions = np.unique(np.concatenate(chunks))
    labels[positions] = 1
    return labels


def _means_per_event(spec, labels):
    benign = np.zeros(spec.length)
    malicious = np.full(spec.length, spec.class_separation, dtype=np.float64)
    cur_b, cur_m = 0.0, spec.class_separation
    points = sorted(spec.drift_points, key=lambda d: d.index)
    bounds = [d.index for d in points] + [spec.length]
    start = 0
    for d, end in zip(points, bounds[1:]):
        benign[start : d.index] = cur_b
        malicious[start : d.index] = cur_m
        cur_b = d.benign_mean
        if d.malicious_mean is not None:
            cur_m = d.malicious_mean
        start = d.index
    benign[start:] = cur_b
    malicious[start:] = cur_m
    return np.where(labels == 1, malicious, benign)


def _category_column(spec, labels, rng):
    cats = np.array(CATEGORY_NAMES[: spec.n_categories])
    k = cats.size
    benign_p = np.linspace(2.0, 0.5, k)
    benign_p /= benign_p.sum()
    malicious_p = benign_p[::-1].copy()
    out = np.empty(spec.length, dtype=object)
    benign_idx = np.nonzero(labels == 0)[0]
    pos_idx = np.nonzero(labels == 1)[0]
    out[benign_idx] = cats[rng.choice(k, size=benign_idx.size, p=benign_p)]
    out[pos_idx] = cats[rng.choice(k, size=pos_idx.size, p=malicious_p)]
    return out


def generate_stream(spec):
    """(timestamps, labels, features, categories-or-None), reproducible per seed."""
    rng = np.random.default_rng(spec.seed)
    labels = _place_positives(spec, rng)
    means = _means_per_event(spec, labels)
    X = rng.normal(0.0, 1.0, size=(spec.length, spec.n_features)) + means[:, None]
    categories = _category_column(spec, labels, rng) if spec.n_categories > 0 else None
    timestamps = spec.timestamp_start + np.arange(spec.length, dtype=np.int64) * spec.timestamp_step
    return timestamps, labels, X, categories


def write_dataset(spec, csv_path, manifest_path):
    """Materialize the stream as CSV + manifest; returns the manifest."""
    timestamps, labels, X, categories = generate_stream(spec)
    feature_columns = [f"feat_{i}" for i in range(spec.n_features)]
    header = ["timestamp", "label"] + feature_columns
    if categories is not None:
        header.append("alert_category")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(spec.length):
            row = [int(timestamps[i]), int(labels[i])]
            row.extend(repr(float(v)) for v in X[i])
            if categories is not None:
                row.append(categories[i])
            writer.writerow(row)
    manifest = DatasetManifest(
        label_column="label",
        timestamp_column="timestamp",
        categorical=["alert_category"] if categories is not None else [],
        numeric=feature_columns,
        derive_time_since=True,
    )
    save_manifest(manifest, manifest_path)
    return manifest
