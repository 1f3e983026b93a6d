"""Histogram-based gradient-boosted trees with append-only warm starts.

A deliberately small booster: axis-aligned regression trees grown
depth-wise over quantile-binned features, additive log-odds leaves, and
warm-start continuation that appends new trees to a frozen prefix. Bin
edges are computed once from the initial training matrix and reused for
every later update so update cost stays bounded and deterministic.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .objectives import HESS_FLOOR, PROB_EPS, grad_hess, resolve_pos_weight

DUMP_HEADER = "alertscreen-gbt v1"


@dataclass
class TrainConfig:
    initial_rounds: int = 100
    rounds_per_update: int = 10
    learning_rate: float = 0.10
    max_depth: int = 6
    max_trees: int = 500
    bins: int = 256
    min_child_weight: float = 1.0
    subsample: float = 0.90
    colsample: float = 0.90
    l2_reg: float = 1.00


class Tree:
    """One regression tree as flat node arrays.

    feature[i] >= 0 marks a split node (go left when x[feature] < threshold),
    feature[i] == -1 marks a leaf whose additive value is value[i].
    """

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def n_nodes(self):
        return self.feature.size

    def apply(self, X):
        """Leaf value per row of X."""
        node = np.zeros(X.shape[0], dtype=np.int32)
        pending = self.feature[node] >= 0
        while pending.any():
            idx = np.nonzero(pending)[0]
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] < self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            pending[idx] = self.feature[node[idx]] >= 0
        return self.value[node]

    def root_feature(self):
        return int(self.feature[0])


@dataclass
class BoostedEnsemble:
    """Ordered list of trees plus base log-odds; immutable by convention.

    Warm starts return a new ensemble sharing the tree prefix, so callers
    hot-swap the whole value. The generator drives subsample/colsample
    draws and is carried across updates (it is not serialized).
    """

    trees: list
    base_score: float
    learning_rate: float
    max_depth: int
    max_trees: int
    bin_edges: list
    n_features: int
    rng: np.random.Generator = field(repr=False, default=None)

    @property
    def n_trees(self):
        return len(self.trees)

    def _check_width(self, X):
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"feature width mismatch: got {X.shape[1] if X.ndim == 2 else X.shape}, "
                f"expected {self.n_features}"
            )

    def predict_margin(self, X):
        X = np.asarray(X, dtype=np.float64)
        self._check_width(X)
        margin = np.full(X.shape[0], self.base_score, dtype=np.float64)
        for tree in self.trees:
            margin += self.learning_rate * tree.apply(X)
        return margin

    def predict_proba(self, X):
        """Positive-class probability, strictly inside (0, 1)."""
        p = _sigmoid(self.predict_margin(X))
        return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)

    def dump(self):
        """Versioned text serialization (trees, base score, bin edges)."""
        lines = [DUMP_HEADER]
        lines.append(f"n_features {self.n_features}")
        lines.append(f"base_score {self.base_score!r}")
        lines.append(f"learning_rate {self.learning_rate!r}")
        lines.append(f"max_depth {self.max_depth}")
        lines.append(f"max_trees {self.max_trees}")
        for f, edges in enumerate(self.bin_edges):
            lines.append("edges %d %s" % (f, " ".join(repr(float(e)) for e in edges)))
        lines.append(f"n_trees {self.n_trees}")
        for t, tree in enumerate(self.trees):
            lines.append(f"tree {t} {tree.n_nodes}")
            for i in range(tree.n_nodes):
                if tree.feature[i] >= 0:
                    lines.append(
                        "%d split %d %r %d %d"
                        % (i, tree.feature[i], float(tree.threshold[i]), tree.left[i], tree.right[i])
                    )
                else:
                    lines.append("%d leaf %r" % (i, float(tree.value[i])))
        return "\n".join(lines) + "\n"

    def dump_tree(self, index):
        """Text dump of a single tree (prefix-stability checks)."""
        tree = self.trees[index]
        lines = []
        for i in range(tree.n_nodes):
            if tree.feature[i] >= 0:
                lines.append(
                    "%d split %d %r %d %d"
                    % (i, tree.feature[i], float(tree.threshold[i]), tree.left[i], tree.right[i])
                )
            else:
                lines.append("%d leaf %r" % (i, float(tree.value[i])))
        return "\n".join(lines)

    @classmethod
    def load(cls, text):
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != DUMP_HEADER:
            raise ValueError("unrecognized model dump header")
        fields = {}
        edges = {}
        pos = 1
        while pos < len(lines) and not lines[pos].startswith("n_trees "):
            key, _, rest = lines[pos].partition(" ")
            if key == "edges":
                fidx, _, vals = rest.partition(" ")
                edges[int(fidx)] = np.array(
                    [float(v) for v in vals.split()] if vals else [], dtype=np.float64
                )
            else:
                fields[key] = rest
            pos += 1
        n_features = int(fields["n_features"])
        n_trees = int(lines[pos].split()[1])
        pos += 1
        trees = []
        for _ in range(n_trees):
            n_nodes = int(lines[pos].split()[2])
            pos += 1
            feature = np.full(n_nodes, -1, dtype=np.int32)
            threshold = np.zeros(n_nodes)
            left = np.full(n_nodes, -1, dtype=np.int32)
            right = np.full(n_nodes, -1, dtype=np.int32)
            value = np.zeros(n_nodes)
            for _ in range(n_nodes):
                parts = lines[pos].split()
                pos += 1
                i = int(parts[0])
                if parts[1] == "split":
                    feature[i] = int(parts[2])
                    threshold[i] = float(parts[3])
                    left[i] = int(parts[4])
                    right[i] = int(parts[5])
                else:
                    value[i] = float(parts[2])
            trees.append(Tree(feature, threshold, left, right, value))
        return cls(
            trees=trees,
            base_score=float(fields["base_score"]),
            learning_rate=float(fields["learning_rate"]),
            max_depth=int(fields["max_depth"]),
            max_trees=int(fields["max_trees"]),
            bin_edges=[edges[f] for f in range(n_features)],
            n_features=n_features,
        )


@dataclass
class WarmStartResult:
    ensemble: BoostedEnsemble
    appended: int
    cap_reached: bool

    @property
    def status(self):
        return "cap-reached" if self.cap_reached else "ok"


def _sigmoid(z):
    out = np.empty_like(z)
    posm = z >= 0
    out[posm] = 1.0 / (1.0 + np.exp(-z[posm]))
    ez = np.exp(z[~posm])
    out[~posm] = ez / (1.0 + ez)
    return out


def compute_bin_edges(X, n_bins):
    """Per-feature split candidates.

    Features with few distinct values get exact midpoints (histogram split
    then equals an exhaustive scan); wide features get equal-frequency
    quantile edges.
    """
    edges = []
    for f in range(X.shape[1]):
        col = X[:, f]
        distinct = np.unique(col)
        if distinct.size <= 1:
            e = np.empty(0, dtype=np.float64)
        elif distinct.size <= n_bins:
            e = (distinct[:-1] + distinct[1:]) / 2.0
        else:
            qs = np.quantile(col, np.arange(1, n_bins) / n_bins)
            e = np.unique(qs)
        edges.append(e)
    return edges


def bin_features(X, bin_edges):
    binned = np.empty(X.shape, dtype=np.int32)
    for f, e in enumerate(bin_edges):
        binned[:, f] = np.searchsorted(e, X[:, f], side="right")
    return binned


def find_best_split(binned, g, h, rows, feat_ids, n_bins, l2_reg, min_child_weight):
    """Best (feature, bin, gain) over histogram cut points, or None.

    Gain must be strictly positive; ties resolve to the smallest feature
    index then the smallest bin, so growth is deterministic.
    """
    g_rows = g[rows]
    h_rows = h[rows]
    g_total = g_rows.sum()
    h_total = h_rows.sum()
    parent = g_total * g_total / (h_total + l2_reg)
    best_gain = 0.0
    best = None
    for f in feat_ids:
        nb = n_bins[f]
        if nb < 2:
            continue
        bf = binned[rows, f]
        hist_g = np.bincount(bf, weights=g_rows, minlength=nb)
        hist_h = np.bincount(bf, weights=h_rows, minlength=nb)
        g_left = np.cumsum(hist_g)[:-1]
        h_left = np.cumsum(hist_h)[:-1]
        g_right = g_total - g_left
        h_right = h_total - h_left
        ok = (h_left >= min_child_weight) & (h_right >= min_child_weight)
        if not ok.any():
            continue
        gains = 0.5 * (
            g_left * g_left / (h_left + l2_reg)
            + g_right * g_right / (h_right + l2_reg)
            - parent
        )
        gains[~ok] = -np.inf
        b = int(np.argmax(gains))
        if gains[b] > best_gain:
            best_gain = float(gains[b])
            best = (f, b, best_gain)
    return best


def _grow_tree(binned, g, h, rows, feat_ids, bin_edges, n_bins, config):
    feature, threshold, left, right, value, depth = [], [], [], [], [], []

    def new_node(d):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        depth.append(d)
        return len(feature) - 1

    frontier = [(new_node(0), rows)]
    while frontier:
        node_id, node_rows = frontier.pop(0)
        best = None
        if depth[node_id] < config.max_depth and node_rows.size >= 2:
            best = find_best_split(
                binned, g, h, node_rows, feat_ids, n_bins, config.l2_reg, config.min_child_weight
            )
        if best is None:
            g_sum = g[node_rows].sum()
            h_sum = h[node_rows].sum()
            value[node_id] = -g_sum / (h_sum + config.l2_reg)
            continue
        f, b, _ = best
        feature[node_id] = f
        threshold[node_id] = float(bin_edges[f][b])
        mask = binned[node_rows, f] <= b
        left_id = new_node(depth[node_id] + 1)
        right_id = new_node(depth[node_id] + 1)
        left[node_id] = left_id
        right[node_id] = right_id
        frontier.append((left_id, node_rows[mask]))
        frontier.append((right_id, node_rows[~mask]))
    return Tree(feature, threshold, left, right, value)


def _boost(ensemble, X, y, objective, config, rounds):
    binned = bin_features(X, ensemble.bin_edges)
    n_bins = [e.size + 1 for e in ensemble.bin_edges]
    n, width = X.shape
    margin = ensemble.predict_margin(X)
    rng = ensemble.rng
    all_rows = np.arange(n)
    all_feats = np.arange(width)
    n_cols = max(1, int(round(config.colsample * width)))
    for _ in range(rounds):
        p = np.clip(_sigmoid(margin), PROB_EPS, 1.0 - PROB_EPS)
        g, h = grad_hess(p, y, objective, hess_floor=HESS_FLOOR)
        if config.subsample < 1.0:
            mask = rng.random(n) < config.subsample
            rows = all_rows[mask] if mask.any() else all_rows
        else:
            rows = all_rows
        if n_cols < width:
            feats = np.sort(rng.choice(width, size=n_cols, replace=False))
        else:
            feats = all_feats
        tree = _grow_tree(binned, g, h, rows, feats, ensemble.bin_edges, n_bins, config)
        ensemble.trees.append(tree)
        margin += ensemble.learning_rate * tree.apply(X)


def train_initial(X, y, objective, config, seed=42, rng=None):
    """Train the frozen core: exactly config.initial_rounds trees.

    base_score is the log-odds of training prevalence. Deterministic for a
    fixed seed; pass an existing generator to share the draw stream with a
    surrounding run.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n_pos = int((y == 1).sum())
    if n_pos == 0 or n_pos == y.size:
        raise ValueError("training data must contain both classes")
    if rng is None:
        rng = np.random.default_rng(seed)
    prevalence = n_pos / y.size
    ensemble = BoostedEnsemble(
        trees=[],
        base_score=math.log(prevalence / (1.0 - prevalence)),
        learning_rate=config.learning_rate,
        max_depth=config.max_depth,
        max_trees=config.max_trees,
        bin_edges=compute_bin_edges(X, config.bins),
        n_features=X.shape[1],
        rng=rng,
    )
    objective = resolve_pos_weight(objective, y)
    _boost(ensemble, X, y, objective, config, config.initial_rounds)
    return ensemble


def warm_start_update(ensemble, X, y, objective, config):
    """Append up to rounds_per_update trees fitted to the labeled batch.

    Trees are fitted to gradients under the current ensemble's predictions;
    the existing prefix is never modified. Returns a new ensemble value so
    the caller can hot-swap it; at the tree cap this is a no-op with a
    cap-reached status.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if y.size == 0:
        raise ValueError("warm-start batch is empty")
    ensemble._check_width(X)
    room = ensemble.max_trees - ensemble.n_trees
    if room <= 0:
        return WarmStartResult(ensemble, 0, True)
    n_new = min(config.rounds_per_update, room)
    updated = BoostedEnsemble(
        trees=list(ensemble.trees),
        base_score=ensemble.base_score,
        learning_rate=ensemble.learning_rate,
        max_depth=ensemble.max_depth,
        max_trees=ensemble.max_trees,
        bin_edges=ensemble.bin_edges,
        n_features=ensemble.n_features,
        rng=ensemble.rng,
    )
    _boost(updated, X, y, objective, config, n_new)
    return WarmStartResult(updated, n_new, updated.n_trees >= updated.max_trees)
