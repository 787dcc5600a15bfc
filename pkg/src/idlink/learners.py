"""In-repo classifiers: Gaussian naive Bayes, gain-ratio decision tree,
random forest.

Trees split on thresholds maximizing information-gain ratio; when a node is
impure but every candidate split has zero gain (XOR-like plateaus), the
lowest-id feature still splits at its most balanced change point, so
consistent datasets always reach purity. Forests bootstrap by default and
draw a fresh feature subset at every split.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .pairmodel import PairInstance

MODEL_FORMAT = "idlink.model.v1"
_EPS = 1e-12


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus labels; the schema travels with the data."""

    feature_names: tuple[str, ...]
    x: np.ndarray  # (n, F) float
    y: np.ndarray  # (n,) int indices into classes
    classes: tuple[str, ...]

    def __post_init__(self):
        if self.x.ndim != 2 or self.x.shape[0] != self.y.shape[0]:
            raise ValueError(f"inconsistent shapes x={self.x.shape} y={self.y.shape}")
        if self.x.shape[1] != len(self.feature_names):
            raise ValueError("feature_names must match the matrix width")

    @classmethod
    def from_instances(cls, instances: list[PairInstance]) -> "Dataset":
        if not instances:
            raise ValueError("empty instance list")
        names = tuple(instances[0].features)
        classes = tuple(sorted({inst.pair.label for inst in instances}))
        rows = []
        labels = []
        for inst in instances:
            if tuple(inst.features) != names:
                raise ValueError("instances carry differing feature schemas")
            rows.append([inst.features[n] for n in names])
            labels.append(classes.index(inst.pair.label))
        return cls(
            feature_names=names,
            x=np.array(rows, dtype=float),
            y=np.array(labels, dtype=int),
            classes=classes,
        )

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.feature_names, self.x[idx], self.y[idx], self.classes)


@dataclass
class TrainedModel:
    kind: str  # naive_bayes | decision_tree | random_forest
    feature_names: tuple[str, ...]
    classes: tuple[str, ...]
    params: dict


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None  # None: unlimited
    features_per_split: int | None = None  # None: ceil(sqrt(F))
    seed: int = 0
    bootstrap: bool = True  # disabled only as a test hook

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")


def train_naive_bayes(dataset: Dataset) -> TrainedModel:
    """Per-class priors and per-feature Gaussian likelihoods.

    Variances are population variances floored at 1e-9; prediction runs in
    log space.
    """
    k = len(dataset.classes)
    counts = np.bincount(dataset.y, minlength=k)
    if (counts == 0).any():
        missing = [dataset.classes[i] for i in np.flatnonzero(counts == 0)]
        raise ValueError(f"missing class(es) in training data: {missing}")
    means = np.zeros((k, dataset.n_features))
    variances = np.zeros((k, dataset.n_features))
    for c in range(k):
        rows = dataset.x[dataset.y == c]
        means[c] = rows.mean(axis=0)
        variances[c] = np.maximum(rows.var(axis=0), 1e-9)
    return TrainedModel(
        kind="naive_bayes",
        feature_names=dataset.feature_names,
        classes=dataset.classes,
        params={
            "priors": (counts / dataset.n).tolist(),
            "means": means.tolist(),
            "variances": variances.tolist(),
        },
    )


def _entropy_bits(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _split_candidates(values: np.ndarray, y: np.ndarray, n_classes: int, min_leaf: int):
    """Per valid left-size i: (i, threshold, gain-vs-parent terms)."""
    n = values.size
    order = np.argsort(values, kind="stable")
    vs = values[order]
    ys = y[order]
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), ys] = 1.0
    left_counts = np.cumsum(onehot, axis=0)  # row i-1: counts of first i items
    total = left_counts[-1]

    sizes = np.arange(1, n)  # candidate left sizes
    valid = vs[1:] > vs[:-1]
    valid &= (sizes >= min_leaf) & (n - sizes >= min_leaf)
    if not valid.any():
        return None
    sizes = sizes[valid]
    lc = left_counts[sizes - 1]
    rc = total - lc

    def batch_entropy(c, denom):
        with np.errstate(divide="ignore", invalid="ignore"):
            p = c / denom[:, None]
            logs = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
        return -(p * logs).sum(axis=1)

    nl = sizes.astype(float)
    nr = float(n) - nl
    h_parent = _entropy_bits(total)
    gain = h_parent - (nl / n) * batch_entropy(lc, nl) - (nr / n) * batch_entropy(rc, nr)
    split_info = -(nl / n) * np.log2(nl / n) - (nr / n) * np.log2(nr / n)
    thresholds = (vs[sizes - 1] + vs[sizes]) / 2.0
    # midpoints of near-adjacent floats can round up to the right value,
    # which would empty the right child under "x <= thr"
    thresholds = np.where(thresholds >= vs[sizes], vs[sizes - 1], thresholds)
    return sizes, thresholds, gain, split_info


def _best_split(x: np.ndarray, y: np.ndarray, n_classes: int, feature_ids,
                min_leaf: int):
    """Max gain-ratio split over the candidate features; None if no
    positive-gain split exists."""
    best = None  # (gain_ratio, feature, threshold)
    for f in feature_ids:
        cands = _split_candidates(x[:, f], y, n_classes, min_leaf)
        if cands is None:
            continue
        _, thresholds, gain, split_info = cands
        ratio = np.where(gain > _EPS, gain / split_info, -1.0)
        j = int(np.argmax(ratio))
        if ratio[j] <= _EPS:
            continue
        if best is None or ratio[j] > best[0] + _EPS:
            best = (float(ratio[j]), int(f), float(thresholds[j]))
    if best is None:
        return None
    return best[1], best[2]


def _fallback_split(x: np.ndarray, y: np.ndarray, n_classes: int, feature_ids,
                    min_leaf: int):
    """Zero-gain plateau: most balanced valid split on the lowest-id feature."""
    for f in feature_ids:
        cands = _split_candidates(x[:, f], y, n_classes, min_leaf)
        if cands is None:
            continue
        sizes, thresholds, _, _ = cands
        j = int(np.argmin(np.abs(sizes - x.shape[0] / 2.0)))
        return int(f), float(thresholds[j])
    return None


def _grow_tree(x: np.ndarray, y: np.ndarray, n_classes: int, min_leaf: int,
               max_depth: int | None, choose_features) -> dict:
    """Iterative builder returning nested {split|leaf} dicts."""

    def leaf(idx):
        counts = np.bincount(y[idx], minlength=n_classes).astype(float)
        return {"kind": "leaf", "dist": (counts / counts.sum()).tolist()}

    root: dict = {}
    stack = [(np.arange(x.shape[0]), 0, root)]
    while stack:
        idx, depth, slot = stack.pop()
        node_y = y[idx]
        pure = (node_y == node_y[0]).all()
        depth_capped = max_depth is not None and depth >= max_depth
        if pure or depth_capped or idx.size < 2 * min_leaf:
            slot.update(leaf(idx))
            continue
        feature_ids = choose_features()
        split = _best_split(x[idx], node_y, n_classes, feature_ids, min_leaf)
        if split is None:
            split = _fallback_split(x[idx], node_y, n_classes, feature_ids, min_leaf)
        if split is None:
            slot.update(leaf(idx))
            continue
        f, thr = split
        left_mask = x[idx, f] <= thr
        left, right = {}, {}
        slot.update({"kind": "split", "feature": f, "threshold": thr,
                     "left": left, "right": right})
        stack.append((idx[left_mask], depth + 1, left))
        stack.append((idx[~left_mask], depth + 1, right))
    return root


def train_decision_tree(dataset: Dataset, min_leaf: int = 2,
                        max_depth: int | None = None) -> TrainedModel:
    """Single gain-ratio tree; stops on purity, min_leaf, or an unsplittable node."""
    if dataset.n == 0:
        raise ValueError("empty dataset")
    if min_leaf < 1:
        raise ValueError(f"min_leaf must be >= 1, got {min_leaf}")
    all_features = list(range(dataset.n_features))
    tree = _grow_tree(dataset.x, dataset.y, len(dataset.classes), min_leaf,
                      max_depth, lambda: all_features)
    return TrainedModel(
        kind="decision_tree",
        feature_names=dataset.feature_names,
        classes=dataset.classes,
        params={"tree": tree, "min_leaf": min_leaf, "max_depth": max_depth},
    )


def train_random_forest(dataset: Dataset, params: ForestParams = ForestParams()
                        ) -> TrainedModel:
    """Bootstrap forest with per-split random feature subsets.

    Deterministic under params.seed; prediction averages per-tree class
    distributions. Out-of-bag accuracy is recorded when bootstrapping.
    """
    if dataset.n == 0:
        raise ValueError("empty dataset")
    n, n_feat = dataset.n, dataset.n_features
    m = params.features_per_split or math.ceil(math.sqrt(n_feat))
    m = min(m, n_feat)
    k = len(dataset.classes)
    trees = []
    oob_votes = np.zeros((n, k))
    oob_counts = np.zeros(n)
    for t in range(params.n_trees):
        rng = np.random.default_rng(np.random.SeedSequence([params.seed, t]))
        if params.bootstrap:
            sample = rng.integers(0, n, size=n)
        else:
            sample = np.arange(n)

        def choose():
            if m == n_feat:
                return list(range(n_feat))
            return sorted(rng.choice(n_feat, size=m, replace=False).tolist())

        tree = _grow_tree(dataset.x[sample], dataset.y[sample], k, 1,
                          params.max_depth, choose)
        trees.append(tree)
        if params.bootstrap:
            oob = np.setdiff1d(np.arange(n), np.unique(sample), assume_unique=True)
            if oob.size:
                oob_votes[oob] += _tree_predict_matrix(tree, dataset.x[oob], k)
                oob_counts[oob] += 1
    scored = oob_counts > 0
    oob_accuracy = (
        float((np.argmax(oob_votes[scored], axis=1) == dataset.y[scored]).mean())
        if params.bootstrap and scored.any() else None
    )
    return TrainedModel(
        kind="random_forest",
        feature_names=dataset.feature_names,
        classes=dataset.classes,
        params={
            "trees": trees,
            "n_trees": params.n_trees,
            "max_depth": params.max_depth,
            "features_per_split": m,
            "seed": params.seed,
            "bootstrap": params.bootstrap,
            "oob_accuracy": oob_accuracy,
        },
    )


def _tree_predict_matrix(tree: dict, x: np.ndarray, n_classes: int) -> np.ndarray:
    out = np.empty((x.shape[0], n_classes))
    stack = [(tree, np.arange(x.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node["kind"] == "leaf":
            out[idx] = node["dist"]
            continue
        mask = x[idx, node["feature"]] <= node["threshold"]
        stack.append((node["left"], idx[mask]))
        stack.append((node["right"], idx[~mask]))
    return out


def predict_proba_matrix(model: TrainedModel, x: np.ndarray) -> np.ndarray:
    """(n, n_classes) probabilities; rows sum to 1."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != len(model.feature_names):
        raise ValueError(
            f"schema mismatch: model expects {len(model.feature_names)} features, got {x.shape}"
        )
    if model.kind == "naive_bayes":
        means = np.asarray(model.params["means"])
        variances = np.asarray(model.params["variances"])
        priors = np.asarray(model.params["priors"])
        log_post = np.log(priors)[None, :] + np.stack(
            [
                (-0.5 * (np.log(2.0 * np.pi * variances[c]) + (x - means[c]) ** 2 / variances[c])).sum(axis=1)
                for c in range(len(model.classes))
            ],
            axis=1,
        )
        log_post -= log_post.max(axis=1, keepdims=True)
        probs = np.exp(log_post)
        return probs / probs.sum(axis=1, keepdims=True)
    if model.kind == "decision_tree":
        return _tree_predict_matrix(model.params["tree"], x, len(model.classes))
    if model.kind == "random_forest":
        acc = np.zeros((x.shape[0], len(model.classes)))
        for tree in model.params["trees"]:
            acc += _tree_predict_matrix(tree, x, len(model.classes))
        return acc / len(model.params["trees"])
    raise ValueError(f"unknown model kind {model.kind!r}")


def predict_proba(model: TrainedModel, instance) -> dict[str, float]:
    """Class distribution for one instance (feature dict or vector)."""
    if isinstance(instance, dict):
        if set(instance) != set(model.feature_names):
            differing = set(model.feature_names) ^ set(instance)
            raise ValueError(f"instance schema differs from training schema: {sorted(differing)}")
        row = np.array([instance[n] for n in model.feature_names], dtype=float)
    else:
        row = np.asarray(instance, dtype=float)
        if row.shape != (len(model.feature_names),):
            raise ValueError(
                f"expected {len(model.feature_names)} features, got shape {row.shape}"
            )
    probs = predict_proba_matrix(model, row[None, :])[0]
    return dict(zip(model.classes, probs.tolist()))


def save_model(model: TrainedModel, path) -> None:
    payload = {
        "format": MODEL_FORMAT,
        "kind": model.kind,
        "feature_names": list(model.feature_names),
        "classes": list(model.classes),
        "params": model.params,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)


def load_model(path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: unsupported model format {payload.get('format')!r}")
    return TrainedModel(
        kind=payload["kind"],
        feature_names=tuple(payload["feature_names"]),
        classes=tuple(payload["classes"]),
        params=payload["params"],
    )
