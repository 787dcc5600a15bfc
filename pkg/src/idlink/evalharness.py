"""Repeated stratified cross-validation and rank-based evaluation metrics.

Weighted precision/recall/AUC are class-support-weighted one-vs-rest
averages; AUC uses the Mann-Whitney statistic with midrank tie handling.
Metrics are averaged per fold by default; pooled-prediction mode pools each
repeat's predictions before scoring.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .learners import Dataset, predict_proba_matrix

METRIC_NAMES = ("accuracy", "auc", "precision", "recall")


@dataclass(frozen=True)
class EvalReport:
    """Mean/STD per metric over repeats x folds for one classifier run."""

    classifier: str
    repeats: int
    k: int
    seed: int
    mode: str
    metrics: dict[str, tuple[float, float]]  # name -> (mean, std)
    n_evaluations: int
    config_snapshot: dict = field(default_factory=dict)


def stratified_folds(dataset: Dataset, k: int = 10, seed: int = 0) -> list[np.ndarray]:
    """k disjoint index arrays covering the dataset; per-fold class counts
    stay within 1 of proportional."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for c in range(len(dataset.classes)):
        members = np.flatnonzero(dataset.y == c)
        if members.size < k:
            raise ValueError(
                f"class {dataset.classes[c]!r} has {members.size} instances, fewer than k={k}"
            )
        members = members[rng.permutation(members.size)]
        for f in range(k):
            folds[f].extend(members[f::k].tolist())
    return [np.array(sorted(f), dtype=int) for f in folds]


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=float)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def roc_auc(scores, labels) -> float:
    """Rank-based (Mann-Whitney) AUC with midrank ties.

    labels are truthy for the positive class; both classes must appear.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels).astype(bool)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("roc_auc requires both classes")
    ranks = _midranks(s)
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def weighted_auc(probs: np.ndarray, y: np.ndarray, n_classes: int) -> float:
    """Support-weighted mean of one-vs-rest AUCs (equal to plain AUC for binary)."""
    total = 0.0
    for c in range(n_classes):
        support = (y == c).sum() / y.size
        total += support * roc_auc(probs[:, c], y == c)
    return total


def confusion_matrix(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def weighted_precision_recall(cm: np.ndarray) -> tuple[float, float]:
    """Class-support-weighted precision and recall from a confusion matrix.

    Classes never predicted contribute precision 0 at their support weight.
    """
    n = cm.sum()
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)
    tp = np.diag(cm)
    precision = np.where(predicted > 0, tp / np.maximum(predicted, 1), 0.0)
    recall = np.where(support > 0, tp / np.maximum(support, 1), 0.0)
    w = support / n
    return float((w * precision).sum()), float((w * recall).sum())


def _score_predictions(y_true: np.ndarray, probs: np.ndarray, n_classes: int) -> dict[str, float]:
    y_pred = np.argmax(probs, axis=1)
    cm = confusion_matrix(y_true, y_pred, n_classes)
    prec, rec = weighted_precision_recall(cm)
    return {
        "accuracy": float((y_pred == y_true).mean()),
        "auc": weighted_auc(probs, y_true, n_classes),
        "precision": prec,
        "recall": rec,
    }


def repeated_cv(
    dataset: Dataset,
    trainer,
    repeats: int = 5,
    k: int = 10,
    seed: int = 0,
    predictor=predict_proba_matrix,
    classifier_name: str = "classifier",
    mode: str = "per_fold",
) -> EvalReport:
    """Repeats x k-fold stratified cross-validation.

    trainer(train_dataset) -> model; predictor(model, X) -> (n, n_classes)
    probabilities. Fold assignments differ per repeat (seed + repeat index).
    mode "per_fold" scores every held-out fold separately; "pooled" pools
    each repeat's predictions before scoring.
    """
    if mode not in ("per_fold", "pooled"):
        raise ValueError(f"unknown mode {mode!r}")
    n_classes = len(dataset.classes)
    per_eval: dict[str, list[float]] = {name: [] for name in METRIC_NAMES}
    for r in range(repeats):
        folds = stratified_folds(dataset, k=k, seed=seed + r)
        pooled_probs = np.zeros((dataset.n, n_classes))
        for f, test_idx in enumerate(folds):
            train_idx = np.concatenate([folds[i] for i in range(k) if i != f])
            model = trainer(dataset.subset(train_idx))
            probs = predictor(model, dataset.x[test_idx])
            if mode == "per_fold":
                scores = _score_predictions(dataset.y[test_idx], probs, n_classes)
                for name in METRIC_NAMES:
                    per_eval[name].append(scores[name])
            else:
                pooled_probs[test_idx] = probs
        if mode == "pooled":
            scores = _score_predictions(dataset.y, pooled_probs, n_classes)
            for name in METRIC_NAMES:
                per_eval[name].append(scores[name])
    metrics = {
        name: (float(np.mean(vals)), float(np.std(vals)))
        for name, vals in per_eval.items()
    }
    return EvalReport(
        classifier=classifier_name,
        repeats=repeats,
        k=k,
        seed=seed,
        mode=mode,
        metrics=metrics,
        n_evaluations=len(per_eval["accuracy"]),
    )


def report_rows(method_id: str, report: EvalReport) -> list[dict]:
    """Flatten one report into CSV-ready rows."""
    return [
        {
            "method_id": method_id,
            "classifier": report.classifier,
            "metric": name,
            "mean": mean,
            "std": std,
            "repeats": report.repeats,
            "k": report.k,
            "seed": report.seed,
        }
        for name, (mean, std) in report.metrics.items()
    ]


def write_report_csv(rows: list[dict], path, header_comment: str | None = None) -> None:
    cols = ["method_id", "classifier", "metric", "mean", "std", "repeats", "k", "seed"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in rows:
            writer.writerow([row["method_id"], row["classifier"], row["metric"],
                             repr(row["mean"]), repr(row["std"]),
                             row["repeats"], row["k"], row["seed"]])


def read_report_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [l for l in fh if not l.startswith("#")]
    reader = csv.DictReader(lines)
    rows = []
    for rec in reader:
        rows.append({
            "method_id": rec["method_id"],
            "classifier": rec["classifier"],
            "metric": rec["metric"],
            "mean": float(rec["mean"]),
            "std": float(rec["std"]),
            "repeats": int(rec["repeats"]),
            "k": int(rec["k"]),
            "seed": int(rec["seed"]),
        })
    return rows


def summarize(rows: list[dict]) -> tuple[str, list[dict]]:
    """Comparison table: methods as rows, classifier x metric columns,
    best value per column flagged with '*'. Returns (console text, cells)."""
    if not rows:
        raise ValueError("no report rows to summarize")
    methods = sorted({r["method_id"] for r in rows})
    classifiers = sorted({r["classifier"] for r in rows})
    by_key = {(r["method_id"], r["classifier"], r["metric"]): r for r in rows}

    columns = [(c, m) for c in classifiers for m in METRIC_NAMES]
    best: dict[tuple[str, str], float] = {}
    for col in columns:
        vals = [by_key[(meth, *col)]["mean"] for meth in methods if (meth, *col) in by_key]
        if vals:
            best[col] = max(vals)

    cells = []
    header = ["method_id"] + [f"{c}:{m}" for c, m in columns]
    lines = ["\t".join(header)]
    for meth in methods:
        line = [meth]
        for col in columns:
            rec = by_key.get((meth, *col))
            if rec is None:
                line.append("-")
                continue
            pct = 100.0 * rec["mean"]
            flag = "*" if rec["mean"] == best[col] else ""
            line.append(f"{pct:.2f}{flag}")
            cells.append({
                "method_id": meth,
                "classifier": col[0],
                "metric": col[1],
                "mean_pct": pct,
                "std_pct": 100.0 * rec["std"],
                "best": rec["mean"] == best[col],
            })
        lines.append("\t".join(line))
    return "\n".join(lines), cells


def write_summary_csv(cells: list[dict], path, header_comment: str | None = None) -> None:
    cols = ["method_id", "classifier", "metric", "mean_pct", "std_pct", "best"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(cols)
        for cell in cells:
            writer.writerow([cell["method_id"], cell["classifier"], cell["metric"],
                             f"{cell['mean_pct']:.4f}", f"{cell['std_pct']:.4f}",
                             str(cell["best"])])
