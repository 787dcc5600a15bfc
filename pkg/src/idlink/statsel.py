"""Statistical feature analysis: ECDFs, two-sample KS tests, information gain.

KS p-values come from the asymptotic Kolmogorov distribution with effective
sample size n*m/(n+m); feature filtering compares the linked vs non-linked
per-pair feature values. Information gain uses equal-frequency binning and
is reported in bits.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .groundtruth import LINKED
from .pairmodel import PairInstance


@dataclass(frozen=True)
class KsResult:
    d: float  # sup gap between the two ECDFs
    p_value: float


@dataclass(frozen=True)
class KsFilterReport:
    kept: tuple[str, ...]
    dropped: tuple[str, ...]
    results: dict[str, KsResult]
    alpha: float


def ecdf(samples) -> tuple[np.ndarray, np.ndarray]:
    """Step points (sorted unique x, cumulative fraction); ends at 1."""
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise ValueError("ecdf requires at least one sample")
    xs, counts = np.unique(arr, return_counts=True)
    fracs = np.cumsum(counts) / arr.size
    return xs, fracs


def _ecdf_at(sorted_samples: np.ndarray, points: np.ndarray) -> np.ndarray:
    return np.searchsorted(sorted_samples, points, side="right") / sorted_samples.size


def kolmogorov_sf(lam: float, terms: int = 100) -> float:
    """Tail probability of the Kolmogorov distribution, Q(lam)."""
    if lam <= 0.0:
        return 1.0
    total = 0.0
    for k in range(1, terms + 1):
        term = 2.0 * (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-16:
            break
    return min(1.0, max(0.0, total))


def ks_two_sample(a, b) -> KsResult:
    """Exact sup ECDF gap over the merged sample points, asymptotic p."""
    xa = np.sort(np.asarray(a, dtype=float))
    xb = np.sort(np.asarray(b, dtype=float))
    if xa.size == 0 or xb.size == 0:
        raise ValueError("ks_two_sample requires two nonempty samples")
    merged = np.concatenate([xa, xb])
    d = float(np.abs(_ecdf_at(xa, merged) - _ecdf_at(xb, merged)).max())
    effective = xa.size * xb.size / (xa.size + xb.size)
    p = kolmogorov_sf(math.sqrt(effective) * d)
    return KsResult(d=d, p_value=p)


def ks_filter(instances: list[PairInstance], alpha: float = 0.01) -> KsFilterReport:
    """Keep features whose linked/non-linked distributions differ (p < alpha)."""
    if not instances:
        raise ValueError("empty dataset")
    labels = [inst.pair.label for inst in instances]
    mask = np.array([lab == LINKED for lab in labels])
    if mask.all() or not mask.any():
        raise ValueError("ks_filter requires both classes in the dataset")
    names = list(instances[0].features)
    data = np.array([[inst.features[n] for n in names] for inst in instances])
    kept, dropped, results = [], [], {}
    for j, name in enumerate(names):
        res = ks_two_sample(data[mask, j], data[~mask, j])
        results[name] = res
        (kept if res.p_value < alpha else dropped).append(name)
    return KsFilterReport(kept=tuple(kept), dropped=tuple(dropped), results=results, alpha=alpha)


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _equal_frequency_bins(values: np.ndarray, bins: int) -> np.ndarray:
    """Bin indices from interior quantile cut points (<= bins bins)."""
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    qs = np.quantile(values, [i / bins for i in range(1, bins)])
    edges = np.unique(qs)
    return np.searchsorted(edges, values, side="right")


def info_gain_rank(instances: list[PairInstance], bins: int = 10
                   ) -> list[tuple[str, float, float]]:
    """(feature, information gain in bits, share of summed IG in %) ranked
    by decreasing gain, ties broken by feature name."""
    if len(instances) < 2:
        raise ValueError("info_gain_rank requires at least two instances")
    labels = np.array([inst.pair.label == LINKED for inst in instances])
    names = list(instances[0].features)
    data = np.array([[inst.features[n] for n in names] for inst in instances])
    class_counts = np.array([int(labels.sum()), int((~labels).sum())])
    h_class = _entropy(class_counts)

    gains: dict[str, float] = {}
    for j, name in enumerate(names):
        if h_class == 0.0:
            gains[name] = 0.0
            continue
        bin_idx = _equal_frequency_bins(data[:, j], bins)
        cond = 0.0
        n = len(instances)
        for b in np.unique(bin_idx):
            in_bin = bin_idx == b
            counts = np.array([int(labels[in_bin].sum()), int((~labels[in_bin]).sum())])
            cond += in_bin.sum() / n * _entropy(counts)
        gains[name] = max(0.0, h_class - cond)

    total = sum(gains.values())
    ranked = sorted(gains.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(name, ig, (100.0 * ig / total) if total > 0 else 0.0) for name, ig in ranked]


def write_ecdf_csv(instances: list[PairInstance], path,
                   header_comment: str | None = None) -> None:
    """Per-feature, per-class ECDF points as CSV (feature, class, x, F)."""
    names = list(instances[0].features) if instances else []
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["feature", "class", "x", "F"])
        for name in names:
            by_class: dict[str, list[float]] = {}
            for inst in instances:
                by_class.setdefault(inst.pair.label, []).append(inst.features[name])
            for label in sorted(by_class):
                xs, fracs = ecdf(by_class[label])
                for x, f in zip(xs, fracs):
                    writer.writerow([name, label, repr(float(x)), repr(float(f))])


def write_ks_report(report: KsFilterReport, path, header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["feature", "D", "p_value", "kept"])
        for name, res in report.results.items():
            writer.writerow([name, repr(res.d), repr(res.p_value), str(name in report.kept)])


def write_ig_report(ranked: list[tuple[str, float, float]], path,
                    header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["feature", "info_gain_bits", "share_pct"])
        for name, ig, share in ranked:
            writer.writerow([name, repr(ig), repr(share)])
