"""Joint representation of an account pair for classification.

Eleven method configurations are supported (METHOD_IDS): per-category
absolute-difference vectors, per-category similarity scores, their
concatenations, and two text-similarity features (mean normalized edit
distance over post cross products, cosine of word-embedding semantic
centers).
"""

from __future__ import annotations

import csv
import hashlib
import logging
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError
from .groundtruth import LabeledPair
from .textfeat import CATEGORY_ACTIVITY, CATEGORY_LINGUISTIC, CATEGORY_NETWORK, FeatureVector

log = logging.getLogger(__name__)

METHOD_IDS = (
    "activity_abs",
    "linguistic_abs",
    "network_abs",
    "all_abs",
    "activity_abs+edits+sem",
    "linguistic_abs+edits+sem",
    "network_abs+edits+sem",
    "all_abs+edits+sem",
    "all_sim",
    "all_sim+all_abs",
    "all_sim+all_abs+edits+sem",
)

SIMILARITY_METRICS = ("cosine", "euclidean", "manhattan")

_CATEGORIES = (CATEGORY_ACTIVITY, CATEGORY_LINGUISTIC, CATEGORY_NETWORK)


@dataclass(frozen=True)
class PairInstance:
    pair: LabeledPair
    method_id: str
    features: dict[str, float]

    def __post_init__(self):
        for name, v in self.features.items():
            if not np.isfinite(v):
                raise ValueError(f"non-finite pair feature {name!r}: {v}")


@dataclass(frozen=True)
class EmbeddingTable:
    """token -> D-vector map; D is fixed across the table."""

    dim: int
    vectors: dict[str, np.ndarray]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"embedding dimension must be >= 1, got {self.dim}")
        for tok, vec in self.vectors.items():
            if vec.shape != (self.dim,):
                raise ValueError(f"vector for {tok!r} has shape {vec.shape}, expected ({self.dim},)")


def load_embeddings(path) -> EmbeddingTable:
    """Read a text embedding table: optional "count dim" header, then one
    token and D decimals per line. Dimensions outside 50-300 are unusual
    for word vectors and only logged."""
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        parts = first.split()
        start_lineno = 2
        if len(parts) == 2 and all(p.lstrip("-").isdigit() for p in parts):
            dim = int(parts[1])
        elif parts:
            token, vec = _parse_embedding_row(parts, path, 1)
            dim = vec.size
            vectors[token] = vec
        for lineno, line in enumerate(fh, start=start_lineno):
            parts = line.split()
            if not parts:
                continue
            token, vec = _parse_embedding_row(parts, path, lineno)
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise DataFormatError(f"{path}: line {lineno}: expected {dim} values, got {vec.size}")
            vectors[token] = vec
    if dim is None or not vectors:
        raise DataFormatError(f"{path}: empty embedding table")
    if not 50 <= dim <= 300:
        log.warning("embedding dimension %d is outside the usual 50-300 range", dim)
    return EmbeddingTable(dim=dim, vectors=vectors)


def _parse_embedding_row(parts, path, lineno):
    try:
        return parts[0], np.array([float(x) for x in parts[1:]], dtype=float)
    except ValueError as exc:
        raise DataFormatError(f"{path}: line {lineno}: non-numeric embedding value") from exc


def random_embedding_table(tokens, dim: int = 50, seed: int = 0) -> EmbeddingTable:
    """Deterministic random unit vectors per token; stand-in for trained
    embeddings when running on synthetic corpora."""
    vectors = {}
    for tok in sorted(set(tokens)):
        digest = hashlib.sha256(tok.encode("utf-8")).digest()
        tok_key = int.from_bytes(digest[:8], "little")
        rng = np.random.default_rng(np.random.SeedSequence([seed, tok_key]))
        v = rng.standard_normal(dim)
        vectors[tok] = v / np.linalg.norm(v)
    return EmbeddingTable(dim=dim, vectors=vectors)


def write_embeddings(table: EmbeddingTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table.vectors)} {table.dim}\n")
        for tok in sorted(table.vectors):
            vals = " ".join(f"{x:.6f}" for x in table.vectors[tok])
            fh.write(f"{tok} {vals}\n")


def abs_diff(va: FeatureVector, vb: FeatureVector) -> np.ndarray:
    """Elementwise |a - b| in schema order; schemas must match."""
    if va.category != vb.category or va.names != vb.names:
        raise ValueError(f"schema mismatch: {va.category}/{len(va)} vs {vb.category}/{len(vb)}")
    return np.abs(va.as_array() - vb.as_array())


@dataclass(frozen=True)
class MinMaxScaler:
    category: str
    names: tuple[str, ...]
    mins: np.ndarray
    maxs: np.ndarray


def fit_minmax(vectors: list[FeatureVector]) -> MinMaxScaler:
    """Per-feature min/max over all accounts of one category."""
    if not vectors:
        raise ValueError("fit_minmax requires at least one vector")
    first = vectors[0]
    for v in vectors[1:]:
        if v.category != first.category or v.names != first.names:
            raise ValueError("fit_minmax requires identical schemas")
    data = np.stack([v.as_array() for v in vectors])
    return MinMaxScaler(
        category=first.category,
        names=first.names,
        mins=data.min(axis=0),
        maxs=data.max(axis=0),
    )


def apply_minmax(scaler: MinMaxScaler, v: FeatureVector) -> FeatureVector:
    """Scale into [0,1] per feature; constant features map to 0."""
    if v.category != scaler.category or v.names != scaler.names:
        raise ValueError("scaler/vector schema mismatch")
    span = scaler.maxs - scaler.mins
    arr = v.as_array()
    scaled = np.where(span > 0, (arr - scaler.mins) / np.where(span > 0, span, 1.0), 0.0)
    return FeatureVector(v.category, dict(zip(scaler.names, scaled.tolist())))


def category_similarity(va, vb, metric: str = "cosine") -> float:
    """Similarity of two scaled vectors.

    cosine: standard cosine, 0 when either vector is all zeros.
    euclidean: 1 - dist/sqrt(n); manhattan: 1 - dist/n. Both land in [0,1]
    when the inputs are min-max scaled.
    """
    a = np.asarray(va, dtype=float)
    b = np.asarray(vb, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size < 1:
        raise ValueError(f"expected equal-length 1-D vectors, got {a.shape} and {b.shape}")
    if metric == "cosine":
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na == 0.0 or nb == 0.0:
            return 0.0
        return float(a @ b / (na * nb))
    if metric == "euclidean":
        return float(1.0 - np.linalg.norm(a - b) / np.sqrt(a.size))
    if metric == "manhattan":
        return float(1.0 - np.abs(a - b).sum() / a.size)
    raise ValueError(f"unknown similarity metric {metric!r}")


def _text_codes(s: str) -> np.ndarray:
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32).astype(np.int64)


def _lev_numpy(a: np.ndarray, b: np.ndarray) -> int:
    if a.size > b.size:
        a, b = b, a  # iterate over the shorter string, vectorize the longer
    n = b.size
    offsets = np.arange(n, dtype=np.int64)
    prev = np.arange(n + 1, dtype=np.int64)
    cur = np.empty(n + 1, dtype=np.int64)
    for i in range(1, a.size + 1):
        sub = prev[:-1] + (b != a[i - 1])
        m = np.minimum(sub, prev[1:] + 1)
        # fold in insertions: cur[j] = min(m[j-1], cur[j-1] + 1), cur[0] = i
        best = np.minimum.accumulate(m - offsets)
        cur[0] = i
        cur[1:] = np.minimum(best, i + 1) + offsets
        prev, cur = cur, prev
    return int(prev[-1])


try:  # optional fast path; the numpy kernel is the portable fallback
    from numba import njit as _njit

    @_njit(cache=True)
    def _lev_jit(a, b):  # pragma: no cover - exercised via levenshtein
        n = b.size
        prev = np.empty(n + 1, np.int64)
        cur = np.empty(n + 1, np.int64)
        for j in range(n + 1):
            prev[j] = j
        for i in range(a.size):
            cur[0] = i + 1
            ca = a[i]
            for j in range(1, n + 1):
                best = prev[j - 1] + (1 if b[j - 1] != ca else 0)
                dele = prev[j] + 1
                if dele < best:
                    best = dele
                ins = cur[j - 1] + 1
                if ins < best:
                    best = ins
                cur[j] = best
            prev, cur = cur, prev
        return prev[n]

    _lev_kernel = _lev_jit
except ImportError:  # pragma: no cover
    _lev_kernel = _lev_numpy


def levenshtein(s: str, t: str) -> int:
    """Exact single-character edit distance over Unicode scalar values."""
    if s == t:
        return 0
    if not s:
        return len(t)
    if not t:
        return len(s)
    return int(_lev_kernel(_text_codes(s), _text_codes(t)))


def edit_similarity(
    texts_a: list[str],
    texts_b: list[str],
    normalized: bool = True,
    sample_cap: int = 0,
    seed: int = 0,
) -> float:
    """Mean edit distance over the cross product of two accounts' posts.

    Texts are expected pre-normalized; empty strings are dropped, and the
    feature is 0 when either side has nothing left. With normalized=True
    each distance is divided by max(len) so the mean lands in [0,1].
    sample_cap > 0 caps the cross product by uniform sampling.
    """
    a = [t for t in texts_a if t]
    b = [t for t in texts_b if t]
    if not a or not b:
        return 0.0
    total_pairs = len(a) * len(b)
    if 0 < sample_cap < total_pairs:
        rng = np.random.default_rng(seed)
        flat = rng.choice(total_pairs, size=sample_cap, replace=False)
        index_pairs = [(f // len(b), f % len(b)) for f in sorted(flat.tolist())]
    else:
        index_pairs = [(i, j) for i in range(len(a)) for j in range(len(b))]
    codes_a = [_text_codes(t) for t in a]
    codes_b = [_text_codes(t) for t in b]
    acc = 0.0
    for i, j in index_pairs:
        d = int(_lev_kernel(codes_a[i], codes_b[j]))
        if normalized:
            d /= max(codes_a[i].size, codes_b[j].size)
        acc += d
    return acc / len(index_pairs)


def semantic_center(texts: list[str], emb: EmbeddingTable) -> np.ndarray:
    """Mean of per-post vectors; a post's vector is the mean of its
    in-vocabulary token vectors. Posts without any in-vocabulary token are
    excluded from the outer mean; all-excluded yields the zero vector."""
    post_vecs = []
    for text in texts:
        hits = [emb.vectors[tok] for tok in text.split() if tok in emb.vectors]
        if hits:
            post_vecs.append(np.mean(hits, axis=0))
    if not post_vecs:
        return np.zeros(emb.dim)
    return np.mean(post_vecs, axis=0)


def semantic_similarity(ca: np.ndarray, cb: np.ndarray) -> float:
    """Cosine of two semantic centers; 0 when either is the zero vector."""
    a = np.asarray(ca, dtype=float)
    b = np.asarray(cb, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b / (na * nb))


def _require(condition: bool, what: str):
    if not condition:
        raise ValueError(f"missing upstream artifact: {what}")


def assemble_pair(
    pair: LabeledPair,
    method_id: str,
    account_vectors: dict[str, dict[str, FeatureVector]],
    *,
    texts: dict[str, list[str]] | None = None,
    embeddings: EmbeddingTable | None = None,
    semantic_centers: dict[str, np.ndarray] | None = None,
    precomputed_edits: dict[tuple[str, str], float] | None = None,
    metric: str = "cosine",
    edit_normalized: bool = True,
    edit_sample_cap: int = 0,
    edit_seed: int = 0,
) -> PairInstance:
    """Build the feature map for one pair under one method configuration.

    account_vectors maps account -> category -> scaled FeatureVector; texts
    maps account -> normalized post texts (needed for edits/sem blocks).
    Blocks are concatenated in the order the method id names them.
    """
    if method_id not in METHOD_IDS:
        raise ValueError(f"unknown method_id {method_id!r}; expected one of {METHOD_IDS}")
    a, b = pair.account_a, pair.account_b
    _require(a in account_vectors, f"feature vectors for {a!r}")
    _require(b in account_vectors, f"feature vectors for {b!r}")

    def vec(account: str, category: str) -> FeatureVector:
        _require(category in account_vectors[account], f"{category} vector for {account!r}")
        return account_vectors[account][category]

    features: dict[str, float] = {}
    for token in method_id.split("+"):
        if token.endswith("_abs") and token != "all_abs":
            cats = (token[: -len("_abs")],)
        elif token == "all_abs":
            cats = _CATEGORIES
        elif token == "all_sim":
            for cat in _CATEGORIES:
                va, vb = vec(a, cat), vec(b, cat)
                if va.names != vb.names:
                    raise ValueError(f"schema mismatch for category {cat}")
                features[f"sim.{cat}"] = category_similarity(va.as_array(), vb.as_array(), metric)
            continue
        elif token == "edits":
            if precomputed_edits is not None and (a, b) in precomputed_edits:
                features["edit_distance"] = precomputed_edits[(a, b)]
            else:
                _require(texts is not None, "normalized post texts (edits)")
                features["edit_distance"] = edit_similarity(
                    texts.get(a, []), texts.get(b, []),
                    normalized=edit_normalized, sample_cap=edit_sample_cap, seed=edit_seed,
                )
            continue
        elif token == "sem":
            if semantic_centers is not None:
                _require(a in semantic_centers and b in semantic_centers, "semantic centers")
                ca, cb = semantic_centers[a], semantic_centers[b]
            else:
                _require(embeddings is not None, "embedding table (sem)")
                _require(texts is not None, "normalized post texts (sem)")
                ca = semantic_center(texts.get(a, []), embeddings)
                cb = semantic_center(texts.get(b, []), embeddings)
            features["semantic_similarity"] = semantic_similarity(ca, cb)
            continue
        else:
            raise ValueError(f"unknown method token {token!r} in {method_id!r}")
        for cat in cats:
            diffs = abs_diff(vec(a, cat), vec(b, cat))
            for name, d in zip(vec(a, cat).names, diffs.tolist()):
                features[f"{cat}_abs.{name}"] = d
    return PairInstance(pair=pair, method_id=method_id, features=features)


def write_pair_instances(instances: list[PairInstance], path,
                         header_comment: str | None = None) -> None:
    """CSV export: account ids, one column per feature, label last."""
    if not instances:
        raise ValueError("nothing to write")
    names = list(instances[0].features)
    method = instances[0].method_id
    for inst in instances:
        if list(inst.features) != names or inst.method_id != method:
            raise ValueError("instances must share one method and schema")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write(f"# method={method}\n")
        writer = csv.writer(fh)
        writer.writerow(["account_a", "account_b", *names, "label"])
        for inst in instances:
            writer.writerow(
                [inst.pair.account_a, inst.pair.account_b]
                + [repr(v) for v in inst.features.values()]
                + [inst.pair.label]
            )


def read_pair_instances(path) -> list[PairInstance]:
    method = None
    with open(path, encoding="utf-8", newline="") as fh:
        rows = []
        for line in fh:
            if line.startswith("# method="):
                method = line.strip().split("=", 1)[1]
            elif not line.startswith("#"):
                rows.append(line)
    if method is None:
        raise DataFormatError(f"{path}: missing '# method=' comment")
    reader = csv.reader(rows)
    header = next(reader, None)
    if not header or header[:2] != ["account_a", "account_b"] or header[-1] != "label":
        raise DataFormatError(f"{path}: unexpected pair-instance header")
    names = header[2:-1]
    out = []
    for row in reader:
        pair = LabeledPair(row[0], row[1], row[-1])
        values = {n: float(v) for n, v in zip(names, row[2:-1])}
        out.append(PairInstance(pair=pair, method_id=method, features=values))
    return out
