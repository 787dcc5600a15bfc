"""Pipeline stages over a run directory.

Every artifact carries a comment stamp with the hash of the config that
produced it; downstream stages refuse mismatched hashes unless forced. One
seed tuple in the config determines every random choice, so identical
configs yield byte-identical artifacts.
"""

from __future__ import annotations

import csv
import json
import multiprocessing
import shutil
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from .config import RunConfig
from .errors import DataFormatError
from .evalharness import (
    read_report_csv, repeated_cv, report_rows, summarize, write_report_csv,
    write_summary_csv,
)
from .groundtruth import build_ground_truth, read_pairs, write_pairs
from .learners import (
    Dataset, ForestParams, save_model, train_decision_tree, train_naive_bayes,
    train_random_forest,
)
from .netgraph import build_graph, graph_metrics, write_edge_list, NETWORK_KEYS
from .pairmodel import (
    EmbeddingTable, PairInstance, apply_minmax, assemble_pair, fit_minmax,
    load_embeddings, random_embedding_table, read_pair_instances,
    semantic_center, write_embeddings, write_pair_instances,
)
from .statsel import (
    info_gain_rank, ks_filter, write_ecdf_csv, write_ig_report, write_ks_report,
)
from .synth import generate_synthetic_corpus
from .textfeat import (
    CATEGORY_ACTIVITY, CATEGORY_LINGUISTIC, CATEGORY_NETWORK, FeatureVector,
    account_annotations, activity_features, linguistic_features, load_lexicons,
)

CATEGORIES = (CATEGORY_ACTIVITY, CATEGORY_LINGUISTIC, CATEGORY_NETWORK)

# artifact -> the command that produces it
_PREREQUISITE = {
    "corpus.jsonl": "ingest (or synth)",
    "split_corpus.jsonl": "groundtruth",
    "pairs.csv": "groundtruth",
    "features_activity.csv": "extract",
    "features_linguistic.csv": "extract",
    "features_network.csv": "extract",
    "graph_edges.csv": "extract",
    "report.csv": "evaluate",
}


def _out(cfg: RunConfig) -> Path:
    path = Path(cfg.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _stamp(cfg: RunConfig, stage: str, kind: str) -> str:
    return f"config={cfg.config_hash()} stage={stage} format=idlink.{kind}.v1"


def _read_stamp(path: Path) -> dict[str, str]:
    fields: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            for part in line[1:].split():
                if "=" in part:
                    key, value = part.split("=", 1)
                    fields.setdefault(key, value)
    return fields


def _require_artifact(cfg: RunConfig, name: str, force: bool = False) -> Path:
    path = _out(cfg) / name
    if not path.exists():
        producer = _PREREQUISITE.get(name, "pair")
        raise DataFormatError(
            f"missing artifact {name} in {cfg.out_dir}; run `idlink {producer}` first"
        )
    stamp = _read_stamp(path)
    found = stamp.get("config")
    if found != cfg.config_hash() and not force:
        raise DataFormatError(
            f"{path} was produced by config {found}, current config is "
            f"{cfg.config_hash()}; rerun the producing stage or pass --force"
        )
    return path


def run_ingest(cfg: RunConfig) -> Path:
    """Read the configured corpus (and annotation sidecar) into the run dir."""
    if not cfg.corpus_path:
        raise DataFormatError("config has no corpus.path; set it or use `idlink synth`")
    corp = corpus_mod.ingest_posts(cfg.corpus_path, language=cfg.language)
    if cfg.annotations_path:
        corp = corpus_mod.attach_annotations(corp, cfg.annotations_path)
        shutil.copyfile(cfg.annotations_path, _out(cfg) / "annotations.conllu")
    dest = _out(cfg) / "corpus.jsonl"
    corpus_mod.write_posts(corp, dest, header_comment=_stamp(cfg, "ingest", "posts"))
    return dest


def run_synth(cfg: RunConfig) -> Path:
    corp = generate_synthetic_corpus(
        cfg.synth.n_users,
        (cfg.synth.posts_lo, cfg.synth.posts_hi),
        style_seed=cfg.synth.style_seed,
        seed=cfg.synth.seed,
        language=cfg.language,
    )
    dest = _out(cfg) / "corpus.jsonl"
    corpus_mod.write_posts(corp, dest, header_comment=_stamp(cfg, "synth", "posts"))
    return dest


def _attach_known_annotations(corp, path):
    """Attach only annotations whose post_id exists (split corpora keep a
    subset of the original posts)."""
    known = {p.post_id for p in corp.all_posts()}
    by_post: dict[str, list] = {}
    for post_id, rows, _ in corpus_mod._parse_conllu_sentences(path):
        if post_id in known:
            by_post.setdefault(post_id, []).append(
                corpus_mod.SentenceAnnotation(tokens=tuple(rows))
            )
    groups = {
        author: tuple(
            replace(p, annotation=tuple(by_post[p.post_id])) if p.post_id in by_post else p
            for p in posts
        )
        for author, posts in corp.posts_by_author.items()
    }
    return corpus_mod.Corpus(groups, language=corp.language, provenance=corp.provenance)


def _load_corpus(cfg: RunConfig, name: str, force: bool = False):
    path = _require_artifact(cfg, name, force)
    corp = corpus_mod.ingest_posts(path, language=cfg.language)
    sidecar = _out(cfg) / "annotations.conllu"
    if sidecar.exists():
        corp = _attach_known_annotations(corp, sidecar)
    return corp


def run_groundtruth(cfg: RunConfig, force: bool = False) -> tuple[Path, Path]:
    corp = _load_corpus(cfg, "corpus.jsonl", force)
    split, pairs = build_ground_truth(corp, cfg.split_plan(), min_posts=cfg.min_posts)
    split_path = _out(cfg) / "split_corpus.jsonl"
    corpus_mod.write_posts(split, split_path, header_comment=_stamp(cfg, "groundtruth", "posts"))
    pairs_path = _out(cfg) / "pairs.csv"
    write_pairs(pairs, pairs_path, header_comment=_stamp(cfg, "groundtruth", "pairs"))
    return split_path, pairs_path


def _write_feature_csv(cfg: RunConfig, category: str,
                       vectors: dict[str, FeatureVector], path: Path) -> None:
    names = next(iter(vectors.values())).names
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {_stamp(cfg, 'extract', 'features')} category={category}\n")
        writer = csv.writer(fh)
        writer.writerow(["account_id", *names])
        for account in sorted(vectors):
            writer.writerow([account] + [repr(v) for v in vectors[account].values.values()])


def _read_feature_csv(path: Path, category: str) -> dict[str, FeatureVector]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in fh if not r.startswith("#")]
    reader = csv.reader(rows)
    header = next(reader)
    names = header[1:]
    out = {}
    for row in reader:
        out[row[0]] = FeatureVector(category, dict(zip(names, map(float, row[1:]))))
    return out


def run_extract(cfg: RunConfig, force: bool = False) -> dict[str, Path]:
    """Per-account activity/linguistic/network vectors plus the graph."""
    split = _load_corpus(cfg, "split_corpus.jsonl", force)
    _require_artifact(cfg, "pairs.csv", force)
    lexicons = load_lexicons(cfg.lexicon_dir)
    accounts = sorted(split.posts_by_author)

    flags: dict[str, list[str]] = {"accounts_without_annotations": []}
    activity: dict[str, FeatureVector] = {}
    linguistic: dict[str, FeatureVector] = {}
    for account in accounts:
        posts = list(split.posts_of(account))
        activity[account] = activity_features(posts)
        annotations = account_annotations(posts)
        if not annotations:
            flags["accounts_without_annotations"].append(account)
        linguistic[account] = linguistic_features(posts, annotations, lexicons)

    graph = build_graph(split, accounts)
    metrics = graph_metrics(graph)
    network = {
        account: FeatureVector(
            CATEGORY_NETWORK, {key: metrics[key][account] for key in NETWORK_KEYS}
        )
        for account in accounts
    }

    out = _out(cfg)
    paths = {}
    for category, vectors in (
        (CATEGORY_ACTIVITY, activity),
        (CATEGORY_LINGUISTIC, linguistic),
        (CATEGORY_NETWORK, network),
    ):
        path = out / f"features_{category}.csv"
        _write_feature_csv(cfg, category, vectors, path)
        paths[category] = path
    write_edge_list(graph, out / "graph_edges.csv", header_comment=_stamp(cfg, "extract", "edges"))
    with open(out / "extract_flags.json", "w", encoding="utf-8") as fh:
        json.dump({"config": cfg.config_hash(), **flags}, fh, sort_keys=True, indent=2)
    return paths


def _apply_exclusions(cfg: RunConfig, vectors: dict[str, FeatureVector],
                      category: str) -> dict[str, FeatureVector]:
    """Drop per-run excluded features, given as 'category.name' entries."""
    drop = {
        spec.split(".", 1)[1]
        for spec in cfg.exclude_features
        if spec.startswith(category + ".")
    }
    unknown = [
        spec for spec in cfg.exclude_features
        if spec.startswith(category + ".")
        and spec.split(".", 1)[1] not in next(iter(vectors.values())).names
    ]
    if unknown:
        raise DataFormatError(f"excluded feature(s) not in the {category} schema: {unknown}")
    if not drop:
        return vectors
    return {
        account: FeatureVector(
            category, {n: v for n, v in vec.values.items() if n not in drop}
        )
        for account, vec in vectors.items()
    }


_EDIT_CTX: dict = {}


def _edit_worker(pair_key: tuple[str, str]) -> float:
    from .pairmodel import edit_similarity

    texts = _EDIT_CTX["texts"]
    return edit_similarity(
        texts.get(pair_key[0], []), texts.get(pair_key[1], []),
        normalized=_EDIT_CTX["normalized"], sample_cap=_EDIT_CTX["cap"],
        seed=_EDIT_CTX["seed"],
    )


def _init_edit_worker(ctx: dict) -> None:
    _EDIT_CTX.update(ctx)


def _edit_distance_map(cfg: RunConfig, pairs, texts) -> dict[tuple[str, str], float]:
    keys = [(p.account_a, p.account_b) for p in pairs]
    ctx = {
        "texts": texts,
        "normalized": cfg.edit_normalized,
        "cap": cfg.edit_sample_cap,
        "seed": cfg.plan_seed,
    }
    if cfg.jobs > 1:
        with multiprocessing.get_context("fork").Pool(
            cfg.jobs, initializer=_init_edit_worker, initargs=(ctx,)
        ) as pool:
            values = pool.map(_edit_worker, keys, chunksize=32)
    else:
        _init_edit_worker(ctx)
        values = [_edit_worker(key) for key in keys]
    return dict(zip(keys, values))


def run_pair(cfg: RunConfig, force: bool = False) -> dict[str, Path]:
    """Assemble PairInstance datasets for every configured method."""
    split = _load_corpus(cfg, "split_corpus.jsonl", force)
    pairs = read_pairs(_require_artifact(cfg, "pairs.csv", force))
    raw: dict[str, dict[str, FeatureVector]] = {}
    for category in CATEGORIES:
        path = _require_artifact(cfg, f"features_{category}.csv", force)
        raw[category] = _apply_exclusions(cfg, _read_feature_csv(path, category), category)

    accounts = sorted(split.posts_by_author)
    scalers = {cat: fit_minmax([raw[cat][a] for a in accounts]) for cat in CATEGORIES}
    account_vectors = {
        a: {cat: apply_minmax(scalers[cat], raw[cat][a]) for cat in CATEGORIES}
        for a in accounts
    }

    texts = {
        a: [t for t in (corpus_mod.normalize_for_similarity(p) for p in split.posts_of(a)) if t]
        for a in accounts
    }
    flags = {
        "accounts_empty_normalized": sorted(a for a in accounts if not texts[a]),
    }

    needs_text = any("edits" in m or "sem" in m for m in cfg.methods)
    centers = None
    emb = None
    if needs_text:
        if cfg.embeddings_path:
            emb = load_embeddings(cfg.embeddings_path)
        else:
            vocab = {tok for a in accounts for t in texts[a] for tok in t.split()}
            emb = random_embedding_table(vocab, dim=cfg.embedding_dim, seed=cfg.embedding_seed)
            write_embeddings(emb, _out(cfg) / "embeddings.txt")
        centers = {a: semantic_center(texts[a], emb) for a in accounts}
        flags["accounts_zero_semantic_center"] = sorted(
            a for a in accounts if not np.any(centers[a])
        )

    edit_map: dict[tuple[str, str], float] | None = None
    if any("edits" in m for m in cfg.methods):
        edit_map = _edit_distance_map(cfg, pairs, texts)

    out = _out(cfg)
    paths = {}
    for method in cfg.methods:
        instances = [
            assemble_pair(
                pair, method, account_vectors,
                texts=texts, embeddings=emb, semantic_centers=centers,
                precomputed_edits=edit_map,
                metric=cfg.similarity_metric,
                edit_normalized=cfg.edit_normalized,
                edit_sample_cap=cfg.edit_sample_cap,
                edit_seed=cfg.plan_seed,
            )
            for pair in pairs
        ]
        path = out / f"pairs_{method}.csv"
        write_pair_instances(instances, path, header_comment=_stamp(cfg, "pair", "pairset"))
        paths[method] = path
    with open(out / "pair_flags.json", "w", encoding="utf-8") as fh:
        json.dump({"config": cfg.config_hash(), **flags}, fh, sort_keys=True, indent=2)
    return paths


def _load_pairset(cfg: RunConfig, method: str, force: bool = False) -> list[PairInstance]:
    return read_pair_instances(_require_artifact(cfg, f"pairs_{method}.csv", force))


def run_analyze(cfg: RunConfig, force: bool = False) -> dict[str, Path]:
    """KS filter, information-gain ranking, and ECDF export for one method."""
    method = cfg.analyze_method or cfg.methods[0]
    instances = _load_pairset(cfg, method, force)
    out = _out(cfg)
    report = ks_filter(instances, alpha=cfg.ks_alpha)
    write_ks_report(report, out / "ks_report.csv", header_comment=_stamp(cfg, "analyze", "ks"))
    ranked = info_gain_rank(instances, bins=cfg.ig_bins)
    write_ig_report(ranked, out / "ig_report.csv", header_comment=_stamp(cfg, "analyze", "ig"))
    write_ecdf_csv(instances, out / "ecdf.csv", header_comment=_stamp(cfg, "analyze", "ecdf"))
    return {
        "ks": out / "ks_report.csv",
        "ig": out / "ig_report.csv",
        "ecdf": out / "ecdf.csv",
    }


def make_trainer(cfg: RunConfig, name: str):
    if name == "naive_bayes":
        return train_naive_bayes
    if name == "decision_tree":
        return lambda ds: train_decision_tree(ds, min_leaf=cfg.tree_min_leaf)
    if name == "random_forest":
        params = ForestParams(n_trees=cfg.forest_trees, seed=cfg.forest_seed)
        return lambda ds: train_random_forest(ds, params)
    raise DataFormatError(f"unknown classifier {name!r}")


def run_train(cfg: RunConfig, force: bool = False) -> list[Path]:
    """Fit every configured classifier on every method's full dataset."""
    out = _out(cfg) / "models"
    out.mkdir(exist_ok=True)
    written = []
    for method in cfg.methods:
        dataset = Dataset.from_instances(_load_pairset(cfg, method, force))
        for name in cfg.classifiers:
            model = make_trainer(cfg, name)(dataset)
            path = out / f"{method}__{name}.json"
            save_model(model, path)
            written.append(path)
    return written


def run_evaluate(cfg: RunConfig, force: bool = False) -> Path:
    """Repeated stratified CV over the methods x classifiers grid."""
    rows = []
    for method in cfg.methods:
        dataset = Dataset.from_instances(_load_pairset(cfg, method, force))
        for name in cfg.classifiers:
            report = repeated_cv(
                dataset, make_trainer(cfg, name),
                repeats=cfg.cv_repeats, k=cfg.cv_folds, seed=cfg.cv_seed,
                classifier_name=name, mode=cfg.cv_mode,
            )
            rows.extend(report_rows(method, report))
    path = _out(cfg) / "report.csv"
    write_report_csv(rows, path, header_comment=_stamp(cfg, "evaluate", "report"))
    return path


def run_report(cfg: RunConfig, force: bool = False) -> str:
    rows = read_report_csv(_require_artifact(cfg, "report.csv", force))
    table, cells = summarize(rows)
    write_summary_csv(cells, _out(cfg) / "summary.csv",
                      header_comment=_stamp(cfg, "report", "summary"))
    return table
