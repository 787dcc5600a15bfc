"""Run configuration: one TOML file describes one experiment.

Paths can be overridden via environment variables (IDLINK_CORPUS_PATH,
IDLINK_ANNOTATIONS_PATH, IDLINK_LEXICON_DIR, IDLINK_EMBEDDINGS_PATH,
IDLINK_OUT_DIR). The config hash stamped into artifacts covers the
experiment-defining fields only, not output locations or parallelism.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, replace

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import DataFormatError
from .groundtruth import SPLIT_MODES, SplitPlan
from .pairmodel import METHOD_IDS, SIMILARITY_METRICS

CLASSIFIER_NAMES = ("naive_bayes", "decision_tree", "random_forest")

ENV_OVERRIDES = {
    "IDLINK_CORPUS_PATH": ("corpus_path",),
    "IDLINK_ANNOTATIONS_PATH": ("annotations_path",),
    "IDLINK_LEXICON_DIR": ("lexicon_dir",),
    "IDLINK_EMBEDDINGS_PATH": ("embeddings_path",),
    "IDLINK_OUT_DIR": ("out_dir",),
}


@dataclass(frozen=True)
class SynthSpec:
    n_users: int = 20
    posts_lo: int = 12
    posts_hi: int = 30
    style_seed: int = 7
    seed: int = 11


@dataclass(frozen=True)
class RunConfig:
    language: str = "en"
    out_dir: str = "runs/out"
    corpus_path: str | None = None
    annotations_path: str | None = None
    synth: SynthSpec = field(default_factory=SynthSpec)
    min_posts: int = 10
    plan_x: int = 10
    plan_mode: str = "random"
    plan_linked_ratio: float = 0.10
    plan_k: int = 1
    plan_seed: int = 97
    lexicon_dir: str | None = None
    exclude_features: tuple[str, ...] = ()
    embeddings_path: str | None = None
    embedding_dim: int = 50
    embedding_seed: int = 3
    methods: tuple[str, ...] = ("activity_abs", "all_abs+edits+sem")
    similarity_metric: str = "cosine"
    edit_normalized: bool = True
    edit_sample_cap: int = 0
    classifiers: tuple[str, ...] = ("random_forest",)
    forest_trees: int = 100
    forest_seed: int = 13
    tree_min_leaf: int = 2
    cv_repeats: int = 5
    cv_folds: int = 10
    cv_seed: int = 23
    cv_mode: str = "per_fold"
    analyze_method: str | None = None
    ks_alpha: float = 0.01
    ig_bins: int = 10
    jobs: int = 1

    def __post_init__(self):
        if self.plan_mode not in SPLIT_MODES:
            raise DataFormatError(f"unknown split mode {self.plan_mode!r}")
        for m in self.methods:
            if m not in METHOD_IDS:
                raise DataFormatError(f"unknown method_id {m!r}; valid: {', '.join(METHOD_IDS)}")
        for c in self.classifiers:
            if c not in CLASSIFIER_NAMES:
                raise DataFormatError(f"unknown classifier {c!r}; valid: {', '.join(CLASSIFIER_NAMES)}")
        if self.similarity_metric not in SIMILARITY_METRICS:
            raise DataFormatError(f"unknown similarity metric {self.similarity_metric!r}")
        if self.cv_mode not in ("per_fold", "pooled"):
            raise DataFormatError(f"unknown cv mode {self.cv_mode!r}")
        if self.analyze_method is not None and self.analyze_method not in self.methods:
            raise DataFormatError(f"analyze method {self.analyze_method!r} is not in pair methods")

    def split_plan(self) -> SplitPlan:
        return SplitPlan(
            x=self.plan_x, mode=self.plan_mode, linked_ratio=self.plan_linked_ratio,
            k=self.plan_k, seed=self.plan_seed,
        )

    def config_hash(self) -> str:
        payload = asdict(self)
        for volatile in ("out_dir", "jobs"):
            payload.pop(volatile)
        blob = json.dumps(payload, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:12]


def _section(data: dict, name: str) -> dict:
    sec = data.get(name, {})
    if not isinstance(sec, dict):
        raise DataFormatError(f"config section [{name}] must be a table")
    return sec


def load_config(path) -> RunConfig:
    """Parse a TOML run configuration and apply environment overrides."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise DataFormatError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise DataFormatError(f"{path}: invalid TOML: {exc}")

    corpus = _section(data, "corpus")
    synth = _section(data, "synth")
    split = _section(data, "split")
    features = _section(data, "features")
    embeddings = _section(data, "embeddings")
    pair = _section(data, "pair")
    classifiers = _section(data, "classifiers")
    evaluation = _section(data, "eval")
    analyze = _section(data, "analyze")

    posts = synth.get("posts", [12, 30])
    if isinstance(posts, int):
        posts = [posts, posts]

    cfg = RunConfig(
        language=data.get("language", "en"),
        out_dir=data.get("out_dir", "runs/out"),
        corpus_path=corpus.get("path") or None,
        annotations_path=corpus.get("annotations") or None,
        synth=SynthSpec(
            n_users=synth.get("n_users", 20),
            posts_lo=int(posts[0]),
            posts_hi=int(posts[1]),
            style_seed=synth.get("style_seed", 7),
            seed=synth.get("seed", 11),
        ),
        min_posts=split.get("min_posts", 10),
        plan_x=split.get("x", 10),
        plan_mode=split.get("mode", "random"),
        plan_linked_ratio=split.get("linked_ratio", 0.10),
        plan_k=split.get("k", 1),
        plan_seed=split.get("seed", 97),
        lexicon_dir=features.get("lexicon_dir") or None,
        exclude_features=tuple(features.get("exclude", [])),
        embeddings_path=embeddings.get("path") or None,
        embedding_dim=embeddings.get("dim", 50),
        embedding_seed=embeddings.get("seed", 3),
        methods=tuple(pair.get("methods", ["activity_abs", "all_abs+edits+sem"])),
        similarity_metric=pair.get("metric", "cosine"),
        edit_normalized=pair.get("edit_normalized", True),
        edit_sample_cap=pair.get("edit_sample_cap", 0),
        classifiers=tuple(classifiers.get("names", ["random_forest"])),
        forest_trees=classifiers.get("forest_trees", 100),
        forest_seed=classifiers.get("forest_seed", 13),
        tree_min_leaf=classifiers.get("tree_min_leaf", 2),
        cv_repeats=evaluation.get("repeats", 5),
        cv_folds=evaluation.get("folds", 10),
        cv_seed=evaluation.get("seed", 23),
        cv_mode=evaluation.get("mode", "per_fold"),
        analyze_method=analyze.get("method") or None,
        ks_alpha=analyze.get("alpha", 0.01),
        ig_bins=analyze.get("bins", 10),
    )
    return apply_env_overrides(cfg)


def apply_env_overrides(cfg: RunConfig) -> RunConfig:
    updates = {}
    for var, (attr,) in ENV_OVERRIDES.items():
        value = os.environ.get(var)
        if value:
            updates[attr] = value
    return replace(cfg, **updates) if updates else cfg


def apply_cli_overrides(cfg: RunConfig, out: str | None = None,
                        seed: int | None = None, jobs: int | None = None) -> RunConfig:
    """--out/--jobs relocate or parallelize; --seed rebases every stage seed."""
    updates: dict = {}
    if out is not None:
        updates["out_dir"] = out
    if jobs is not None:
        updates["jobs"] = jobs
    if seed is not None:
        updates["synth"] = replace(cfg.synth, style_seed=seed, seed=seed + 1)
        updates["plan_seed"] = seed + 2
        updates["embedding_seed"] = seed + 3
        updates["forest_seed"] = seed + 4
        updates["cv_seed"] = seed + 5
    return replace(cfg, **updates) if updates else cfg
