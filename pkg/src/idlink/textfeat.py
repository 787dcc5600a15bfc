"""Per-account activity and linguistic feature vectors.

Feature schemas are fixed per category so vectors from different accounts
always align:
  - activity: 3 keys (mean mentions, mean hashtags, mean inter-arrival time)
  - linguistic: 10 character ratios + 8 word stats + 3 sentence stats +
    6 dictionary ratios + one ratio per POS tag + one per-sentence frequency
    per dependency relation + 3 clause/passive stats + 3 tree stats

Ratios are over characters or words as documented per function; standard
deviations are population STDs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .corpus import (
    DEPRELS,
    PUNCT_CHARS,
    UPOS_TAGS,
    Post,
    SentenceAnnotation,
    is_hashtag_token,
    is_mention_token,
    is_url_token,
)
from .errors import DataFormatError

CATEGORY_ACTIVITY = "activity"
CATEGORY_LINGUISTIC = "linguistic"
CATEGORY_NETWORK = "network"

ACTIVITY_KEYS = ("avg_mentions", "avg_hashtags", "inter_arrival_time")

CHAR_KEYS = (
    "upper_ratio", "period_ratio", "comma_ratio", "paren_ratio",
    "exclaim_ratio", "colon_ratio", "digit_ratio", "semicolon_ratio",
    "hyphen_ratio", "quote_ratio",
)
WORD_KEYS = (
    "mean_word_chars", "vocab_richness", "acronym_ratio", "stopword_ratio",
    "first_person_ratio", "short_word_ratio", "word_len_std", "word_len_range",
)
SENTENCE_KEYS = ("sent_words_mean", "sent_words_std", "sent_words_range")
DICT_KEYS = (
    "discourse_ratio", "interjection_ratio", "abbreviation_ratio",
    "curse_ratio", "positive_ratio", "negative_ratio",
)
POS_KEYS = tuple(f"pos_{t.lower()}" for t in UPOS_TAGS)
DEP_KEYS = tuple(f"dep_{r}" for r in DEPRELS)
CLAUSE_KEYS = ("passive_ratio", "coord_per_sentence", "subord_per_sentence")
TREE_KEYS = ("tree_depth_mean", "tree_width_mean", "tree_ramification_mean")

LINGUISTIC_KEYS = (
    CHAR_KEYS + WORD_KEYS + SENTENCE_KEYS + DICT_KEYS
    + POS_KEYS + DEP_KEYS + CLAUSE_KEYS + TREE_KEYS
)

# relations counted as subordinate clauses; "conj" counts coordination
SUBORDINATE_DEPRELS = frozenset({"advcl", "ccomp", "xcomp", "acl", "csubj"})

_COUNTED_CHARS = {
    "period_ratio": frozenset("."),
    "comma_ratio": frozenset(",،"),
    "paren_ratio": frozenset("()"),
    "exclaim_ratio": frozenset("!"),
    "colon_ratio": frozenset(":"),
    "semicolon_ratio": frozenset(";؛"),
    "hyphen_ratio": frozenset("-–—"),
    "quote_ratio": frozenset("\"'“”‘’«»"),
}

_SENTENCE_SPLIT_RE = re.compile(r"[.!?؟۔]+")


@dataclass(frozen=True)
class FeatureVector:
    """Ordered, finite, fixed-schema named vector for one account."""

    category: str
    values: dict[str, float]

    def __post_init__(self):
        for name, v in self.values.items():
            if not np.isfinite(v):
                raise ValueError(f"non-finite value for feature {name!r}: {v}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(list(self.values.values()), dtype=float)

    def __len__(self) -> int:
        return len(self.values)


LEXICON_FILES = {
    "discourse_markers": "discourse_markers.txt",
    "interjections": "interjections.txt",
    "abbreviations": "abbreviations.txt",
    "curse_words": "curse_words.txt",
    "positive_words": "positive_words.txt",
    "negative_words": "negative_words.txt",
    "stopwords": "stopwords.txt",
    "first_person_pronouns": "first_person_pronouns.txt",
    "acronyms": "acronyms.txt",
}


@dataclass(frozen=True)
class LexiconSet:
    """Lowercased, deduplicated word lists used by dictionary features."""

    discourse_markers: frozenset[str]
    interjections: frozenset[str]
    abbreviations: frozenset[str]
    curse_words: frozenset[str]
    positive_words: frozenset[str]
    negative_words: frozenset[str]
    stopwords: frozenset[str]
    first_person_pronouns: frozenset[str]
    acronyms: frozenset[str]


def _read_wordlist(path: Path) -> frozenset[str]:
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if word and not word.startswith("#"):
                words.add(word.lower())
    return frozenset(words)


def load_lexicons(directory=None) -> LexiconSet:
    """Load the nine word lists from a directory (default: packaged English).

    Files are UTF-8, one entry per line, "#" comments ignored. A missing
    file is an error.
    """
    if directory is None:
        directory = resources.files("idlink").joinpath("lexicons", "en")
    directory = Path(str(directory))
    fields = {}
    for field_name, file_name in LEXICON_FILES.items():
        path = directory / file_name
        if not path.is_file():
            raise DataFormatError(f"missing lexicon file: {path}")
        fields[field_name] = _read_wordlist(path)
    return LexiconSet(**fields)


def activity_features(posts: list[Post]) -> FeatureVector:
    """Mean mentions/post, mean hashtags/post, mean inter-arrival seconds.

    Inter-arrival is over timestamp-sorted consecutive posts and 0 for a
    single post.
    """
    if not posts:
        raise ValueError("activity_features requires at least one post")
    n = len(posts)
    avg_mentions = sum(len(p.mentions) for p in posts) / n
    avg_hashtags = sum(len(p.hashtags) for p in posts) / n
    if n == 1:
        inter = 0.0
    else:
        ts = sorted(p.timestamp for p in posts)
        inter = float(np.mean(np.diff(ts)))
    return FeatureVector(
        CATEGORY_ACTIVITY,
        {"avg_mentions": avg_mentions, "avg_hashtags": avg_hashtags, "inter_arrival_time": inter},
    )


def char_features(texts: list[str]) -> dict[str, float]:
    """Ten character-class ratios over the concatenation of all texts."""
    joined = "".join(texts)
    total = len(joined)
    out = dict.fromkeys(CHAR_KEYS, 0.0)
    if total == 0:
        return out
    out["upper_ratio"] = sum(1 for c in joined if c.isupper()) / total
    out["digit_ratio"] = sum(1 for c in joined if c.isdigit()) / total
    for key, charset in _COUNTED_CHARS.items():
        out[key] = sum(1 for c in joined if c in charset) / total
    return out


def words_of(texts: list[str]) -> list[str]:
    """Tokens stripped of edge punctuation, minus mention/hashtag/URL tokens."""
    words = []
    for text in texts:
        for tok in text.split():
            if is_mention_token(tok) or is_hashtag_token(tok) or is_url_token(tok):
                continue
            word = tok.strip(PUNCT_CHARS)
            if word:
                words.append(word)
    return words


def _is_acronym(word: str, lexicons: LexiconSet) -> bool:
    if word.lower() in lexicons.acronyms:
        return True
    return 2 <= len(word) <= 5 and word.isalpha() and word == word.upper()


def word_features(texts: list[str], lexicons: LexiconSet) -> dict[str, float]:
    words = words_of(texts)
    out = dict.fromkeys(WORD_KEYS, 0.0)
    if not words:
        return out
    n = len(words)
    lengths = np.array([len(w) for w in words], dtype=float)
    lower = [w.lower() for w in words]
    out["mean_word_chars"] = float(lengths.mean())
    out["vocab_richness"] = len(set(lower)) / n
    out["acronym_ratio"] = sum(1 for w in words if _is_acronym(w, lexicons)) / n
    out["stopword_ratio"] = sum(1 for w in lower if w in lexicons.stopwords) / n
    out["first_person_ratio"] = sum(1 for w in lower if w in lexicons.first_person_pronouns) / n
    out["short_word_ratio"] = sum(1 for w in words if 2 <= len(w) <= 3) / n
    out["word_len_std"] = float(lengths.std())
    out["word_len_range"] = float(lengths.max() - lengths.min())
    return out


def split_sentences(text: str) -> list[str]:
    """Split on terminal punctuation (. ! ? ؟ ۔); every text yields >= 1 sentence."""
    parts = [s for s in _SENTENCE_SPLIT_RE.split(text) if s.strip()]
    return parts if parts else [text]


def sentence_features(texts: list[str]) -> dict[str, float]:
    out = dict.fromkeys(SENTENCE_KEYS, 0.0)
    if not texts:
        return out
    counts = np.array(
        [len(sent.split()) for text in texts for sent in split_sentences(text)],
        dtype=float,
    )
    out["sent_words_mean"] = float(counts.mean())
    out["sent_words_std"] = float(counts.std())
    out["sent_words_range"] = float(counts.max() - counts.min())
    return out


def dictionary_features(texts: list[str], lexicons: LexiconSet) -> dict[str, float]:
    """Six lexicon-membership ratios over the total word count."""
    words = [w.lower() for w in words_of(texts)]
    out = dict.fromkeys(DICT_KEYS, 0.0)
    if not words:
        return out
    n = len(words)
    pools = (
        ("discourse_ratio", lexicons.discourse_markers),
        ("interjection_ratio", lexicons.interjections),
        ("abbreviation_ratio", lexicons.abbreviations),
        ("curse_ratio", lexicons.curse_words),
        ("positive_ratio", lexicons.positive_words),
        ("negative_ratio", lexicons.negative_words),
    )
    for key, pool in pools:
        out[key] = sum(1 for w in words if w in pool) / n
    return out


def pos_features(annotations: list[SentenceAnnotation]) -> dict[str, float]:
    """Relative frequency of each POS tag over all annotated tokens."""
    if not annotations:
        raise ValueError("no annotations: run attach_annotations before pos_features")
    counts = dict.fromkeys(UPOS_TAGS, 0)
    total = 0
    for sent in annotations:
        for tok in sent.tokens:
            counts[tok.upos] += 1
            total += 1
    return {f"pos_{t.lower()}": counts[t] / total for t in UPOS_TAGS}


def dep_features(annotations: list[SentenceAnnotation]) -> dict[str, float]:
    """Per-sentence relation frequencies plus passive/clause statistics.

    Relation frequency is the mean count per sentence; passive ratio is the
    fraction of sentences containing a passive subject; coordinate and
    subordinate clause counts are per-sentence means.
    """
    if not annotations:
        raise ValueError("no annotations: run attach_annotations before dep_features")
    n_sents = len(annotations)
    rel_counts = dict.fromkeys(DEPRELS, 0)
    passive_sents = 0
    coord = 0
    subord = 0
    for sent in annotations:
        has_passive = False
        for tok in sent.tokens:
            rel_counts[tok.base_deprel] += 1
            if tok.is_passive_subject:
                has_passive = True
            if tok.base_deprel == "conj":
                coord += 1
            elif tok.base_deprel in SUBORDINATE_DEPRELS:
                subord += 1
        passive_sents += has_passive
    out = {f"dep_{r}": rel_counts[r] / n_sents for r in DEPRELS}
    out["passive_ratio"] = passive_sents / n_sents
    out["coord_per_sentence"] = coord / n_sents
    out["subord_per_sentence"] = subord / n_sents
    return out


def tree_metrics(tree: SentenceAnnotation) -> tuple[int, int, float]:
    """(depth, width, ramification) of one dependency tree.

    Depth counts nodes on the longest root-to-leaf path inclusive; width is
    the maximum node count at any depth level; ramification is
    (n_nodes - 1) / (depth - 1) for depth > 1, else 0.
    """
    n = len(tree.tokens)
    levels = [0] * (n + 1)  # 1-based node -> depth level (root = 1)
    for tok in tree.tokens:
        # follow heads to the root; annotations are validated acyclic
        depth = 1
        cur = tok.head
        while cur != 0:
            depth += 1
            cur = tree.tokens[cur - 1].head
        levels[tok.index] = depth
    depth = max(levels[1:])
    width = max(sum(1 for lv in levels[1:] if lv == d) for d in range(1, depth + 1))
    ramification = (n - 1) / (depth - 1) if depth > 1 else 0.0
    return depth, width, ramification


def linguistic_features(
    posts: list[Post],
    annotations: list[SentenceAnnotation] | None,
    lexicons: LexiconSet,
) -> FeatureVector:
    """Full linguistic vector for one account.

    Syntactic blocks (POS, dependency, tree) are zero-filled when the
    account has no annotations; callers that care should record the gap in
    their run metadata.
    """
    texts = [p.raw_text for p in posts]
    values: dict[str, float] = {}
    values.update(char_features(texts))
    values.update(word_features(texts, lexicons))
    values.update(sentence_features(texts))
    values.update(dictionary_features(texts, lexicons))
    if annotations:
        values.update(pos_features(annotations))
        values.update(dep_features(annotations))
        metrics = np.array([tree_metrics(s) for s in annotations], dtype=float)
        values["tree_depth_mean"] = float(metrics[:, 0].mean())
        values["tree_width_mean"] = float(metrics[:, 1].mean())
        values["tree_ramification_mean"] = float(metrics[:, 2].mean())
    else:
        for key in POS_KEYS + DEP_KEYS + CLAUSE_KEYS + TREE_KEYS:
            values[key] = 0.0
    ordered = {key: values[key] for key in LINGUISTIC_KEYS}
    return FeatureVector(CATEGORY_LINGUISTIC, ordered)


def account_annotations(posts: list[Post]) -> list[SentenceAnnotation]:
    """All sentence annotations attached to an account's posts, in post order."""
    out: list[SentenceAnnotation] = []
    for p in posts:
        if p.annotation:
            out.extend(p.annotation)
    return out
