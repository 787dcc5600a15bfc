"""Post corpora: ingestion, tokenization, normalization, annotation attachment.

A corpus groups immutable posts by author. Interchange formats:
  - posts: JSON lines, one object per line with keys
    post_id, author_id, timestamp, text, reply_to, retweet_of
    (mentions/hashtags are derived from the text, never stored);
    lines starting with "#" are skipped.
  - syntactic annotations: CoNLL-U-like sidecar, blank-line-separated
    sentences, each preceded by a "# post_id = <id>" comment, with
    tab-separated columns index/form/upos/head/deprel.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass, replace

from .errors import DataFormatError

# 17-tag universal POS inventory.
UPOS_TAGS = (
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
)

# Universal dependency relation inventory (37 base relations). Inputs may
# carry subtyped labels such as "nsubj:pass"; the base must be in this set.
DEPRELS = (
    "acl", "advcl", "advmod", "amod", "appos", "aux", "case", "cc", "ccomp",
    "clf", "compound", "conj", "cop", "csubj", "dep", "det", "discourse",
    "dislocated", "expl", "fixed", "flat", "goeswith", "iobj", "list",
    "mark", "nmod", "nsubj", "nummod", "obj", "obl", "orphan", "parataxis",
    "punct", "reparandum", "root", "vocative", "xcomp",
)
_DEPREL_SET = frozenset(DEPRELS)
_UPOS_SET = frozenset(UPOS_TAGS)

# Punctuation stripped from token edges when deciding what counts as a word,
# and from the tails of @/# tokens when extracting mention/hashtag bodies.
PUNCT_CHARS = string.punctuation + "“”‘’«»…–—،؟۔؛"

_URL_RE = re.compile(r"^(?:[a-zA-Z][a-zA-Z0-9+.-]*://|www\.)")
_DIGIT_RUN_RE = re.compile(r"\d+")


def tokenize(raw_text: str) -> list[str]:
    """Split on Unicode whitespace; punctuation stays attached to tokens.

    "@bob" / "#tag" runs survive as single tokens, repeated whitespace
    collapses, and tokenize(" ".join(tokens)) == tokens.
    """
    return raw_text.split()


def is_url_token(token: str) -> bool:
    return bool(_URL_RE.match(token.lower()))


def _tag_body(token: str) -> str:
    # "@bob," -> "bob"; a bare "@" (or "@!!") yields "" and is not a tag
    return token[1:].rstrip(PUNCT_CHARS)


def is_mention_token(token: str) -> bool:
    return token.startswith("@") and bool(_tag_body(token))


def is_hashtag_token(token: str) -> bool:
    return token.startswith("#") and bool(_tag_body(token))


def mentions_in(tokens: list[str]) -> list[str]:
    return [_tag_body(t) for t in tokens if is_mention_token(t)]


def hashtags_in(tokens: list[str]) -> list[str]:
    return [_tag_body(t) for t in tokens if is_hashtag_token(t)]


@dataclass(frozen=True)
class AnnotationToken:
    index: int  # 1-based within the sentence
    form: str
    upos: str
    head: int  # 0 = root
    deprel: str

    @property
    def base_deprel(self) -> str:
        return self.deprel.split(":", 1)[0]

    @property
    def is_passive_subject(self) -> bool:
        parts = self.deprel.split(":")
        return parts[0] in ("nsubj", "csubj") and "pass" in parts[1:]


@dataclass(frozen=True)
class SentenceAnnotation:
    """One validated dependency tree: exactly one root, acyclic heads."""

    tokens: tuple[AnnotationToken, ...]

    def __post_init__(self):
        n = len(self.tokens)
        if n == 0:
            raise DataFormatError("empty sentence annotation")
        roots = 0
        for i, tok in enumerate(self.tokens, start=1):
            if tok.index != i:
                raise DataFormatError(f"token indices must be 1..n, got {tok.index} at position {i}")
            if not 0 <= tok.head <= n:
                raise DataFormatError(f"head {tok.head} out of range for sentence of length {n}")
            if tok.head == tok.index:
                raise DataFormatError(f"token {tok.index} is its own head")
            if tok.upos not in _UPOS_SET:
                raise DataFormatError(f"unknown POS tag {tok.upos!r}")
            if tok.base_deprel not in _DEPREL_SET:
                raise DataFormatError(f"unknown dependency relation {tok.deprel!r}")
            if tok.head == 0:
                roots += 1
        if roots != 1:
            raise DataFormatError(f"sentence must have exactly one root, found {roots}")
        # walk every head chain; a chain longer than n means a cycle
        for tok in self.tokens:
            seen = 0
            cur = tok.head
            while cur != 0:
                cur = self.tokens[cur - 1].head
                seen += 1
                if seen > n:
                    raise DataFormatError("cyclic head structure in sentence annotation")


@dataclass(frozen=True)
class Post:
    """One social-media message with derived token/mention/hashtag views."""

    post_id: str
    author_id: str
    timestamp: int  # UTC seconds
    raw_text: str
    tokens: tuple[str, ...]
    mentions: tuple[str, ...]
    hashtags: tuple[str, ...]
    is_retweet: bool
    retweet_of: str | None = None
    reply_to: str | None = None
    annotation: tuple[SentenceAnnotation, ...] | None = None


def make_post(
    post_id: str,
    author_id: str,
    timestamp: int,
    text: str,
    reply_to: str | None = None,
    retweet_of: str | None = None,
) -> Post:
    """Build a Post, deriving tokens, mentions, and hashtags from the text."""
    if timestamp < 0:
        raise DataFormatError(f"post {post_id}: negative timestamp {timestamp}")
    toks = tokenize(text)
    return Post(
        post_id=str(post_id),
        author_id=str(author_id),
        timestamp=int(timestamp),
        raw_text=text,
        tokens=tuple(toks),
        mentions=tuple(mentions_in(toks)),
        hashtags=tuple(hashtags_in(toks)),
        is_retweet=retweet_of is not None,
        retweet_of=retweet_of,
        reply_to=reply_to,
    )


@dataclass(frozen=True)
class Corpus:
    """Immutable store of posts grouped by author."""

    posts_by_author: dict[str, tuple[Post, ...]]
    language: str = "en"
    provenance: str = ""

    @classmethod
    def from_posts(cls, posts, language: str = "en", provenance: str = "") -> "Corpus":
        """Group and stably order posts by (author_id, timestamp, post_id)."""
        seen: set[str] = set()
        for p in posts:
            if p.post_id in seen:
                raise DataFormatError(f"duplicate post_id {p.post_id!r}")
            seen.add(p.post_id)
        ordered = sorted(posts, key=lambda p: (p.author_id, p.timestamp, p.post_id))
        grouped: dict[str, list[Post]] = {}
        for p in ordered:
            grouped.setdefault(p.author_id, []).append(p)
        frozen = {a: tuple(ps) for a, ps in grouped.items()}
        return cls(posts_by_author=frozen, language=language, provenance=provenance)

    def authors(self) -> list[str]:
        return list(self.posts_by_author)

    def posts_of(self, author_id: str) -> tuple[Post, ...]:
        return self.posts_by_author[author_id]

    def all_posts(self) -> list[Post]:
        return [p for ps in self.posts_by_author.values() for p in ps]

    @property
    def n_authors(self) -> int:
        return len(self.posts_by_author)

    @property
    def n_posts(self) -> int:
        return sum(len(ps) for ps in self.posts_by_author.values())

    def __eq__(self, other):
        if not isinstance(other, Corpus):
            return NotImplemented
        return (
            self.language == other.language
            and self.posts_by_author == other.posts_by_author
        )


_REQUIRED_FIELDS = ("post_id", "author_id", "timestamp", "text")


def ingest_posts(path, format: str = "jsonl", language: str = "en") -> Corpus:
    """Read a JSONL post file into a Corpus.

    Errors name the offending 1-based line number; duplicate post_ids are
    rejected. Blank lines and "#" comment lines are skipped.
    """
    if format != "jsonl":
        raise ValueError(f"unsupported corpus format {format!r}")
    posts = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(rec, dict):
                raise DataFormatError(f"{path}: line {lineno}: expected an object")
            for key in _REQUIRED_FIELDS:
                if key not in rec:
                    raise DataFormatError(f"{path}: line {lineno}: missing field {key!r}")
            ts = rec["timestamp"]
            if not isinstance(ts, int) or isinstance(ts, bool) or ts < 0:
                raise DataFormatError(f"{path}: line {lineno}: timestamp must be a non-negative integer")
            try:
                posts.append(
                    make_post(
                        rec["post_id"],
                        rec["author_id"],
                        ts,
                        rec["text"],
                        reply_to=rec.get("reply_to"),
                        retweet_of=rec.get("retweet_of"),
                    )
                )
            except DataFormatError as exc:
                raise DataFormatError(f"{path}: line {lineno}: {exc}") from exc
    try:
        return Corpus.from_posts(posts, language=language, provenance=str(path))
    except DataFormatError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def write_posts(corpus: Corpus, path, header_comment: str | None = None) -> None:
    """Serialize a corpus back to JSONL; inverse of ingest_posts."""
    with open(path, "w", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        for author in sorted(corpus.posts_by_author):
            for p in corpus.posts_by_author[author]:
                rec = {
                    "post_id": p.post_id,
                    "author_id": p.author_id,
                    "timestamp": p.timestamp,
                    "text": p.raw_text,
                    "reply_to": p.reply_to,
                    "retweet_of": p.retweet_of,
                }
                fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def normalize_for_similarity(post) -> str:
    """Strip digit runs, @-mentions, and URL tokens; collapse whitespace.

    Accepts a Post or a plain string. Idempotent; the result may be empty.
    """
    text = post.raw_text if isinstance(post, Post) else post
    kept = []
    for tok in text.split():
        # digits first: "@bob99" and "w3ww.x" must still be dropped below
        tok = _DIGIT_RUN_RE.sub("", tok)
        if not tok or tok.startswith("@") or is_url_token(tok):
            continue
        kept.append(tok)
    return " ".join(kept)


_POST_ID_COMMENT_RE = re.compile(r"^#\s*post_id\s*=\s*(.+?)\s*$")


def _parse_conllu_sentences(path):
    """Yield (post_id, [AnnotationToken, ...], first_lineno) per sentence."""
    post_id = None
    rows: list[AnnotationToken] = []
    start_line = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                if rows:
                    yield post_id, rows, start_line
                post_id, rows, start_line = None, [], None
                continue
            m = _POST_ID_COMMENT_RE.match(line)
            if m:
                post_id = m.group(1)
                continue
            if line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 5:
                raise DataFormatError(f"{path}: line {lineno}: expected 5 tab-separated columns, got {len(cols)}")
            if post_id is None:
                raise DataFormatError(f"{path}: line {lineno}: token row before any '# post_id =' comment")
            try:
                idx, head = int(cols[0]), int(cols[3])
            except ValueError as exc:
                raise DataFormatError(f"{path}: line {lineno}: index and head must be integers") from exc
            if start_line is None:
                start_line = lineno
            rows.append(AnnotationToken(index=idx, form=cols[1], upos=cols[2], head=head, deprel=cols[4]))
    if rows:
        yield post_id, rows, start_line


def attach_annotations(corpus: Corpus, path) -> Corpus:
    """Attach per-post dependency annotations from a CoNLL-U-like sidecar.

    Returns a new Corpus; tree invariants are validated, unknown post_ids
    and cyclic head structures are errors.
    """
    by_post: dict[str, list[SentenceAnnotation]] = {}
    known = {p.post_id for p in corpus.all_posts()}
    for post_id, rows, lineno in _parse_conllu_sentences(path):
        if post_id not in known:
            raise DataFormatError(f"{path}: line {lineno}: annotation for unknown post_id {post_id!r}")
        try:
            sent = SentenceAnnotation(tokens=tuple(rows))
        except DataFormatError as exc:
            raise DataFormatError(f"{path}: line {lineno}: {exc}") from exc
        by_post.setdefault(post_id, []).append(sent)

    new_groups = {}
    for author, posts in corpus.posts_by_author.items():
        new_groups[author] = tuple(
            replace(p, annotation=tuple(by_post[p.post_id])) if p.post_id in by_post else p
            for p in posts
        )
    return Corpus(posts_by_author=new_groups, language=corpus.language, provenance=corpus.provenance)
