"""Synthetic post corpora with planted per-user style.

Each user draws a latent style from style_seed: character habits
(capitalization, punctuation, digits), word-length and vocabulary bias via
a topic mixture, lexicon usage rates, sentence-length distribution,
mention/hashtag rates, a posting-interval scale, and a preferred-neighbor
set that drives mentions, replies, and retweets. Post content is then
drawn from that style under seed, so the corpus is a pure function of
(style_seed, seed) and the two halves of one user stay statistically
similar along every implemented feature family.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Post, make_post
from .textfeat import LexiconSet, load_lexicons

_CONSONANTS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"
_N_TOPICS = 40
_WORDS_PER_TOPIC = 50
_BASE_TIME = 1_600_000_000


def _build_vocabulary(style_seed: int) -> list[list[str]]:
    """Topic-partitioned pseudo-word vocabulary, deterministic in style_seed."""
    rng = np.random.default_rng(np.random.SeedSequence([style_seed, 0]))
    topics: list[list[str]] = []
    seen: set[str] = set()
    for _ in range(_N_TOPICS):
        length_bias = rng.uniform(0.2, 2.2)
        words: list[str] = []
        while len(words) < _WORDS_PER_TOPIC:
            n_syll = 1 + min(int(rng.poisson(length_bias)), 4)
            word = "".join(
                _CONSONANTS[rng.integers(len(_CONSONANTS))] + _VOWELS[rng.integers(len(_VOWELS))]
                for _ in range(n_syll)
            )
            if word not in seen:
                seen.add(word)
                words.append(word)
        topics.append(words)
    return topics


@dataclass
class _UserStyle:
    cap_rate: float
    shout_rate: float
    comma_rate: float
    digit_rate: float
    paren_rate: float
    colon_rate: float
    hyphen_rate: float
    quote_rate: float
    terminal_weights: np.ndarray  # (period, exclamation, question)
    no_terminal_rate: float
    words_mean: float
    words_std: float
    sentence_weights: np.ndarray  # P(1..3 sentences per post)
    lexicon_rates: np.ndarray  # per _LEXICON_ORDER, scaled to leave topic mass
    topic_ids: np.ndarray
    topic_weights: np.ndarray
    mention_rate: float
    hashtag_rate: float
    reply_rate: float
    retweet_rate: float
    interval_scale: float
    neighbor_ids: np.ndarray
    neighbor_weights: np.ndarray


_LEXICON_ORDER = (
    "stopwords", "first_person_pronouns", "interjections", "discourse_markers",
    "curse_words", "positive_words", "negative_words", "abbreviations", "acronyms",
)
_LEXICON_RATE_RANGES = (
    (0.15, 0.45), (0.0, 0.15), (0.0, 0.12), (0.0, 0.12),
    (0.0, 0.10), (0.0, 0.15), (0.0, 0.15), (0.0, 0.10), (0.0, 0.08),
)


def _draw_style(rng: np.random.Generator, user_idx: int, n_users: int) -> _UserStyle:
    rates = np.array([rng.uniform(lo, hi) for lo, hi in _LEXICON_RATE_RANGES])
    total = rates.sum()
    if total > 0.7:  # keep at least 30% topic words
        rates *= 0.7 / total
    n_topics_user = int(rng.integers(2, 5))
    topic_ids = rng.choice(_N_TOPICS, size=n_topics_user, replace=False)
    topic_weights = rng.dirichlet(np.full(n_topics_user, 0.8))
    n_neighbors = int(rng.integers(2, 7))
    others = np.array([u for u in range(n_users) if u != user_idx])
    neighbor_ids = rng.choice(others, size=min(n_neighbors, len(others)), replace=False)
    return _UserStyle(
        cap_rate=rng.uniform(0.1, 1.0),
        shout_rate=rng.uniform(0.0, 0.15),
        comma_rate=rng.uniform(0.0, 0.3),
        digit_rate=rng.uniform(0.0, 0.25),
        paren_rate=rng.uniform(0.0, 0.12),
        colon_rate=rng.uniform(0.0, 0.1),
        hyphen_rate=rng.uniform(0.0, 0.12),
        quote_rate=rng.uniform(0.0, 0.12),
        terminal_weights=rng.dirichlet(np.array([2.0, 1.0, 1.0])),
        no_terminal_rate=rng.uniform(0.0, 0.4),
        words_mean=rng.uniform(4.0, 12.0),
        words_std=rng.uniform(0.5, 3.0),
        sentence_weights=rng.dirichlet(np.array([3.0, 1.5, 0.7])),
        lexicon_rates=rates,
        topic_ids=topic_ids,
        topic_weights=topic_weights,
        mention_rate=rng.uniform(0.1, 0.6),
        hashtag_rate=rng.uniform(0.0, 0.5),
        reply_rate=rng.uniform(0.05, 0.4),
        retweet_rate=rng.uniform(0.0, 0.3),
        interval_scale=float(np.exp(rng.uniform(np.log(300.0), np.log(3000.0)))),
        neighbor_ids=neighbor_ids,
        neighbor_weights=rng.dirichlet(np.full(min(n_neighbors, len(others)), 1.0)),
    )


def _user_id(idx: int) -> str:
    return f"user{idx:04d}"


def _draw_word(rng, style, lexicon_lists, topics) -> str:
    r = rng.random()
    acc = 0.0
    for pool, rate in zip(lexicon_lists, style.lexicon_rates):
        acc += rate
        if r < acc:
            word = pool[rng.integers(len(pool))]
            return word
    topic = style.topic_ids[rng.choice(len(style.topic_ids), p=style.topic_weights)]
    words = topics[topic]
    return words[rng.integers(len(words))]


def _render_sentence(rng, style, lexicon_lists, topics) -> str:
    n_words = max(1, int(round(rng.normal(style.words_mean, style.words_std))))
    words = []
    for w in range(n_words):
        word = _draw_word(rng, style, lexicon_lists, topics)
        if rng.random() < style.shout_rate:
            word = word.upper()
        elif w == 0 and rng.random() < style.cap_rate:
            word = word.capitalize()
        if rng.random() < style.paren_rate:
            word = f"({word})"
        elif rng.random() < style.quote_rate:
            word = f'"{word}"'
        if rng.random() < style.hyphen_rate:
            word = word + "-" + _draw_word(rng, style, lexicon_lists, topics)
        if w < n_words - 1 and rng.random() < style.comma_rate:
            word += ","
        elif w < n_words - 1 and rng.random() < style.colon_rate:
            word += ";" if rng.random() < 0.5 else ":"
        words.append(word)
    if rng.random() < style.digit_rate:
        words.append(str(rng.integers(1, 10000)))
    sentence = " ".join(words)
    if rng.random() >= style.no_terminal_rate:
        sentence += (".", "!", "?")[rng.choice(3, p=style.terminal_weights)]
    return sentence


def generate_synthetic_corpus(
    n_users: int,
    posts_per_user,
    style_seed: int,
    seed: int,
    language: str = "en",
    lexicons: LexiconSet | None = None,
) -> Corpus:
    """Generate a corpus of n_users authors with planted latent styles.

    posts_per_user is an inclusive (lo, hi) range (an int means exactly
    that many). Deterministic in (style_seed, seed).
    """
    if n_users < 2:
        raise ValueError(f"n_users must be >= 2, got {n_users}")
    if isinstance(posts_per_user, int):
        lo = hi = posts_per_user
    else:
        lo, hi = posts_per_user
    if lo < 1 or hi < lo:
        raise ValueError(f"bad posts_per_user range ({lo}, {hi})")
    if lexicons is None:
        lexicons = load_lexicons()
    # frozensets have no stable order; sort before any rng.choice
    lexicon_lists = [sorted(getattr(lexicons, name)) for name in _LEXICON_ORDER]
    topics = _build_vocabulary(style_seed)

    posts: list[Post] = []
    for u in range(n_users):
        style_rng = np.random.default_rng(np.random.SeedSequence([style_seed, 1, u]))
        style = _draw_style(style_rng, u, n_users)
        rng = np.random.default_rng(np.random.SeedSequence([seed, 2, u]))
        author = _user_id(u)
        n_posts = int(rng.integers(lo, hi + 1))
        ts = _BASE_TIME + int(rng.integers(0, 1_000_000))
        for i in range(n_posts):
            ts += max(1, int(rng.exponential(style.interval_scale)))
            n_sents = 1 + int(rng.choice(3, p=style.sentence_weights))
            sentences = [_render_sentence(rng, style, lexicon_lists, topics) for _ in range(n_sents)]
            text = " ".join(sentences)

            reply_to = None
            retweet_of = None
            roll = rng.random()
            if roll < style.retweet_rate:
                retweet_of = _user_id(int(style.neighbor_ids[rng.choice(len(style.neighbor_ids), p=style.neighbor_weights)]))
            elif roll < style.retweet_rate + style.reply_rate:
                reply_to = _user_id(int(style.neighbor_ids[rng.choice(len(style.neighbor_ids), p=style.neighbor_weights)]))
            if rng.random() < style.mention_rate:
                n_mentions = 1 + int(rng.random() < 0.3)
                for _ in range(n_mentions):
                    target = style.neighbor_ids[rng.choice(len(style.neighbor_ids), p=style.neighbor_weights)]
                    text += f" @{_user_id(int(target))}"
            if rng.random() < style.hashtag_rate:
                topic = style.topic_ids[rng.choice(len(style.topic_ids), p=style.topic_weights)]
                tag = topics[topic][rng.integers(_WORDS_PER_TOPIC)]
                text += f" #{tag}"

            posts.append(
                make_post(
                    post_id=f"{author}-p{i:04d}",
                    author_id=author,
                    timestamp=ts,
                    text=text,
                    reply_to=reply_to,
                    retweet_of=retweet_of,
                )
            )
    return Corpus.from_posts(
        posts, language=language,
        provenance=f"synthetic(style_seed={style_seed}, seed={seed})",
    )
