"""Labeled linked/non-linked account pairs via account splitting.

Each sampled source user u is split into derived accounts u+"a" and u+"b";
the pair (ua, ub) is Linked, every cross pair (ia, jb) with i != j is
NonLinked. Datasets keep all X linked pairs and sample k*9*X non-linked
pairs (capped at the X*(X-1) universe).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .corpus import Corpus, Post
from .errors import DataFormatError

LINKED = "Linked"
NONLINKED = "NonLinked"
SPLIT_MODES = ("random", "interleave")

# post-count strata: [10,15), [15,20), ... [55,60), [60, inf)
_BIN_LO = 10
_BIN_STEP = 5
_BIN_COUNT = 11


@dataclass(frozen=True)
class SplitPlan:
    """Sampling plan: X source users, split mode, non-linked scale k, seed."""

    x: int
    mode: str = "random"
    linked_ratio: float = 0.10
    k: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.x < 2:
            raise ValueError(f"plan.x must be >= 2, got {self.x}")
        if self.mode not in SPLIT_MODES:
            raise ValueError(f"unknown split mode {self.mode!r}")
        if not 0.0 < self.linked_ratio < 1.0:
            raise ValueError(f"linked_ratio must be in (0, 1), got {self.linked_ratio}")
        if self.k < 1:
            raise ValueError(f"plan.k must be >= 1, got {self.k}")
        # one capped step past the universe is allowed; beyond that the
        # request is indistinguishable from the previous step
        if (self.k - 1) * self.nonlinked_step >= self.x * (self.x - 1):
            raise ValueError(
                f"plan.k={self.k} exceeds the non-linked universe of {self.x * (self.x - 1)} pairs"
            )

    @property
    def nonlinked_per_linked(self) -> int:
        return round((1.0 - self.linked_ratio) / self.linked_ratio)

    @property
    def nonlinked_step(self) -> int:
        return self.nonlinked_per_linked * self.x

    @property
    def n_nonlinked(self) -> int:
        return min(self.k * self.nonlinked_step, self.x * (self.x - 1))


@dataclass(frozen=True)
class LabeledPair:
    account_a: str
    account_b: str
    label: str

    def __post_init__(self):
        if not self.account_a.endswith("a") or not self.account_b.endswith("b"):
            raise ValueError(f"pair sides must carry a/b suffixes: {self.account_a!r}, {self.account_b!r}")
        if self.label not in (LINKED, NONLINKED):
            raise ValueError(f"unknown label {self.label!r}")
        same_source = self.account_a[:-1] == self.account_b[:-1]
        if (self.label == LINKED) != same_source:
            raise ValueError(
                f"label {self.label} inconsistent with sources {self.account_a!r}/{self.account_b!r}"
            )


def filter_min_posts(corpus: Corpus, min_posts: int = 10) -> Corpus:
    """Keep only authors with at least min_posts posts."""
    kept = {a: ps for a, ps in corpus.posts_by_author.items() if len(ps) >= min_posts}
    return Corpus(posts_by_author=kept, language=corpus.language, provenance=corpus.provenance)


def _stratum(n_posts: int) -> int:
    return min(max((n_posts - _BIN_LO) // _BIN_STEP, 0), _BIN_COUNT - 1)


def stratified_sample(corpus: Corpus, x: int, seed: int) -> list[str]:
    """Sample X author ids, proportionally across post-count strata.

    Allocation uses largest-remainder rounding so per-stratum allocations
    sum to X; selection within a stratum is uniform under the seed.
    """
    authors = sorted(corpus.posts_by_author)
    population = len(authors)
    if population < x:
        raise ValueError(f"population {population} smaller than requested X={x}")
    bins: dict[int, list[str]] = {}
    for a in authors:
        bins.setdefault(_stratum(len(corpus.posts_by_author[a])), []).append(a)

    bin_ids = sorted(bins)
    sizes = np.array([len(bins[b]) for b in bin_ids], dtype=float)
    quotas = x * sizes / population
    alloc = np.floor(quotas).astype(int)
    remainder = x - int(alloc.sum())
    if remainder > 0:
        # stable: larger fractional part first, earlier stratum on ties
        order = sorted(range(len(bin_ids)), key=lambda i: (-(quotas[i] - alloc[i]), i))
        for i in order[:remainder]:
            alloc[i] += 1

    rng = np.random.default_rng(seed)
    selected: list[str] = []
    for b, take in zip(bin_ids, alloc):
        if take:
            members = bins[b]
            picked = rng.choice(len(members), size=int(take), replace=False)
            selected.extend(members[i] for i in sorted(picked))
    return sorted(selected)


def split_account(posts: list[Post], mode: str, seed: int) -> tuple[list[Post], list[Post]]:
    """Partition one account's posts into two halves.

    random: uniform permutation under seed, first ceil(n/2) posts to "a".
    interleave: timestamp-sorted (post_id breaks ties), even positions to
    "a", odd to "b". Half sizes differ by at most 1.
    """
    if len(posts) < 2:
        raise ValueError(f"cannot split an account with {len(posts)} post(s)")
    if mode not in SPLIT_MODES:
        raise ValueError(f"unknown split mode {mode!r}")
    ordered = sorted(posts, key=lambda p: (p.timestamp, p.post_id))
    if mode == "random":
        rng = np.random.default_rng(seed)
        perm = rng.permutation(len(ordered))
        half = math.ceil(len(ordered) / 2)
        a_idx = sorted(perm[:half].tolist())
        b_idx = sorted(perm[half:].tolist())
        return [ordered[i] for i in a_idx], [ordered[i] for i in b_idx]
    return ordered[0::2], ordered[1::2]


def derive_split_corpus(corpus: Corpus, selected: list[str], mode: str, seed: int) -> Corpus:
    """Split every selected author into <id>a / <id>b derived accounts."""
    groups: dict[str, tuple[Post, ...]] = {}
    for i, author in enumerate(sorted(selected)):
        child_seed = np.random.SeedSequence([seed, i]).generate_state(1)[0]
        half_a, half_b = split_account(list(corpus.posts_by_author[author]), mode, int(child_seed))
        groups[author + "a"] = tuple(replace(p, author_id=author + "a") for p in half_a)
        groups[author + "b"] = tuple(replace(p, author_id=author + "b") for p in half_b)
    groups = dict(sorted(groups.items()))
    return Corpus(posts_by_author=groups, language=corpus.language,
                  provenance=f"{corpus.provenance} [split:{mode}]".strip())


def build_pair_universe(a_accounts, b_accounts) -> list[LabeledPair]:
    """X linked pairs plus X*(X-1) non-linked cross pairs."""
    a_sorted = sorted(a_accounts)
    b_sorted = sorted(b_accounts)
    if len(a_sorted) != len(b_sorted):
        raise ValueError(f"side sizes differ: {len(a_sorted)} vs {len(b_sorted)}")
    sources_a = [a[:-1] for a in a_sorted]
    sources_b = [b[:-1] for b in b_sorted]
    if sources_a != sources_b:
        raise ValueError("a/b sides must derive from the same source users")
    pairs = [LabeledPair(s + "a", s + "b", LINKED) for s in sources_a]
    for sa in sources_a:
        for sb in sources_b:
            if sa != sb:
                pairs.append(LabeledPair(sa + "a", sb + "b", NONLINKED))
    return pairs


def sample_dataset(universe: list[LabeledPair], plan: SplitPlan) -> list[LabeledPair]:
    """All linked pairs plus a uniform sample of plan.n_nonlinked non-linked ones."""
    linked = [p for p in universe if p.label == LINKED]
    nonlinked = [p for p in universe if p.label == NONLINKED]
    if len(linked) != plan.x:
        raise ValueError(f"universe has {len(linked)} linked pairs but plan.x={plan.x}")
    take = plan.n_nonlinked
    if take >= len(nonlinked):
        sampled = nonlinked
    else:
        rng = np.random.default_rng(plan.seed)
        idx = rng.choice(len(nonlinked), size=take, replace=False)
        sampled = [nonlinked[i] for i in sorted(idx)]
    return linked + sampled


def build_ground_truth(corpus: Corpus, plan: SplitPlan, min_posts: int = 10
                       ) -> tuple[Corpus, list[LabeledPair]]:
    """Full ground-truth pipeline: filter, sample, split, pair, subsample."""
    filtered = filter_min_posts(corpus, min_posts)
    selected = stratified_sample(filtered, plan.x, plan.seed)
    split = derive_split_corpus(filtered, selected, plan.mode, plan.seed)
    a_side = [a for a in split.posts_by_author if a.endswith("a")]
    b_side = [b for b in split.posts_by_author if b.endswith("b")]
    universe = build_pair_universe(a_side, b_side)
    return split, sample_dataset(universe, plan)


def write_pairs(pairs: list[LabeledPair], path, header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["account_a", "account_b", "label"])
        for p in pairs:
            writer.writerow([p.account_a, p.account_b, p.label])


def read_pairs(path) -> list[LabeledPair]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in fh if not r.startswith("#")]
    reader = csv.reader(rows)
    header = next(reader, None)
    if header != ["account_a", "account_b", "label"]:
        raise DataFormatError(f"{path}: expected header account_a,account_b,label")
    return [LabeledPair(r[0], r[1], r[2]) for r in reader]
