"""Build linked/non-linked ground truth by splitting accounts.

Every sampled user u is split into ua/ub; (ua, ub) is a Linked pair and
cross pairs (ia, jb) are NonLinked. The final dataset keeps a 10:90
linked/non-linked ratio.
"""

from collections import Counter

from idlink import SplitPlan, build_ground_truth, generate_synthetic_corpus, split_account
from idlink.groundtruth import build_pair_universe, sample_dataset

corpus = generate_synthetic_corpus(30, (12, 40), style_seed=3, seed=4)

plan = SplitPlan(x=20, mode="random", k=1, seed=97)
split_corpus, pairs = build_ground_truth(corpus, plan, min_posts=10)

print(f"source users: {corpus.n_authors}; derived accounts: {split_corpus.n_authors}")
print(f"dataset pairs: {Counter(p.label for p in pairs)}")
print("example pairs:", [(p.account_a, p.account_b, p.label) for p in pairs[:3]])

# the two split modes
posts = list(corpus.posts_of(corpus.authors()[0]))
a, b = split_account(posts, "interleave", seed=0)
print(f"\ninterleave split of {len(posts)} posts -> {len(a)}/{len(b)}")
print("  a timestamps:", [p.timestamp for p in a[:5]], "...")
print("  b timestamps:", [p.timestamp for p in b[:5]], "...")

# the full pair universe grows quadratically; X=200 gives the familiar sizes
sources = [f"u{i:03d}" for i in range(200)]
universe = build_pair_universe([s + "a" for s in sources], [s + "b" for s in sources])
dataset = sample_dataset(universe, SplitPlan(x=200, k=1, seed=1))
print(f"\nX=200: universe non-linked = {sum(p.label != 'Linked' for p in universe)}")
print(f"X=200, k=1 dataset: {Counter(p.label for p in dataset)}")
