"""From two accounts' evidence to one classifier-ready pair instance.

Shows min-max scaling, absolute-difference and similarity features, edit
distance over post cross products, and embedding semantic centers, then
assembles a full pair instance for one of the eleven method ids.
"""

import numpy as np

from idlink import SplitPlan, build_ground_truth, generate_synthetic_corpus
from idlink.corpus import normalize_for_similarity
from idlink.netgraph import build_graph, network_features
from idlink.pairmodel import (
    METHOD_IDS,
    apply_minmax,
    assemble_pair,
    category_similarity,
    edit_similarity,
    fit_minmax,
    levenshtein,
    random_embedding_table,
    semantic_center,
    semantic_similarity,
)
from idlink.textfeat import activity_features, linguistic_features, load_lexicons

print("the eleven method configurations:")
for m in METHOD_IDS:
    print(" ", m)

corpus = generate_synthetic_corpus(10, (14, 30), style_seed=1, seed=2)
split, pairs = build_ground_truth(corpus, SplitPlan(x=8, k=1, seed=3))
lexicons = load_lexicons()
accounts = sorted(split.posts_by_author)

# per-account raw vectors, then dataset-wide min-max scaling
graph = build_graph(split, accounts)
raw = {
    a: {
        "activity": activity_features(list(split.posts_of(a))),
        "linguistic": linguistic_features(list(split.posts_of(a)), None, lexicons),
        "network": network_features(graph, a),
    }
    for a in accounts
}
scalers = {cat: fit_minmax([raw[a][cat] for a in accounts])
           for cat in ("activity", "linguistic", "network")}
vectors = {
    a: {cat: apply_minmax(scalers[cat], raw[a][cat]) for cat in scalers}
    for a in accounts
}

texts = {
    a: [t for t in (normalize_for_similarity(p) for p in split.posts_of(a)) if t]
    for a in accounts
}
vocab = {tok for ts in texts.values() for t in ts for tok in t.split()}
emb = random_embedding_table(vocab, dim=50, seed=4)

linked = next(p for p in pairs if p.label == "Linked")
nonlinked = next(p for p in pairs if p.label == "NonLinked")

print(f"\nedit distance: 'kitten' vs 'sitting' = {levenshtein('kitten', 'sitting')}")
for pair in (linked, nonlinked):
    ed = edit_similarity(texts[pair.account_a], texts[pair.account_b])
    ca = semantic_center(texts[pair.account_a], emb)
    cb = semantic_center(texts[pair.account_b], emb)
    sim = semantic_similarity(ca, cb)
    act_sim = category_similarity(
        vectors[pair.account_a]["activity"].as_array(),
        vectors[pair.account_b]["activity"].as_array(),
        "cosine",
    )
    print(f"{pair.label:>10} pair {pair.account_a}/{pair.account_b}: "
          f"norm-edit={ed:.3f} semantic={sim:.3f} activity-cos={act_sim:.3f}")

inst = assemble_pair(linked, "all_abs+edits+sem", vectors, texts=texts, embeddings=emb)
print(f"\nassembled '{inst.method_id}' instance has {len(inst.features)} features")
print("last five:", {k: round(v, 4) for k, v in list(inst.features.items())[-5:]})
