"""Per-account activity and linguistic feature vectors.

Character/word/sentence/dictionary features need only the raw text;
POS, dependency, and tree features come from a CoNLL-U-like annotation
sidecar produced by an external parser.
"""

import io
import tempfile

from idlink import attach_annotations, generate_synthetic_corpus
from idlink.textfeat import (
    activity_features,
    account_annotations,
    linguistic_features,
    load_lexicons,
    tree_metrics,
)

lexicons = load_lexicons()  # packaged English lists
corpus = generate_synthetic_corpus(4, (15, 25), style_seed=2, seed=9)

author = corpus.authors()[0]
posts = list(corpus.posts_of(author))

act = activity_features(posts)
print(f"activity vector for {author}:")
for name, value in act.values.items():
    print(f"  {name} = {value:.3f}")

ling = linguistic_features(posts, None, lexicons)
print(f"\nlinguistic vector has {len(ling)} features; a few of them:")
for name in ("upper_ratio", "mean_word_chars", "vocab_richness",
             "sent_words_mean", "curse_ratio", "stopword_ratio"):
    print(f"  {name} = {ling.values[name]:.4f}")

# attach a dependency annotation for one post and extract syntactic features
post = posts[0]
conllu = (
    f"# post_id = {post.post_id}\n"
    "1\tThe\tDET\t2\tdet\n"
    "2\tcake\tNOUN\t4\tnsubj:pass\n"
    "3\twas\tAUX\t4\taux\n"
    "4\teaten\tVERB\t0\troot\n"
    "5\tquickly\tADV\t4\tadvmod\n"
)
with tempfile.NamedTemporaryFile("w", suffix=".conllu", delete=False) as fh:
    fh.write(conllu)
    sidecar = fh.name

annotated = attach_annotations(corpus, sidecar)
sentences = account_annotations(list(annotated.posts_of(author)))
ling2 = linguistic_features(list(annotated.posts_of(author)), sentences, lexicons)
print("\nafter attaching one annotated sentence:")
for name in ("pos_noun", "pos_verb", "dep_nsubj", "passive_ratio",
             "tree_depth_mean", "tree_width_mean", "tree_ramification_mean"):
    print(f"  {name} = {ling2.values[name]:.4f}")

depth, width, ram = tree_metrics(sentences[0])
print(f"\ntree shape of that sentence: depth={depth} width={width} ramification={ram:.2f}")
