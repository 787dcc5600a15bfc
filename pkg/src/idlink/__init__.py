"""Account-linkage detection toolkit.

Builds ground truth by splitting accounts, extracts activity, linguistic,
and conversation-graph features, models account pairs under several
configurations, and evaluates classifiers with repeated stratified
cross-validation.
"""

from .corpus import (
    Corpus,
    Post,
    SentenceAnnotation,
    attach_annotations,
    ingest_posts,
    make_post,
    normalize_for_similarity,
    tokenize,
    write_posts,
)
from .errors import ConvergenceError, DataFormatError
from .groundtruth import (
    LabeledPair,
    SplitPlan,
    build_ground_truth,
    build_pair_universe,
    filter_min_posts,
    sample_dataset,
    split_account,
    stratified_sample,
)
from .synth import generate_synthetic_corpus

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "Corpus",
    "DataFormatError",
    "LabeledPair",
    "Post",
    "SentenceAnnotation",
    "SplitPlan",
    "attach_annotations",
    "build_ground_truth",
    "build_pair_universe",
    "filter_min_posts",
    "generate_synthetic_corpus",
    "ingest_posts",
    "make_post",
    "normalize_for_similarity",
    "sample_dataset",
    "split_account",
    "stratified_sample",
    "tokenize",
    "write_posts",
    "__version__",
]
