from __future__ import annotations

import pytest

from idlink.corpus import AnnotationToken, SentenceAnnotation, make_post
from idlink.textfeat import load_lexicons


@pytest.fixture(scope="session")
def lexicons():
    return load_lexicons()


def post(post_id, author="u1", ts=0, text="hello world", reply_to=None, retweet_of=None):
    return make_post(post_id, author, ts, text, reply_to=reply_to, retweet_of=retweet_of)


def sentence(*rows):
    """rows: (index, form, upos, head, deprel) tuples."""
    return SentenceAnnotation(tokens=tuple(AnnotationToken(*r) for r in rows))


@pytest.fixture
def simple_sentence():
    return sentence(
        (1, "Dogs", "NOUN", 2, "nsubj"),
        (2, "bark", "VERB", 0, "root"),
        (3, "loudly", "ADV", 2, "advmod"),
    )
