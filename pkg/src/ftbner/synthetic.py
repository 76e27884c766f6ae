"""Synthetic corpora for tests and experiments.

In :func:`deterministic_corpus` every word form belongs to exactly one tag
(mention-initial forms, mention-internal forms, outside forms), so a tagger
that memorizes forms has zero Bayes error.
"""

from __future__ import annotations

import random
from typing import Optional

from .model import NeType, Sentence, Token, TokenMention

TYPES = (NeType.PERSON, NeType.LOCATION, NeType.ORGANIZATION, NeType.COMPANY)
OUTSIDE_POS = ("DET", "NOUN", "VERB", "ADP", "ADJ", "PUNCT")


def make_sentence(forms, upos=None, mentions=(), sent_id="1", raw_text=None) -> Sentence:
    upos = upos or [None] * len(forms)
    tokens = tuple(Token(i, f, p) for i, (f, p) in enumerate(zip(forms, upos), 1))
    return Sentence(
        raw_text=" ".join(forms) if raw_text is None else raw_text,
        tokens=tokens,
        mentions=tuple(mentions),
        sent_id=sent_id,
    )


def deterministic_corpus(
    n_sentences: int,
    seed: int = 0,
    vocab_per_tag: int = 12,
    types=TYPES,
    max_len: int = 14,
    id_prefix: str = "s",
) -> list[Sentence]:
    rng = random.Random(seed)
    outside = [(f"w{p.lower()}{i}", p) for p in OUTSIDE_POS for i in range(vocab_per_tag)]
    begin = {t: [f"B{t.value[:3]}{i}" for i in range(vocab_per_tag)] for t in types}
    inside = {t: [f"i{t.value[:3].lower()}{i}" for i in range(vocab_per_tag)] for t in types}
    corpus = []
    for k in range(n_sentences):
        forms, upos, mentions = [], [], []
        target = rng.randint(3, max_len)
        while len(forms) < target:
            if rng.random() < 0.25:
                t = rng.choice(types)
                length = rng.choice((1, 1, 2, 3))
                first = len(forms) + 1
                forms.append(rng.choice(begin[t]))
                forms.extend(rng.choice(inside[t]) for _ in range(length - 1))
                upos.extend(["PROPN"] * length)
                mentions.append(TokenMention(first, len(forms), t))
            else:
                form, pos = rng.choice(outside)
                forms.append(form)
                upos.append(pos)
        corpus.append(make_sentence(forms, upos, mentions, f"{id_prefix}{k + 1}"))
    return corpus


def random_model_instance(rng, n_tokens: int, n_tags: int, n_features: int = 6,
                          dyadic: bool = False):
    """A random small CRF and sentence: ``(model, features)``."""
    import numpy as np

    from .crf import CrfModel

    tags = ["O"] + [f"B-T{i}" for i in range(n_tags - 1)]
    keys = [f"f{i}" for i in range(n_features)]
    if dyadic:
        em = rng.integers(-4, 5, size=(n_features, n_tags)) / 4.0
        tr = rng.integers(-4, 5, size=(n_tags, n_tags)) / 4.0
    else:
        em = rng.normal(size=(n_features, n_tags))
        tr = rng.normal(size=(n_tags, n_tags))
    model = CrfModel(tuple(tags), {k: i for i, k in enumerate(keys)}, em, tr)
    feats = []
    for _ in range(n_tokens):
        active = [k for k in keys if rng.random() < 0.5]
        if rng.random() < 0.3:
            active.append("unseen")
        feats.append(tuple(active))
    return model, feats


def detokenize(forms, rng: random.Random, spaces=(" ", "  ", " ", "\t"),
               glue: float = 0.3, flip_case: float = 0.2) -> str:
    """Join forms with random whitespace (sometimes none) and case flips."""
    out = []
    for i, form in enumerate(forms):
        if i:
            out.append("" if rng.random() < glue else rng.choice(spaces))
        chars = []
        for c in form:
            if rng.random() < flip_case:
                flipped = c.swapcase()
                if len(flipped) == 1:
                    c = flipped
            chars.append(c)
        out.append("".join(chars))
    return "".join(out)


def random_forms(rng: random.Random, n: int, alphabet: Optional[str] = None) -> list[str]:
    alphabet = alphabet or "abcdeéèàçôÉßxyzABC0123456789,.;:'-()«»&"
    return ["".join(rng.choice(alphabet) for _ in range(rng.randint(1, 6))) for _ in range(n)]
