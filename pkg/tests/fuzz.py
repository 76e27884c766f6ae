"""Detokenize-and-realign fuzzing corpora."""

import random

from ftbner.model import Mention, Sentence, Token

from generators import random_attrs

ALPHABET = "abcdefxyzéèàçôœÉÀÇσςΣ0123456789,.;:'-()«»&%"
SPACES = (" ", " ", " ", " ", "\t", "  ", "  ")
CORRUPTION = "§"


def flip(rng, form):
    out = []
    for c in form:
        if rng.random() < 0.3:
            swapped = c.swapcase()
            if len(swapped) == 1:
                c = swapped
        out.append(c)
    return "".join(out)


def sentence_pair(rng: random.Random, sent_id: str):
    """An (annotated raw sentence, tokenized sentence) pair that must align."""
    n = rng.randint(1, 15)
    forms = ["".join(rng.choice(ALPHABET) for _ in range(rng.randint(1, 6))) for _ in range(n)]
    pieces, offsets, pos = [], [], 0
    for i, form in enumerate(forms):
        if i:
            sep = "" if rng.random() < 0.2 else rng.choice(SPACES)
            pieces.append(sep)
            pos += len(sep)
        surface = flip(rng, form)
        pieces.append(surface)
        offsets.append((pos, pos + len(surface)))
        pos += len(surface)
    lead = rng.choice(["", "", " ", " "])
    trail = rng.choice(["", "", " ", "  "])
    raw = lead + "".join(pieces) + trail
    offsets = [(a + len(lead), b + len(lead)) for a, b in offsets]
    mentions = []
    i = 0
    while i < n:
        if rng.random() < 0.25:
            j = min(n - 1, i + rng.randint(0, 2))
            mentions.append(Mention(offsets[i][0], offsets[j][1], **random_attrs(rng)))
            i = j + 1
        else:
            i += 1
    tokens = tuple(Token(k, f) for k, f in enumerate(forms, 1))
    return (Sentence(raw, mentions=tuple(mentions), sent_id=sent_id),
            Sentence(raw, tokens, sent_id=sent_id))


def corpus(rng, n):
    pairs = [sentence_pair(rng, str(i + 1)) for i in range(n)]
    return [a for a, _ in pairs], [t for _, t in pairs]


def corrupt(rng, annotated, k):
    """Replace one non-space character of sentence ``k`` (a copy is returned)."""
    s = annotated[k]
    positions = [i for i, c in enumerate(s.raw_text) if not c.isspace()]
    p = rng.choice(positions)
    raw = s.raw_text[:p] + CORRUPTION + s.raw_text[p + 1:]
    out = list(annotated)
    out[k] = Sentence(raw, mentions=s.mentions, sent_id=s.sent_id)
    return out
