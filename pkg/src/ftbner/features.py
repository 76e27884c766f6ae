"""Token features for the CRF tagger.

Per position, over a [-2, 2] window:

* token form, prefixes and suffixes of length 1-5, an is-digit flag;
* the label of the gazetteer match covering the token (if any);
* the fill-in-the-gaps value, i.e. the gazetteer label when the token is
  covered by a gazetteer match and its UPOS otherwise, as unigrams and as
  bigrams over adjacent window positions;

plus the nearest preceding and following common noun (UPOS ``NOUN``) in
the sentence and a bias feature.  Offsets falling outside the sentence take
a begin/end marker specific to the offset as the value of every template,
so each position yields exactly :data:`FEATURES_PER_POSITION` keys.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .model import Sentence

log = logging.getLogger(__name__)

WINDOW = (-2, -1, 0, 1, 2)
AFFIX_LENGTHS = (1, 2, 3, 4, 5)
GAP_PAIRS = ((-2, -1), (-1, 0), (0, 1), (1, 2))
NO_LABEL = "_"
NO_NOUN = "_none_"
TEMPLATE_VERSION = "ftbner-features/1"

PER_OFFSET = 1 + 2 * len(AFFIX_LENGTHS) + 3  # form, affixes, digit, gaz, gap
FEATURES_PER_POSITION = len(WINDOW) * PER_OFFSET + len(GAP_PAIRS) + 2 + 1

FeatureVector = tuple  # tuple[str, ...] of feature keys, in template order


@dataclass(frozen=True)
class Gazetteer:
    name: str
    priority: int
    entries: frozenset

    @property
    def max_length(self) -> int:
        return max((len(e) for e in self.entries), default=0)


def load_gazetteer(path, name: Optional[str] = None, priority: int = 0) -> Gazetteer:
    """One entry per line, tokens separated by spaces; blanks and repeats dropped."""
    with open(path, encoding="utf-8") as f:
        entries = frozenset(
            tuple(line.split()) for line in f if line.strip()
        )
    if name is None:
        name = str(path).rsplit("/", 1)[-1].rsplit(".", 1)[0]
    if not entries:
        log.warning("gazetteer %s (%s) has no entries", name, path)
    return Gazetteer(name, priority, entries)


class GazetteerIndex:
    """Leftmost-longest matcher over a set of gazetteers.

    At a given start the longest entry wins; equal lengths go to the
    gazetteer with the lowest priority number.
    """

    def __init__(self, gazetteers: Sequence[Gazetteer] = ()):
        priorities = [g.priority for g in gazetteers]
        if len(set(priorities)) != len(priorities):
            raise ValueError("gazetteer priorities must be distinct")
        self.gazetteers = tuple(sorted(gazetteers, key=lambda g: g.priority))
        self.best: dict[tuple, str] = {}
        for g in reversed(self.gazetteers):
            for entry in g.entries:
                self.best[entry] = g.name
        self.max_length = max((g.max_length for g in self.gazetteers), default=0)

    def labels(self, forms: Sequence[str]) -> list[Optional[str]]:
        out: list[Optional[str]] = [None] * len(forms)
        i = 0
        n = len(forms)
        while i < n:
            for length in range(min(self.max_length, n - i), 0, -1):
                label = self.best.get(tuple(forms[i:i + length]))
                if label is not None:
                    out[i:i + length] = [label] * length
                    i += length
                    break
            else:
                i += 1
        return out


def apply_gazetteers(sentence, gazetteers: Sequence[Gazetteer]) -> list[Optional[str]]:
    forms = sentence.forms if isinstance(sentence, Sentence) else list(sentence)
    return GazetteerIndex(gazetteers).labels(forms)


def template_hash(gazetteers: Iterable[Gazetteer] = ()) -> str:
    h = hashlib.sha256()
    h.update(TEMPLATE_VERSION.encode())
    for g in sorted(gazetteers, key=lambda g: g.priority):
        h.update(f"\0{g.name}\0{g.priority}\0".encode())
        for entry in sorted(g.entries):
            h.update(("\1" + "\2".join(entry)).encode())
    return h.hexdigest()


def boundary(offset: int) -> str:
    return f"<BOS{offset}>" if offset < 0 else f"<EOS+{offset}>"


def _nearest_nouns(upos: Sequence[str], forms: Sequence[str]):
    prev, nxt = [], [NO_NOUN] * len(forms)
    last = NO_NOUN
    for form, tag in zip(forms, upos):
        prev.append(last)
        if tag == "NOUN":
            last = form
    last = NO_NOUN
    for i in range(len(forms) - 1, -1, -1):
        nxt[i] = last
        if upos[i] == "NOUN":
            last = forms[i]
    return prev, nxt


class FeatureExtractor:
    def __init__(self, gazetteers: Sequence[Gazetteer] = ()):
        self.index = GazetteerIndex(gazetteers)
        self.gazetteers = self.index.gazetteers
        self.template_hash = template_hash(self.gazetteers)

    def sentence(self, sentence: Sentence) -> list[FeatureVector]:
        words = sentence.words
        forms = [w.form for w in words]
        upos = [w.upos or NO_LABEL for w in words]
        gaz = self.index.labels(forms)
        return _features(forms, upos, gaz)

    def extract(self, sentence: Sentence, position: int) -> FeatureVector:
        """Features of the 1-based word ``position``."""
        n = len(sentence.words)
        if not 1 <= position <= n:
            raise IndexError(f"position {position} outside 1..{n}")
        return self.sentence(sentence)[position - 1]


def extract(sentence: Sentence, gazetteers: Sequence[Gazetteer], position: int) -> FeatureVector:
    return FeatureExtractor(gazetteers).extract(sentence, position)


def _features(forms, upos, gaz) -> list[FeatureVector]:
    n = len(forms)
    gap = [g if g is not None else p for g, p in zip(gaz, upos)]
    prev_noun, next_noun = _nearest_nouns(upos, forms)
    out = []
    for i in range(n):
        keys = ["bias"]
        gap_at = {}
        for d in WINDOW:
            j = i + d
            if 0 <= j < n:
                form = forms[j]
                keys.append(f"w[{d}]={form}")
                keys.extend(f"p{k}[{d}]={form[:k]}" for k in AFFIX_LENGTHS)
                keys.extend(f"s{k}[{d}]={form[-k:]}" for k in AFFIX_LENGTHS)
                keys.append(f"digit[{d}]={form.isdigit()}")
                keys.append(f"gaz[{d}]={gaz[j] or NO_LABEL}")
                gap_at[d] = gap[j]
            else:
                b = boundary(d)
                keys.append(f"w[{d}]={b}")
                keys.extend(f"p{k}[{d}]={b}" for k in AFFIX_LENGTHS)
                keys.extend(f"s{k}[{d}]={b}" for k in AFFIX_LENGTHS)
                keys.append(f"digit[{d}]={b}")
                keys.append(f"gaz[{d}]={b}")
                gap_at[d] = b
            keys.append(f"gap[{d}]={gap_at[d]}")
        for a, b in GAP_PAIRS:
            keys.append(f"gap[{a},{b}]={gap_at[a]}|{gap_at[b]}")
        keys.append(f"prevN={prev_noun[i]}")
        keys.append(f"nextN={next_noun[i]}")
        out.append(tuple(keys))
    return out
