"""Character-offset to token alignment and mention projection.

For each sentence a map from character spans of the raw (markup-free) text
to token indices is built by a greedy left-to-right scan: whitespace in the
raw text is skipped (``str.isspace``, so NBSP counts) and token forms are
matched character by character under simple case folding.  No backtracking
and no fuzzy matching: any discrepancy is reported, never repaired.
"""

from __future__ import annotations

import collections
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .model import Mention, Sentence, Token, TokenMention

TEXT_MISMATCH = "text_mismatch"
UNALIGNED_TOKEN = "unaligned_token"
UNALIGNED_MENTION = "unaligned_mention"
KINDS = (UNALIGNED_TOKEN, UNALIGNED_MENTION, TEXT_MISMATCH)

# which input an error points at: the raw annotated text, the treebank
# tokens, or undecidable from the data alone
RAW_SIDE = "raw"
TOKEN_SIDE = "token"
EITHER_SIDE = "either"


def simple_fold(c: str) -> str:
    """One-to-one case folding of a single character.

    Full folds that change length (``ß`` -> ``ss``) are not applied, so that
    offsets stay aligned.
    """
    folded = c.casefold()
    if len(folded) == 1:
        return folded
    lowered = c.lower()
    return lowered if len(lowered) == 1 else c


class AlignmentError(Exception):
    """A logged alignment problem; also raised by :func:`build_map`."""

    def __init__(self, kind: str, detail: str, side: str, sentence_id: str = ""):
        super().__init__(f"{sentence_id}\t{kind}\t{detail}")
        self.kind = kind
        self.detail = detail
        self.side = side
        self.sentence_id = sentence_id

    def with_sentence(self, sentence_id: str) -> "AlignmentError":
        return AlignmentError(self.kind, self.detail, self.side, sentence_id)

    def record(self) -> str:
        return f"{self.sentence_id}\t{self.kind}\t{self.detail}"

    def __eq__(self, other):
        if not isinstance(other, AlignmentError):
            return NotImplemented
        return self.record() == other.record() and self.side == other.side

    def __hash__(self):
        return hash(self.record())


@dataclass(frozen=True)
class AlignmentMap:
    """``entries`` holds ``(char_start, char_end, word_index)`` per word.

    Words covered by a multiword range share the range's character span.
    """

    entries: tuple[tuple[int, int, int], ...]

    def span_of(self, word_index: int) -> tuple[int, int]:
        for start, end, idx in self.entries:
            if idx == word_index:
                return start, end
        raise KeyError(word_index)


def _fragment(raw: str, start: int, stop: int) -> str:
    return repr(raw[start:stop]) if start < len(raw) else "<end of text>"


def build_map(raw_text: str, tokens: Sequence[Token], sentence_id: str = "") -> AlignmentMap:
    """Align ``tokens`` (CoNLL-U order, range lines included) to ``raw_text``.

    Raises :class:`AlignmentError` at the first discrepancy.
    """
    raw = raw_text
    pos = 0
    n = len(raw)
    entries = []
    covered_until = 0
    for tok in tokens:
        if not tok.is_multiword_range and tok.index <= covered_until:
            continue
        while pos < n and raw[pos].isspace():
            pos += 1
        form = tok.form.strip()
        if pos >= n:
            raise AlignmentError(
                UNALIGNED_TOKEN,
                f"token {tok.index} {tok.form!r} has no raw text left",
                TOKEN_SIDE,
                sentence_id,
            )
        start = pos
        j = 0
        while j < len(form):
            c = form[j]
            if c.isspace():
                while j < len(form) and form[j].isspace():
                    j += 1
                while pos < n and raw[pos].isspace():
                    pos += 1
                continue
            if pos >= n or simple_fold(raw[pos]) != simple_fold(c):
                raise AlignmentError(
                    TEXT_MISMATCH,
                    f"raw {_fragment(raw, pos, pos + 1)} at offset {pos} "
                    f"(in {raw[start:pos + 1]!r}) vs token {tok.index} {tok.form!r} "
                    f"char {j + 1} {c!r}",
                    EITHER_SIDE,
                    sentence_id,
                )
            pos += 1
            j += 1
        if tok.is_multiword_range:
            lo, hi = tok.range_span
            entries.extend((start, pos, i) for i in range(lo, hi + 1))
            covered_until = hi
        else:
            entries.append((start, pos, tok.index))
    while pos < n and raw[pos].isspace():
        pos += 1
    if pos < n:
        raise AlignmentError(
            UNALIGNED_TOKEN,
            f"raw text {raw[pos:pos + 20]!r} at offset {pos} is not covered by any token",
            RAW_SIDE,
            sentence_id,
        )
    return AlignmentMap(tuple(entries))


def project_mentions(
    mentions: Sequence[Mention], amap: AlignmentMap, sentence_id: str = ""
) -> tuple[list[TokenMention], list[AlignmentError]]:
    """Project character mentions onto word spans; failures are collected."""
    first_at: dict[int, int] = {}
    last_at: dict[int, int] = {}
    for start, end, idx in amap.entries:
        first_at.setdefault(start, idx)
        last_at[end] = max(idx, last_at.get(end, idx))
    projected, errors = [], []
    for m in mentions:
        first = first_at.get(m.start)
        last = last_at.get(m.end)
        if first is None or last is None:
            edge = "start" if first is None else "end"
            errors.append(
                AlignmentError(
                    UNALIGNED_MENTION,
                    f"{m.ne_type.value} mention [{m.start},{m.end}) {edge} "
                    "is not on a token boundary",
                    RAW_SIDE,
                    sentence_id,
                )
            )
            continue
        projected.append(
            TokenMention(first, last, m.ne_type, m.sub_type, m.eid, m.name)
        )
    return projected, errors


def align_sentence(
    annotated: Sentence, treebank: Sentence
) -> tuple[Sentence, list[AlignmentError]]:
    """Merge one ENAMEX sentence into its treebank counterpart.

    When the text itself cannot be aligned only that error is reported and
    the sentence is returned without mentions.
    """
    sid = treebank.sent_id
    try:
        amap = build_map(annotated.raw_text, treebank.tokens, sid)
    except AlignmentError as e:
        return replace(treebank, mentions=()), [e]
    projected, errors = project_mentions(annotated.mentions, amap, sid)
    return replace(treebank, mentions=tuple(projected)), errors


class SentenceCountMismatch(ValueError):
    pass


@dataclass
class AlignmentReport:
    errors: list[AlignmentError] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.errors

    def by_kind(self) -> dict[str, int]:
        counts = collections.Counter(e.kind for e in self.errors)
        return {k: counts.get(k, 0) for k in KINDS}

    def by_side(self) -> dict[str, int]:
        counts = collections.Counter(e.side for e in self.errors)
        return {k: counts.get(k, 0) for k in (RAW_SIDE, TOKEN_SIDE, EITHER_SIDE)}

    def records(self) -> str:
        return "".join(e.record() + "\n" for e in self.errors)

    def summary(self) -> str:
        lines = [f"{len(self.errors)} alignment error(s)"]
        lines += [f"  {k}: {v}" for k, v in self.by_kind().items()]
        lines += [f"  side {k}: {v}" for k, v in self.by_side().items()]
        return "\n".join(lines)


def align_corpus(
    annotated: Sequence[Sentence], treebank: Sequence[Sentence], workers: int = 1
) -> tuple[list[Sentence], AlignmentReport]:
    """Align two sentence-parallel corpora; output keeps input order."""
    if len(annotated) != len(treebank):
        raise SentenceCountMismatch(
            f"{len(annotated)} annotated sentences vs {len(treebank)} treebank sentences"
        )
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(align_sentence, annotated, treebank))
    else:
        results = [align_sentence(a, t) for a, t in zip(annotated, treebank)]
    report = AlignmentReport()
    merged = []
    for sentence, errors in results:
        merged.append(sentence)
        report.errors.extend(errors)
    return merged, report


def char_mentions(sentence: Sentence, amap: Optional[AlignmentMap] = None) -> list[Mention]:
    """Inverse projection: token mentions back to offsets in ``raw_text``."""
    if amap is None:
        amap = build_map(sentence.raw_text, sentence.tokens, sentence.sent_id)
    spans = {idx: (s, e) for s, e, idx in amap.entries}
    out = []
    for m in sentence.mentions:
        start = spans[m.first_token][0]
        end = spans[m.last_token][1]
        out.append(Mention(start, end, m.ne_type, m.sub_type, m.eid, m.name))
    return out
