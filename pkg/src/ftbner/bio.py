"""BIO2 tag codec between token mentions and per-token tags.

Tag surface syntax is ``O``, ``B-Type`` or ``I-Type.Subtype``.  ``eid`` and
``name`` belong to mentions and never appear in tags.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .model import TokenMention, make_label, split_label

STRICT = "strict"
REPAIR = "repair"


@dataclass(frozen=True)
class BioTag:
    prefix: str
    label: Optional[str] = None

    def __post_init__(self):
        if self.prefix == "O":
            if self.label is not None:
                raise ValueError("O tag carries no label")
        elif self.prefix in ("B", "I"):
            if not self.label:
                raise ValueError(f"{self.prefix} tag needs a label")
        else:
            raise ValueError(f"bad BIO prefix {self.prefix!r}")

    @classmethod
    def parse(cls, text: str) -> "BioTag":
        if text == "O":
            return cls("O")
        prefix, sep, label = text.partition("-")
        if not sep or prefix not in ("B", "I") or not label:
            raise ValueError(f"malformed BIO tag {text!r}")
        return cls(prefix, label)

    def __str__(self) -> str:
        return "O" if self.prefix == "O" else f"{self.prefix}-{self.label}"


OUTSIDE = BioTag("O")
TagLike = Union[BioTag, str]


class BioSequenceError(ValueError):
    """Invalid transition; ``position`` is 1-based."""

    def __init__(self, position: int, previous: Optional[BioTag], tag: BioTag):
        prev = "start" if previous is None else str(previous)
        super().__init__(f"position {position}: {tag} cannot follow {prev}")
        self.position = position
        self.previous = previous
        self.tag = tag


def _as_tag(t: TagLike) -> BioTag:
    return t if isinstance(t, BioTag) else BioTag.parse(t)


def encode(mentions: Iterable[TokenMention], n_tokens: int) -> list[BioTag]:
    tags = [OUTSIDE] * n_tokens
    for m in sorted(mentions, key=lambda m: m.first_token):
        if m.last_token > n_tokens:
            raise ValueError(
                f"mention {m.first_token}..{m.last_token} exceeds {n_tokens} tokens"
            )
        span = range(m.first_token - 1, m.last_token)
        if any(tags[i] is not OUTSIDE for i in span):
            raise ValueError(f"overlapping mention at tokens {m.first_token}..{m.last_token}")
        label = make_label(m.ne_type, m.sub_type)
        tags[m.first_token - 1] = BioTag("B", label)
        for i in span[1:]:
            tags[i] = BioTag("I", label)
    return tags


def decode(
    tags: Sequence[TagLike],
    mode: str = STRICT,
    attributes: Optional[Sequence[tuple[Optional[str], Optional[str]]]] = None,
) -> list[TokenMention]:
    """Group maximal B-then-I runs into mentions.

    ``attributes`` optionally gives an ``(eid, name)`` pair per position; the
    pair at the first token of a run is attached to the mention.
    """
    if mode not in (STRICT, REPAIR):
        raise ValueError(f"unknown decode mode {mode!r}")
    spans: list[tuple[int, int, str]] = []
    prev: Optional[BioTag] = None
    for i, raw in enumerate(tags):
        tag = _as_tag(raw)
        if tag.prefix == "O":
            pass
        elif tag.prefix == "B":
            spans.append((i, i, tag.label))
        elif prev is not None and prev.prefix != "O" and prev.label == tag.label:
            start, _, label = spans[-1]
            spans[-1] = (start, i, label)
        elif mode == STRICT:
            raise BioSequenceError(i + 1, prev, tag)
        else:
            spans.append((i, i, tag.label))
        prev = tag
    mentions = []
    for start, end, label in spans:
        ne_type, sub_type = split_label(label)
        eid, name = attributes[start] if attributes is not None else (None, None)
        mentions.append(TokenMention(start + 1, end + 1, ne_type, sub_type, eid, name))
    return mentions


_VALID_RE = re.compile(r"(?:O\n|B-([^\n]+)\n(?:I-\1\n)*)*")


def is_valid(tags: Sequence[TagLike]) -> bool:
    """Regular-language check of BIO2 well-formedness (no decoding involved)."""
    text = "".join(f"{t}\n" for t in tags)
    return _VALID_RE.fullmatch(text) is not None
