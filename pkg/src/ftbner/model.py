"""Core data model: entity types, mentions, tokens and sentences.

Character offsets count Unicode code points of the raw sentence text
(Python ``str`` indices), never bytes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union


class NeType(enum.Enum):
    PERSON = "Person"
    LOCATION = "Location"
    ORGANIZATION = "Organization"
    COMPANY = "Company"
    PRODUCT = "Product"
    POI = "POI"
    FICTION_CHAR = "FictionChar"

    @classmethod
    def parse(cls, name: str) -> "NeType":
        try:
            return cls(name)
        except ValueError:
            raise UnknownTypeError(name) from None

    def __str__(self) -> str:
        return self.value


class UnknownTypeError(ValueError):
    def __init__(self, name: str):
        super().__init__(f"unknown named-entity type {name!r}")
        self.name = name


def normalize_eid(eid: Optional[str]) -> Optional[str]:
    """Map the database's ``null`` marker (and empty values) to ``None``."""
    if eid is None or eid == "" or eid == "null":
        return None
    return eid


@dataclass(frozen=True)
class Mention:
    """A character-offset mention; ``end`` is exclusive."""

    start: int
    end: int
    ne_type: NeType
    sub_type: Optional[str] = None
    eid: Optional[str] = None
    name: Optional[str] = None

    def __post_init__(self):
        if self.start >= self.end:
            raise ValueError(f"empty or inverted span [{self.start},{self.end})")
        if self.start < 0:
            raise ValueError(f"negative offset {self.start}")

    @property
    def label(self) -> str:
        return make_label(self.ne_type, self.sub_type)


@dataclass(frozen=True)
class TokenMention:
    """A mention over 1-based word indices, both ends inclusive."""

    first_token: int
    last_token: int
    ne_type: NeType
    sub_type: Optional[str] = None
    eid: Optional[str] = None
    name: Optional[str] = None

    def __post_init__(self):
        if self.first_token > self.last_token:
            raise ValueError(
                f"inverted token span {self.first_token}..{self.last_token}"
            )
        if self.first_token < 1:
            raise ValueError("token indices are 1-based")

    @property
    def label(self) -> str:
        return make_label(self.ne_type, self.sub_type)

    @property
    def start(self) -> int:
        return self.first_token

    @property
    def end(self) -> int:
        # exclusive end so both mention kinds share the overlap logic
        return self.last_token + 1


AnyMention = Union[Mention, TokenMention]


def make_label(ne_type: NeType, sub_type: Optional[str]) -> str:
    if sub_type:
        return f"{ne_type.value}.{sub_type}"
    return ne_type.value


def split_label(label: str) -> tuple[NeType, Optional[str]]:
    base, _, sub = label.partition(".")
    return NeType.parse(base), (sub or None)


@dataclass(frozen=True)
class Token:
    """One CoNLL-U line (word or multiword range).

    ``columns`` keeps the ten original fields verbatim so that files can be
    re-emitted byte-exactly.  For range lines ``index`` is the first covered
    word id.
    """

    index: int
    form: str
    upos: Optional[str] = None
    is_multiword_range: bool = False
    range_span: Optional[tuple[int, int]] = None
    columns: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if not self.form:
            raise ValueError("token form must be non-empty")
        if self.is_multiword_range != (self.range_span is not None):
            raise ValueError("range_span must be set exactly for range tokens")


@dataclass(frozen=True)
class Sentence:
    raw_text: str = ""
    tokens: tuple[Token, ...] = ()
    mentions: tuple[AnyMention, ...] = ()
    sent_id: str = ""
    comments: tuple[str, ...] = field(default=(), compare=False)

    @property
    def words(self) -> tuple[Token, ...]:
        """Syntactic words, i.e. tokens minus multiword range lines."""
        return tuple(t for t in self.tokens if not t.is_multiword_range)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens if not t.is_multiword_range]


@dataclass(frozen=True)
class Violation:
    kind: str  # "overlap", "nesting" or "out_of_bounds"
    first: AnyMention
    second: Optional[AnyMention] = None

    def __str__(self) -> str:
        if self.second is None:
            return f"{self.kind}: [{self.first.start},{self.first.end})"
        return (
            f"{self.kind}: [{self.first.start},{self.first.end}) and "
            f"[{self.second.start},{self.second.end})"
        )


def validate_mentions(
    sentence: Sentence, mentions: Optional[Sequence[AnyMention]] = None
) -> list[Violation]:
    """Return every overlap, nesting or out-of-bounds problem; empty means ok.

    Bounds are checked against ``raw_text`` for character mentions and
    against the word count for token mentions (when tokens are present).
    """
    if mentions is None:
        mentions = sentence.mentions
    violations = []
    n_words = len(sentence.words)
    for m in mentions:
        if isinstance(m, TokenMention):
            if n_words and m.last_token > n_words:
                violations.append(Violation("out_of_bounds", m))
        elif m.end > len(sentence.raw_text):
            violations.append(Violation("out_of_bounds", m))
    ordered = sorted(mentions, key=lambda m: (m.start, -m.end))
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if b.start >= a.end:
                break
            if b.end <= a.end:
                violations.append(Violation("nesting", a, b))
            else:
                violations.append(Violation("overlap", a, b))
    return violations
