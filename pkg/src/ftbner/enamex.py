"""Inline ENAMEX markup <-> raw text with stand-off mentions.

Input is one sentence per line.  Only ``&amp; &lt; &gt; &quot;`` and numeric
character references are decoded; anything else after ``&`` is a syntax
error, as is a bare ``<`` that does not open or close an ENAMEX element.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .model import (
    Mention,
    NeType,
    Sentence,
    UnknownTypeError,
    Violation,
    normalize_eid,
    validate_mentions,
)

_NAMED_ENTITIES = {"amp": "&", "lt": "<", "gt": ">", "quot": '"'}
_ENTITY_RE = re.compile(r"&(?:#([0-9]+)|#[xX]([0-9a-fA-F]+)|([A-Za-z]+));")
_OPEN_RE = re.compile(r"<ENAMEX((?:\s+[^\s=>]+\s*=\s*(?:\"[^\"]*\"|'[^']*'))*)\s*>")
_ATTR_RE = re.compile(r"\s+([^\s=>]+)\s*=\s*(?:\"([^\"]*)\"|'([^']*)')")
_CLOSE = "</ENAMEX>"
ATTRIBUTE_ORDER = ("type", "sub_type", "eid", "name")


class EnamexSyntaxError(ValueError):
    """Malformed markup; ``line`` and ``column`` are 1-based."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class EnamexTypeError(EnamexSyntaxError):
    def __init__(self, value: str, line: int, column: int):
        super().__init__(f"unknown ENAMEX type {value!r}", line, column)
        self.value = value


class SerializationError(ValueError):
    def __init__(self, message: str, violations: tuple[Violation, ...] = ()):
        super().__init__(message)
        self.violations = violations


@dataclass(frozen=True)
class EnamexDocument:
    sentences: tuple[Sentence, ...] = ()


def _decode(text: str, line: int, col0: int) -> str:
    out = []
    pos = 0
    while True:
        amp = text.find("&", pos)
        if amp < 0:
            out.append(text[pos:])
            return "".join(out)
        out.append(text[pos:amp])
        m = _ENTITY_RE.match(text, amp)
        if m is None:
            raise EnamexSyntaxError("unescaped '&'", line, col0 + amp + 1)
        dec, hexa, name = m.groups()
        if name is not None:
            if name not in _NAMED_ENTITIES:
                raise EnamexSyntaxError(f"unknown entity '&{name};'", line, col0 + amp + 1)
            out.append(_NAMED_ENTITIES[name])
        else:
            try:
                out.append(chr(int(dec) if dec is not None else int(hexa, 16)))
            except (ValueError, OverflowError):
                raise EnamexSyntaxError(
                    f"invalid character reference {m.group(0)!r}", line, col0 + amp + 1
                ) from None
        pos = m.end()


def _check_text(text: str, line: int, col0: int) -> str:
    lt = text.find("<")
    if lt >= 0:
        raise EnamexSyntaxError("unexpected '<'", line, col0 + lt + 1)
    return _decode(text, line, col0)


def _parse_attributes(blob: str, line: int, column: int) -> dict[str, str]:
    attrs: dict[str, str] = {}
    for m in _ATTR_RE.finditer(blob):
        key = m.group(1)
        if key in attrs:
            raise EnamexSyntaxError(f"duplicate attribute {key!r}", line, column)
        value = m.group(2) if m.group(2) is not None else m.group(3)
        attrs[key] = _check_text(value, line, column - 1)
    return attrs


def parse_sentence(line_text: str, line: int = 1) -> Sentence:
    """Parse one line of ENAMEX-annotated text."""
    raw: list[str] = []
    length = 0
    mentions = []
    pos = 0
    while pos < len(line_text):
        lt = line_text.find("<", pos)
        if lt < 0:
            lt = len(line_text)
        chunk = _check_text(line_text[pos:lt], line, pos)
        raw.append(chunk)
        length += len(chunk)
        if lt == len(line_text):
            break
        if line_text.startswith(_CLOSE, lt):
            raise EnamexSyntaxError("closing tag without opening tag", line, lt + 1)
        m = _OPEN_RE.match(line_text, lt)
        if m is None:
            raise EnamexSyntaxError("malformed or unknown element", line, lt + 1)
        attrs = _parse_attributes(m.group(1), line, lt + 1)
        if "type" not in attrs:
            raise EnamexSyntaxError("ENAMEX element without type", line, lt + 1)
        try:
            ne_type = NeType.parse(attrs["type"])
        except UnknownTypeError:
            raise EnamexTypeError(attrs["type"], line, lt + 1) from None
        body_start = m.end()
        close = line_text.find(_CLOSE, body_start)
        inner_open = line_text.find("<ENAMEX", body_start)
        if close < 0:
            raise EnamexSyntaxError("unclosed ENAMEX element", line, lt + 1)
        if 0 <= inner_open < close:
            raise EnamexSyntaxError("nested ENAMEX element", line, inner_open + 1)
        content = _check_text(line_text[body_start:close], line, body_start)
        if not content:
            raise EnamexSyntaxError("empty ENAMEX element", line, lt + 1)
        mentions.append(
            Mention(
                start=length,
                end=length + len(content),
                ne_type=ne_type,
                sub_type=attrs.get("sub_type") or None,
                eid=normalize_eid(attrs.get("eid")),
                name=attrs.get("name"),
            )
        )
        raw.append(content)
        length += len(content)
        pos = close + len(_CLOSE)
    return Sentence(raw_text="".join(raw), mentions=tuple(mentions), sent_id=str(line))


def parse_enamex(xml_text: str) -> EnamexDocument:
    lines = xml_text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return EnamexDocument(
        tuple(parse_sentence(text.rstrip("\r"), i) for i, text in enumerate(lines, 1))
    )


def escape_text(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def escape_attribute(text: str) -> str:
    return escape_text(text).replace('"', "&quot;")


def serialize_sentence(sentence: Sentence) -> str:
    violations = validate_mentions(sentence)
    if violations:
        raise SerializationError(
            f"sentence {sentence.sent_id}: " + "; ".join(map(str, violations)),
            tuple(violations),
        )
    if "\n" in sentence.raw_text:
        raise SerializationError(f"sentence {sentence.sent_id}: embedded newline")
    text = sentence.raw_text
    out = []
    pos = 0
    for m in sorted(sentence.mentions, key=lambda m: m.start):
        out.append(escape_text(text[pos:m.start]))
        values: dict[str, Optional[str]] = {
            "type": m.ne_type.value,
            "sub_type": m.sub_type,
            "eid": m.eid,
            "name": m.name,
        }
        attrs = "".join(
            f' {key}="{escape_attribute(values[key])}"'
            for key in ATTRIBUTE_ORDER
            if values[key] is not None
        )
        out.append(f"<ENAMEX{attrs}>{escape_text(text[m.start:m.end])}{_CLOSE}")
        pos = m.end
    out.append(escape_text(text[pos:]))
    return "".join(out)


def serialize_enamex(doc: EnamexDocument) -> str:
    """Inverse of :func:`parse_enamex`; sentences are joined by newlines.

    Absent ``eid`` is omitted rather than written as ``null`` so that the
    round trip is exact.
    """
    return "\n".join(serialize_sentence(s) for s in doc.sentences)
