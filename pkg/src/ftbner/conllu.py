"""CoNLL-U reading/writing plus the 13-column variant carrying the NE layer.

The extended format appends three tab-separated columns to every token
line: BIO tag, entity id and normalized name (``_`` when absent).  Range
lines get ``_`` in all three.  The ten original columns pass through
untouched, so cutting columns 11-13 gives back the input file.
"""

from __future__ import annotations

import io
from dataclasses import replace
from typing import Iterable, Iterator, Optional, TextIO, Union

from . import bio
from .model import Sentence, Token, TokenMention, validate_mentions

N_COLUMNS = 10
N_EXTENDED = 13
EMPTY = "_"


class ConlluError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _lines(source: Union[str, TextIO, Iterable[str]]) -> Iterator[str]:
    if isinstance(source, str):
        source = io.StringIO(source)
    for line in source:
        yield line.rstrip("\n").rstrip("\r")


def _read_blocks(source, n_columns: int):
    """Yield (comments, rows, row_line_numbers, first_line) per sentence."""
    comments: list[str] = []
    rows: list[list[str]] = []
    numbers: list[int] = []
    first = 0
    for lineno, line in enumerate(_lines(source), 1):
        if not line.strip():
            if rows or comments:
                if not rows:
                    raise ConlluError("comment block without tokens", lineno)
                yield comments, rows, numbers, first
            comments, rows, numbers = [], [], []
            continue
        if not rows and not comments:
            first = lineno
        if line.startswith("#"):
            if rows:
                raise ConlluError("comment inside token block", lineno)
            comments.append(line)
            continue
        fields = line.split("\t")
        if len(fields) != n_columns:
            raise ConlluError(
                f"expected {n_columns} columns, found {len(fields)}", lineno
            )
        rows.append(fields)
        numbers.append(lineno)
    if rows:
        yield comments, rows, numbers, first
    elif comments:
        raise ConlluError("comment block without tokens", first)


def _build_sentence(comments, rows, numbers, ordinal) -> Sentence:
    sent_id = str(ordinal)
    raw_text = ""
    for c in comments:
        key, sep, value = c[1:].partition("=")
        if not sep:
            continue
        key = key.strip()
        if key == "sent_id":
            sent_id = value.strip()
        elif key == "text":
            raw_text = value[1:] if value.startswith(" ") else value
    tokens = []
    expected = 1
    range_end = 0
    for fields, lineno in zip(rows, numbers):
        ident = fields[0]
        upos = None if fields[3] == EMPTY else fields[3]
        cols = tuple(fields[:N_COLUMNS])
        if "." in ident:
            raise ConlluError(f"empty nodes are not supported ({ident})", lineno)
        if "-" in ident:
            a, _, b = ident.partition("-")
            try:
                lo, hi = int(a), int(b)
            except ValueError:
                raise ConlluError(f"bad range id {ident!r}", lineno) from None
            if lo != expected or hi < lo or range_end >= expected:
                raise ConlluError(f"range {ident} does not cover the following words", lineno)
            range_end = hi
            tokens.append(Token(lo, fields[1], upos, True, (lo, hi), cols))
            continue
        try:
            index = int(ident)
        except ValueError:
            raise ConlluError(f"bad token id {ident!r}", lineno) from None
        if index != expected:
            raise ConlluError(f"expected id {expected}, found {index}", lineno)
        if not fields[1]:
            raise ConlluError("empty form", lineno)
        tokens.append(Token(index, fields[1], upos, columns=cols))
        expected += 1
    if range_end >= expected:
        raise ConlluError(f"range ends at {range_end} beyond last word", numbers[-1])
    return Sentence(raw_text=raw_text, tokens=tuple(tokens), sent_id=sent_id,
                    comments=tuple(comments))


def parse_conllu(source) -> list[Sentence]:
    """Read standard 10-column CoNLL-U from a string, stream or line iterable."""
    return [
        _build_sentence(c, r, n, i)
        for i, (c, r, n, _) in enumerate(_read_blocks(source, N_COLUMNS), 1)
    ]


def parse_extended(source, mode: str = bio.STRICT) -> list[Sentence]:
    """Read the 13-column format; mentions come back as ``TokenMention``."""
    out = []
    for i, (comments, rows, numbers, _) in enumerate(_read_blocks(source, N_EXTENDED), 1):
        sentence = _build_sentence(comments, rows, numbers, i)
        tags, attrs, word_lines = [], [], []
        for fields, lineno in zip(rows, numbers):
            if "-" in fields[0]:
                if fields[10:] != [EMPTY] * 3:
                    raise ConlluError("range line must carry '_' NE columns", lineno)
                continue
            try:
                tags.append(bio.BioTag.parse(fields[10]))
            except ValueError as e:
                raise ConlluError(str(e), lineno) from None
            attrs.append(tuple(None if v == EMPTY else v for v in fields[11:13]))
            word_lines.append(lineno)
        try:
            mentions = bio.decode(tags, mode, attrs)
        except bio.BioSequenceError as e:
            raise ConlluError(str(e), word_lines[e.position - 1]) from None
        except ValueError as e:
            raise ConlluError(str(e), numbers[0]) from None
        out.append(replace(sentence, mentions=tuple(mentions)))
    return out


def token_columns(token: Token) -> tuple[str, ...]:
    if token.columns is not None:
        return token.columns
    if token.is_multiword_range:
        ident = f"{token.range_span[0]}-{token.range_span[1]}"
    else:
        ident = str(token.index)
    cols = [EMPTY] * N_COLUMNS
    cols[0], cols[1] = ident, token.form
    if token.upos:
        cols[3] = token.upos
    return tuple(cols)


def _check_field(value: str, what: str) -> str:
    if "\t" in value or "\n" in value or value in ("", EMPTY):
        raise ValueError(f"{what} {value!r} cannot be written as a column")
    return value


def ne_columns(sentence: Sentence) -> list[tuple[str, str, str]]:
    """NE columns for every word (range lines excluded)."""
    n = len(sentence.words)
    mentions = list(sentence.mentions)
    for m in mentions:
        if not isinstance(m, TokenMention):
            raise ValueError(
                f"sentence {sentence.sent_id}: mention [{m.start},{m.end}) "
                "is not on token boundaries"
            )
    problems = validate_mentions(sentence)
    if problems:
        raise ValueError(f"sentence {sentence.sent_id}: {problems[0]}")
    cols = [(str(t), EMPTY, EMPTY) for t in bio.encode(mentions, n)]
    for m in mentions:
        eid = _check_field(m.eid, "eid") if m.eid is not None else EMPTY
        name = _check_field(m.name, "name") if m.name is not None else EMPTY
        for i in range(m.first_token - 1, m.last_token):
            cols[i] = (cols[i][0], eid, name)
    return cols


def header(sentence: Sentence) -> list[str]:
    """Comment lines to write; built from sent_id and raw text when none were read."""
    if sentence.comments:
        return list(sentence.comments)
    lines = []
    if sentence.sent_id and "\n" not in sentence.sent_id:
        lines.append(f"# sent_id = {sentence.sent_id}")
    if sentence.raw_text and "\n" not in sentence.raw_text:
        lines.append(f"# text = {sentence.raw_text}")
    return lines


def format_extended(sentence: Sentence) -> str:
    ne = iter(ne_columns(sentence))
    lines = header(sentence)
    for tok in sentence.tokens:
        extra = (EMPTY,) * 3 if tok.is_multiword_range else next(ne)
        lines.append("\t".join(token_columns(tok) + extra))
    return "\n".join(lines) + "\n\n"


def emit_extended(sentences: Iterable[Sentence], stream: TextIO) -> None:
    for sentence in sentences:
        stream.write(format_extended(sentence))


def emit_conllu(sentences: Iterable[Sentence], stream: TextIO) -> None:
    for sentence in sentences:
        lines = header(sentence)
        lines.extend("\t".join(token_columns(t)) for t in sentence.tokens)
        stream.write("\n".join(lines) + "\n\n")


def read_extended(path, mode: str = bio.STRICT) -> list[Sentence]:
    with open(path, encoding="utf-8", newline="") as f:
        return parse_extended(f, mode)


def read_conllu(path) -> list[Sentence]:
    with open(path, encoding="utf-8", newline="") as f:
        return parse_conllu(f)


def read_any(path, mode: str = bio.STRICT) -> list[Sentence]:
    """Read either format, chosen by the column count of the first token line."""
    with open(path, encoding="utf-8", newline="") as f:
        text = f.read()
    for line in text.split("\n"):
        if line.strip() and not line.startswith("#"):
            if len(line.split("\t")) == N_EXTENDED:
                return parse_extended(text, mode)
            break
    return parse_conllu(text)


def write_extended(sentences: Iterable[Sentence], path: Optional[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        emit_extended(sentences, f)
