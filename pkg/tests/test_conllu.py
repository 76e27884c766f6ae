import io
import random

import pytest
from hypothesis import given, settings, strategies as st

from ftbner import bio
from ftbner.conllu import (
    ConlluError,
    emit_conllu,
    emit_extended,
    parse_conllu,
    parse_extended,
)
from ftbner.model import NeType, TokenMention

from generators import random_treebank


def row(i, form, upos="_", extra=()):
    cols = [str(i), form, form.lower(), upos, "_", "_", "0", "root", "_", "_", *extra]
    return "\t".join(cols)


LE_JAPON = "\n".join([
    "# sent_id = fr-1",
    "# text = Le Japon signe .",
    row(1, "Le", "DET"),
    row(2, "Japon", "PROPN"),
    row(3, "signe", "VERB"),
    row(4, ".", "PUNCT"),
]) + "\n\n"


def test_parse_two_tokens():
    text = row(1, "Le") + "\n" + row(2, "Japon") + "\n\n"
    (s,) = parse_conllu(text)
    assert s.forms == ["Le", "Japon"]
    assert s.sent_id == "1"


def test_sent_id_and_text_comments():
    (s,) = parse_conllu(LE_JAPON)
    assert s.sent_id == "fr-1"
    assert s.raw_text == "Le Japon signe ."
    assert s.words[1].upos == "PROPN"


def test_multiword_range():
    text = "\n".join([row(1, "Il"), row(2, "parle"), row(3, "de"),
                      "4-5\tdu\t_\t_\t_\t_\t_\t_\t_\t_", row(4, "de"), row(5, "le"), row(6, "pays")])
    (s,) = parse_conllu(text)
    rng = [t for t in s.tokens if t.is_multiword_range]
    assert len(rng) == 1 and rng[0].range_span == (4, 5) and rng[0].form == "du"
    assert s.forms == ["Il", "parle", "de", "de", "le", "pays"]


def test_missing_final_blank_line():
    text = row(1, "a") + "\n\n" + row(1, "b")
    assert [s.forms for s in parse_conllu(text)] == [["a"], ["b"]]


@pytest.mark.parametrize("text,line", [
    (row(1, "a") + "\tEXTRA\n", 1),
    (row(1, "a") + "\n" + row(3, "b") + "\n", 2),
    ("1-2\tdu\t_\t_\t_\t_\t_\t_\t_\t_\n" + row(1, "de") + "\n", 2),
    (row(1, "a") + "\n2-3\tdu\t_\t_\t_\t_\t_\t_\t_\t_\n" + row(2, "de") + "\n", 3),
])
def test_parse_errors(text, line):
    with pytest.raises(ConlluError) as e:
        parse_conllu(text)
    assert e.value.line == line


def japon_sentence():
    (s,) = parse_conllu(LE_JAPON)
    m = TokenMention(2, 2, NeType.LOCATION, "Country", "2000000001861060", "Japan")
    return s.__class__(s.raw_text, s.tokens, (m,), s.sent_id, s.comments)


def ne_cols(text):
    return [tuple(line.split("\t")[10:]) for line in text.splitlines()
            if line and not line.startswith("#")]


def test_emit_japon():
    out = io.StringIO()
    emit_extended([japon_sentence()], out)
    assert ne_cols(out.getvalue()) == [
        ("O", "_", "_"),
        ("B-Location.Country", "2000000001861060", "Japan"),
        ("O", "_", "_"),
        ("O", "_", "_"),
    ]


def test_emit_no_mentions():
    out = io.StringIO()
    emit_extended(parse_conllu(LE_JAPON), out)
    assert set(ne_cols(out.getvalue())) == {("O", "_", "_")}


def test_emit_multi_token_mention_repeats_attributes():
    (s,) = parse_conllu(LE_JAPON)
    m = TokenMention(2, 4, NeType.PRODUCT, None, "77", "Thing")
    s = s.__class__(s.raw_text, s.tokens, (m,), s.sent_id, s.comments)
    out = io.StringIO()
    emit_extended([s], out)
    assert ne_cols(out.getvalue())[1:] == [
        ("B-Product", "77", "Thing"), ("I-Product", "77", "Thing"), ("I-Product", "77", "Thing")]
    assert parse_extended(out.getvalue())[0].mentions == (m,)


def test_emit_refuses_char_mentions():
    from ftbner.model import Mention
    (s,) = parse_conllu(LE_JAPON)
    s = s.__class__(s.raw_text, s.tokens, (Mention(3, 8, NeType.LOCATION),), s.sent_id, s.comments)
    with pytest.raises(ValueError):
        emit_extended([s], io.StringIO())


def test_parse_extended_japon():
    out = io.StringIO()
    emit_extended([japon_sentence()], out)
    (s,) = parse_extended(out.getvalue())
    assert s.mentions == japon_sentence().mentions


def test_parse_extended_all_outside():
    out = io.StringIO()
    emit_extended(parse_conllu(LE_JAPON), out)
    assert parse_extended(out.getvalue())[0].mentions == ()


def test_parse_extended_strict_orphan_line():
    out = io.StringIO()
    emit_extended(parse_conllu(LE_JAPON), out)
    lines = out.getvalue().split("\n")
    lines[4] = lines[4].rsplit("\t", 3)[0] + "\tI-Location\t_\t_"
    text = "\n".join(lines)
    with pytest.raises(ConlluError) as e:
        parse_extended(text)
    assert e.value.line == 5
    (s,) = parse_extended(text, bio.REPAIR)
    assert [(m.first_token, m.ne_type) for m in s.mentions] == [(3, NeType.LOCATION)]


def _roundtrip_checks(corpus):
    out = io.StringIO()
    emit_extended(corpus, out)
    text = out.getvalue()
    assert parse_extended(text) == corpus
    plain = io.StringIO()
    emit_conllu(corpus, plain)
    stripped = "\n".join(
        "\t".join(line.split("\t")[:10]) if line and not line.startswith("#") else line
        for line in text.split("\n")
    )
    assert stripped == plain.getvalue()
    assert parse_conllu(plain.getvalue()) == [s.__class__(s.raw_text, s.tokens, (), s.sent_id)
                                             for s in corpus]


@settings(max_examples=100)
@given(st.randoms(use_true_random=False))
def test_roundtrip_and_projection(rng):
    _roundtrip_checks(random_treebank(rng))


def test_range_lines_get_blank_ne_columns():
    rng = random.Random(3)
    corpus = random_treebank(rng, 30)
    out = io.StringIO()
    emit_extended(corpus, out)
    for line in out.getvalue().splitlines():
        if line and not line.startswith("#") and "-" in line.split("\t")[0]:
            assert line.split("\t")[10:] == ["_", "_", "_"]
