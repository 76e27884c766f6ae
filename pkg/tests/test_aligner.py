import random

import pytest
from hypothesis import given, settings, strategies as st

from ftbner import aligner
from ftbner.aligner import AlignmentError, align_corpus, build_map, project_mentions
from ftbner.enamex import parse_enamex
from ftbner.model import Mention, NeType, Sentence, Token
from ftbner.synthetic import make_sentence

import fuzz


def toks(*forms):
    return [Token(i, f) for i, f in enumerate(forms, 1)]


def spans(amap):
    return [(a, b) for a, b, _ in amap.entries]


def test_whitespace_tokenization():
    amap = build_map("Le Japon signe .", toks("Le", "Japon", "signe", "."))
    assert spans(amap) == [(0, 2), (3, 8), (9, 14), (15, 16)]


def test_case_insensitive():
    assert spans(build_map("États-Unis", toks("ÉTATS-UNIS"))) == [(0, 10)]


def test_punctuation_without_whitespace():
    assert spans(build_map("A, B", toks("A", ",", "B"))) == [(0, 1), (1, 2), (3, 4)]


def test_mismatch_names_both_sides():
    with pytest.raises(AlignmentError) as e:
        build_map("A; B", toks("A", ",", "B"), "s1")
    err = e.value
    assert err.kind == aligner.TEXT_MISMATCH
    assert "';'" in err.detail and "','" in err.detail
    assert err.record().startswith("s1\ttext_mismatch\t")


def test_nbsp_is_whitespace():
    assert spans(build_map("prix : 5", toks("prix", ":", "5"))) == [(0, 4), (5, 6), (7, 8)]


def test_no_diacritic_folding():
    with pytest.raises(AlignmentError):
        build_map("Etats", toks("États"))


def test_leftover_raw_text():
    with pytest.raises(AlignmentError) as e:
        build_map("a b c", toks("a", "b"))
    assert e.value.kind == aligner.UNALIGNED_TOKEN
    assert e.value.side == aligner.RAW_SIDE


def test_leftover_tokens():
    with pytest.raises(AlignmentError) as e:
        build_map("a b", toks("a", "b", "c"))
    assert e.value.kind == aligner.UNALIGNED_TOKEN
    assert e.value.side == aligner.TOKEN_SIDE


def test_token_with_internal_space():
    assert spans(build_map("10 000 euros", toks("10 000", "euros"))) == [(0, 6), (7, 12)]


def test_multiword_range_shares_span():
    tokens = [Token(1, "Il"), Token(2, "du", None, True, (2, 3)), Token(2, "de"), Token(3, "le"),
              Token(4, "pain")]
    amap = build_map("Il du pain", tokens)
    assert amap.entries == ((0, 2, 1), (3, 5, 2), (3, 5, 3), (6, 10, 4))
    (m,), errors = project_mentions([Mention(3, 10, NeType.PRODUCT)], amap)
    assert (m.first_token, m.last_token) == (2, 4) and not errors
    _, errors = project_mentions([Mention(4, 10, NeType.PRODUCT)], amap)
    assert errors[0].kind == aligner.UNALIGNED_MENTION


LE_JAPON = build_map("Le Japon signe .", toks("Le", "Japon", "signe", "."))


def test_project_single_token():
    (m,), errors = project_mentions([Mention(3, 8, NeType.LOCATION)], LE_JAPON)
    assert (m.first_token, m.last_token) == (2, 2) and errors == []


def test_project_two_tokens():
    (m,), _ = project_mentions([Mention(3, 14, NeType.LOCATION)], LE_JAPON)
    assert (m.first_token, m.last_token) == (2, 3)


def test_project_mid_token():
    projected, errors = project_mentions([Mention(4, 8, NeType.LOCATION)], LE_JAPON, "s9")
    assert projected == []
    assert errors[0].kind == aligner.UNALIGNED_MENTION and errors[0].sentence_id == "s9"


def test_projection_keeps_attributes():
    m = Mention(3, 8, NeType.LOCATION, "Country", "2000000001861060", "Japan")
    (tm,), _ = project_mentions([m], LE_JAPON)
    assert (tm.sub_type, tm.eid, tm.name) == ("Country", "2000000001861060", "Japan")


def _clean_pair():
    doc = parse_enamex(
        'Le <ENAMEX type="Location">Japon</ENAMEX> signe.\n'
        'La <ENAMEX type="Organization">CFDT</ENAMEX>, elle, proteste.\n'
        '<ENAMEX type="Person">Jacques Chirac</ENAMEX> parle.\n'
    )
    tb = [make_sentence(["Le", "Japon", "signe", "."], sent_id="a"),
          make_sentence(["La", "CFDT", ",", "elle", ",", "proteste", "."], sent_id="b"),
          make_sentence(["Jacques", "Chirac", "parle", "."], sent_id="c")]
    return doc.sentences, tb


def test_clean_corpus():
    ann, tb = _clean_pair()
    merged, report = align_corpus(ann, tb)
    assert report.clean
    assert [len(s.mentions) for s in merged] == [1, 1, 1]
    assert (merged[2].mentions[0].first_token, merged[2].mentions[0].last_token) == (1, 2)


def test_one_missing_comma():
    ann, tb = _clean_pair()
    broken = ann[1].raw_text.replace(",", "", 1)
    ann = list(ann)
    ann[1] = Sentence(broken, mentions=ann[1].mentions, sent_id="2")
    merged, report = align_corpus(ann, tb)
    assert len(report.errors) == 1
    assert report.errors[0].kind == aligner.TEXT_MISMATCH
    assert report.errors[0].sentence_id == "b"
    assert report.by_kind()[aligner.TEXT_MISMATCH] == 1
    # other sentences unaffected
    clean, _ = align_corpus(*_clean_pair())
    assert merged[0] == clean[0] and merged[2] == clean[2]
    assert merged[1].mentions == ()


def test_sentence_count_mismatch():
    ann, tb = _clean_pair()
    with pytest.raises(aligner.SentenceCountMismatch):
        align_corpus(ann, tb[:2])


def test_threads_give_same_result():
    rng = random.Random(5)
    ann, tb = fuzz.corpus(rng, 50)
    assert align_corpus(ann, tb, workers=4) == align_corpus(ann, tb)


def test_report_rendering():
    ann, tb = _clean_pair()
    ann = list(ann)
    ann[0] = Sentence("Le Japon signe ! !", mentions=ann[0].mentions, sent_id="1")
    _, report = align_corpus(ann, tb)
    assert report.records().count("\n") == 1
    assert "text_mismatch: 1" in report.summary()


def test_char_mentions_inverse():
    ann, tb = _clean_pair()
    merged, _ = align_corpus(ann, tb)
    for a, s in zip(ann, merged):
        s = Sentence(a.raw_text, s.tokens, s.mentions, s.sent_id)
        assert aligner.char_mentions(s) == list(a.mentions)


@settings(max_examples=200)
@given(st.randoms(use_true_random=False))
def test_fuzz_roundtrip(rng):
    ann, tb = fuzz.corpus(rng, 3)
    merged, report = align_corpus(ann, tb)
    assert report.clean
    assert [len(s.mentions) for s in merged] == [len(a.mentions) for a in ann]


@settings(max_examples=100)
@given(st.randoms(use_true_random=False))
def test_reconstruction_and_determinism(rng):
    ann, tb = fuzz.corpus(rng, 1)
    raw, tokens = ann[0].raw_text, tb[0].tokens
    a = build_map(raw, tokens)
    assert a == build_map(raw, tokens)
    folded = "".join(aligner.simple_fold(c) for c in raw if not c.isspace())
    assert folded == "".join(aligner.simple_fold(c) for t in tokens for c in t.form)
    assert "".join(raw[s:e] for s, e, _ in a.entries).replace(" ", "") == \
        "".join(c for c in raw if not c.isspace())


def test_error_isolation():
    rng = random.Random(11)
    ann, tb = fuzz.corpus(rng, 20)
    clean, _ = align_corpus(ann, tb)
    for k in (0, 7, 19):
        bad = fuzz.corrupt(rng, ann, k)
        merged, report = align_corpus(bad, tb)
        assert len(report.errors) == 1
        assert all(merged[i] == clean[i] for i in range(len(clean)) if i != k)
