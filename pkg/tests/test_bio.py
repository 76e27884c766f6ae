import random

import pytest
from hypothesis import given, settings, strategies as st

from ftbner import bio
from ftbner.bio import BioSequenceError, BioTag, decode, encode, is_valid
from ftbner.model import NeType, TokenMention

from generators import random_token_mentions


def tags(*names):
    return [BioTag.parse(n) for n in names]


def test_encode_single():
    m = TokenMention(2, 2, NeType.LOCATION)
    assert [str(t) for t in encode([m], 4)] == ["O", "B-Location", "O", "O"]


def test_encode_subtype():
    m = TokenMention(2, 3, NeType.LOCATION, "Country")
    assert [str(t) for t in encode([m], 4)] == [
        "O", "B-Location.Country", "I-Location.Country", "O"]


def test_encode_empty():
    assert [str(t) for t in encode([], 3)] == ["O"] * 3


def test_encode_refuses_overlap():
    with pytest.raises(ValueError):
        encode([TokenMention(1, 2, NeType.PERSON), TokenMention(2, 3, NeType.PERSON)], 4)


def test_decode_basic():
    (m,) = decode(tags("O", "B-Location", "I-Location", "O"))
    assert (m.first_token, m.last_token, m.ne_type) == (2, 3, NeType.LOCATION)


def test_decode_strict_orphan():
    with pytest.raises(BioSequenceError) as e:
        decode(["I-Person", "O"])
    assert e.value.position == 1


def test_decode_strict_label_change():
    with pytest.raises(BioSequenceError) as e:
        decode(["B-Person", "I-Location"])
    assert e.value.position == 2


def test_decode_repair_orphan():
    (m,) = decode(["I-Person", "O"], bio.REPAIR)
    assert (m.first_token, m.last_token, m.ne_type) == (1, 1, NeType.PERSON)
    assert [str(t) for t in encode([m], 2)] == ["B-Person", "O"]


def test_decode_repair_splits_label_change():
    a, b = decode(["B-Person", "I-Location", "I-Location"], bio.REPAIR)
    assert (a.first_token, a.last_token, a.ne_type) == (1, 1, NeType.PERSON)
    assert (b.first_token, b.last_token, b.ne_type) == (2, 3, NeType.LOCATION)


def test_adjacent_b_tags_are_separate_mentions():
    assert len(decode(["B-Person", "B-Person"])) == 2


def test_attributes_transported():
    (m,) = decode(["B-Location", "I-Location"], attributes=[("123", "Japan"), ("123", "Japan")])
    assert (m.eid, m.name) == ("123", "Japan")


def test_tag_syntax():
    assert BioTag.parse("I-Location.Country") == BioTag("I", "Location.Country")
    for bad in ("", "X-Person", "B-", "B", "O-Person"):
        with pytest.raises(ValueError):
            BioTag.parse(bad)


@settings(max_examples=300)
@given(st.randoms(use_true_random=False), st.integers(0, 15))
def test_decode_encode_roundtrip(rng, n):
    mentions = random_token_mentions(rng, n, with_attrs=False)
    assert decode(encode(mentions, n)) == mentions


TAG_POOL = ["O", "B-Person", "I-Person", "B-Location", "I-Location",
            "B-Location.Country", "I-Location.Country"]


@settings(max_examples=300)
@given(st.lists(st.sampled_from(TAG_POOL), max_size=12))
def test_repair_is_fixed_point(seq):
    repaired = decode(seq, bio.REPAIR)
    again = encode(repaired, len(seq))
    assert is_valid(again)
    assert decode(again) == repaired


def test_checker_agrees_with_strict_decode():
    rng = random.Random(0)
    for _ in range(10_000):
        seq = [rng.choice(TAG_POOL) for _ in range(rng.randint(0, 8))]
        try:
            decode(seq)
            strict_ok = True
        except BioSequenceError:
            strict_ok = False
        assert is_valid(seq) == strict_ok
