from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from licvar._pykernels import _fnv1a
from licvar.errors import IncompatibleFingerprintError
from licvar.fingerprint import (
    DEFAULT_K,
    DEFAULT_W,
    FingerprintSet,
    fingerprint,
    matching_score,
    normalize,
    text_similarity,
    winnow,
)

from conftest import read_fixture


def naive_hashes(text: str, k: int) -> list[int]:
    return [_fnv1a(text[i:i + k].encode("utf-32-le")) for i in range(len(text) - k + 1)]


def naive_winnow(text: str, k: int, w: int) -> set[int]:
    hashes = naive_hashes(text, k)
    if not hashes:
        return set()
    if len(hashes) < w:
        return {min(hashes)}
    return {min(hashes[i:i + w]) for i in range(len(hashes) - w + 1)}


def fp(*sigs: int) -> FingerprintSet:
    return FingerprintSet(frozenset(sigs))


def test_fnv1a_reference_vectors():
    # published FNV-1a 64-bit test vectors
    assert _fnv1a(b"") == 0xCBF29CE484222325
    assert _fnv1a(b"a") == 0xAF63DC4C8601EC8C
    assert _fnv1a(b"foobar") == 0x85944171F73967E8


@pytest.mark.parametrize("raw,expected", [
    ("MIT  License.", "mit license"),
    ("", ""),
    ("A\u2014B", "a b"),
    ("  --Hello,\n\tWorld!! 2.0 ", "hello world 2 0"),
])
def test_normalize_examples(raw, expected):
    assert normalize(raw).text == expected


@given(st.text(max_size=300))
def test_normalize_properties(raw):
    n = normalize(raw)
    assert "  " not in n.text and n.text == n.text.strip()
    assert normalize(n.text).text == n.text
    assert len(n.offset_map) == len(n.text)
    assert list(n.offset_map) == sorted(n.offset_map)
    assert all(0 <= o < len(raw) for o in n.offset_map)
    kept = "".join(c for ch in raw if ch.isalnum() for c in ch.lower() if c.isalnum())
    assert n.text.replace(" ", "") == kept


def test_winnow_abcdabcd_oracle():
    got = winnow("abcdabcd", 4, 2).signatures
    assert got == naive_winnow("abcdabcd", 4, 2)
    assert got <= set(naive_hashes("abcdabcd", 4))


@given(st.text(alphabet="abcde fgh", max_size=200), st.integers(2, 9), st.integers(1, 6))
def test_winnow_matches_oracle(text, k, w):
    got = winnow(text, k, w).signatures
    assert got == naive_winnow(text, k, w)
    assert got <= set(naive_hashes(text, k))


def test_short_text_is_empty():
    assert len(winnow("abc", 4, 2)) == 0
    assert len(fingerprint("")) == 0


def test_winnow_rejects_bad_params():
    with pytest.raises(ValueError):
        winnow("abcdef", 1, 2)
    with pytest.raises(ValueError):
        winnow("abcdef", 4, 0)


def test_determinism():
    text = read_fixture("variants", "apache_trademark.txt")
    assert fingerprint(text) == fingerprint(text)
    assert fingerprint(text).params == (DEFAULT_K, DEFAULT_W)


def test_matching_score_examples():
    a = fp(1, 2, 3, 4)
    assert matching_score(a, a) == 1.0
    assert matching_score(fp(1, 2), fp(3, 4)) == 0.0
    assert matching_score(fp(1, 2, 3), fp(1, 2, 3, 4)) == 0.75
    assert matching_score(fp(), fp()) == 1.0


def test_matching_score_param_mismatch():
    with pytest.raises(IncompatibleFingerprintError):
        matching_score(FingerprintSet(frozenset({1}), 8, 4), FingerprintSet(frozenset({1}), 5, 4))


sig_sets = st.frozensets(st.integers(0, 40), max_size=20).map(FingerprintSet)


@given(sig_sets, sig_sets)
def test_score_bounds_symmetry(a, b):
    s = matching_score(a, b)
    assert 0.0 <= s <= 1.0
    assert s == matching_score(b, a)
    assert (s == 1.0) == (a.signatures == b.signatures)


def test_appending_a_sentence_moves_score_boundedly(kb):
    text = kb["Apache-2.0"].full_text
    extra = "You must also send a postcard to the original authors."
    a, b = fingerprint(text), fingerprint(text + "\n" + extra)
    new = b.signatures - a.signatures
    union = a.signatures | b.signatures
    assert matching_score(a, b) >= 1 - len(new) / len(union)
    assert matching_score(a, b) > 0.95


def test_variant_scores_stay_high(kb, variants):
    for v in variants:
        if v["matched"]:
            assert text_similarity(v["text"], kb[v["matched"]].full_text) > 0.6, v["file"]
