from __future__ import annotations

import pytest

from licvar.errors import ParseError, TransportError
from licvar.gateway import CountingBackend, Gateway, MockReasoner
from licvar.model import ALL_KINDS, Provenance, TermKind, restrictiveness_max
from licvar.parser import ParseResult, ParserConfig, parse, parse_baseline
from licvar.textproc import segment

from conftest import read_fixture

K = TermKind


class Unreachable(CountingBackend):
    def __init__(self, fail_after: int = 0):
        super().__init__("unreachable")
        self.inner = None
        self.fail_after = fail_after

    def _complete(self, task, prompt, request):
        if self.call_counter > self.fail_after:
            raise TransportError("connection refused", attempts=5)
        return self.inner.complete(task, prompt, request)


def fresh(kb) -> Gateway:
    return Gateway(MockReasoner(kb), kb.default_embedder())


def test_config_validation():
    with pytest.raises(ValueError):
        ParserConfig(similarity_threshold=1.5)
    with pytest.raises(ValueError):
        ParserConfig(retrieval_k=0)


def test_verbatim_apache_is_pure_reuse(kb):
    result = parse(kb["Apache-2.0"].full_text, kb, gateway=fresh(kb))
    assert result.matched_id == "Apache-2.0"
    assert result.model_sentence_count == 0 and result.model_calls == 0
    assert result.term_vector.same_terms(kb["Apache-2.0"].term_vector)
    assert set(result.term_vector.provenance.values()) == {Provenance.KB_REUSE}


@pytest.mark.parametrize("name", ["apache_trademark.txt", "apache_llvm.txt", "mit_have_fun.txt",
                                  "mit_copyright.txt", "bsd3_noncommercial.txt",
                                  "bsd3_proprietary.txt", "gpl3_linking_exception.txt",
                                  "gpl2_classpath.txt", "mpl_rewrapped.txt"])
def test_variant_expectations(kb, variants, name):
    v = next(e for e in variants if e["file"] == name)
    gw = fresh(kb)
    result = parse(v["text"], kb, gateway=gw)
    assert result.matched_id == v["matched"]
    assert list(result.model_sentences) == v["rewritten"]
    assert result.model_calls == gw.call_counter
    expected = dict(kb[v["matched"]].term_vector.values)
    for kind, value in v["changed"].items():
        expected[K(kind)] = tuple(value) if isinstance(value, list) else value
    assert dict(result.term_vector.values) == expected
    assert result.reused_sentence_count + result.model_sentence_count == result.sentence_count


def test_apache_trademark_variant(kb):
    result = parse(read_fixture("variants", "apache_trademark.txt"), kb, gateway=fresh(kb))
    assert result.term_vector[K.TRADEMARK_LIMITATION] == 1
    assert result.model_sentence_count == 3
    untouched = [k for k in ALL_KINDS if k is not K.TRADEMARK_LIMITATION]
    assert all(result.term_vector.provenance[k] is Provenance.KB_REUSE for k in untouched)


def test_custom_proprietary_text(kb):
    result = parse(read_fixture("variants", "nvidia_custom.txt"), kb, gateway=fresh(kb))
    assert result.matched_standard is None
    assert result.best_similarity < 0.9
    assert result.term_vector[K.COPYRIGHT] == 0
    assert result.model_sentence_count == result.sentence_count


def test_reuse_soundness(kb, variants):
    for v in variants:
        result = parse(v["text"], kb, gateway=fresh(kb))
        if result.matched_standard is None:
            assert result.reused_pairs == ()
            continue
        cand = segment(v["text"])
        std = kb[result.matched_id].sentences
        for i, j in result.reused_pairs:
            assert cand[i].normalized == std[j].unit.normalized


def test_conflicts_resolve_to_the_maximum(kb, variants):
    seen = 0
    for v in variants:
        for c in parse(v["text"], kb, gateway=fresh(kb)).conflicts:
            assert c.resolved == restrictiveness_max(c.kind, c.reused, c.inferred)
            seen += 1
    assert seen > 0


def test_determinism(kb, variants):
    for v in variants[:4]:
        a = parse(v["text"], kb, gateway=fresh(kb))
        b = parse(v["text"], kb, gateway=fresh(kb))
        assert a.to_json_dict() == b.to_json_dict()


def test_threshold_extremes(kb):
    text = read_fixture("variants", "apache_trademark.txt")
    strict = parse(text, kb, ParserConfig(similarity_threshold=1.0), fresh(kb))
    assert strict.matched_standard is None
    assert strict.model_sentence_count == strict.sentence_count
    custom = read_fixture("variants", "nvidia_custom.txt")
    loose = parse(custom, kb, ParserConfig(similarity_threshold=0.0), fresh(kb))
    assert loose.matched_standard is not None


def test_baseline_never_reuses(kb):
    text = kb["Apache-2.0"].full_text
    base = parse_baseline(text, gateway=fresh(kb), kb=kb)
    assert base.model_sentence_count == base.sentence_count > 0
    assert base.reused_sentence_count == 0 and base.matched_standard is None


def test_baseline_costs_more_per_license(kb, variants):
    for v in variants:
        if v["matched"] is None:
            continue
        ours = parse(v["text"], kb, gateway=fresh(kb)).model_calls
        base = parse_baseline(v["text"], gateway=fresh(kb), kb=kb).model_calls
        assert base > ours, v["file"]


def test_transport_failure_carries_partial(kb):
    backend = Unreachable(fail_after=1)
    backend.inner = MockReasoner(kb)
    gw = Gateway(backend, kb.default_embedder())
    with pytest.raises(ParseError) as err:
        parse(read_fixture("variants", "apache_trademark.txt"), kb, gateway=gw)
    partial = err.value.partial
    assert isinstance(partial, ParseResult)
    assert partial.matched_id == "Apache-2.0"
    with pytest.raises(ParseError):
        parse_baseline("Some text.", gateway=Gateway(Unreachable()))


def test_empty_text_rejected(kb):
    with pytest.raises(ValueError):
        parse("   ", kb)


def test_json_round_trip(kb):
    result = parse(read_fixture("variants", "bsd3_noncommercial.txt"), kb, gateway=fresh(kb))
    again = ParseResult.from_json_dict(result.to_json_dict())
    assert again.to_json_dict() == result.to_json_dict()
    assert again.term_vector == result.term_vector
