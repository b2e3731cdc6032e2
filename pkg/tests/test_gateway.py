from __future__ import annotations

import json

import httpx
import numpy as np
import pytest

from licvar.errors import BackendError, ProtocolError, TransportError
from licvar.gateway import (
    ClassificationRequest,
    ComponentKind,
    CountingBackend,
    Gateway,
    MockReasoner,
    NgramEmbedder,
    RemoteConfig,
    RemoteEmbedder,
    RemoteReasoner,
    TermExample,
    ValuationRequest,
    cosine,
    embedding_backend,
)
from licvar.gateway.protocol import (
    ReplyFormatError,
    SegmentationRequest,
    classification_prompt,
    parse_labels,
    parse_segments,
    parse_value,
    render_labels,
    render_value,
    term_definitions,
    valuation_prompt,
)
from licvar.kb import retrieve_term_examples
from licvar.model import ALL_KINDS, TermKind

from conftest import read_fixture

K = TermKind


class Scripted(CountingBackend):
    """Replies from a fixed script, repeating the last entry."""

    def __init__(self, replies: list[str]):
        super().__init__("scripted")
        self.replies = replies
        self.prompts: list[str] = []

    def _complete(self, task, prompt, request):
        self.prompts.append(prompt)
        n = self.call_counter - 1
        return self.replies[min(n, len(self.replies) - 1)]


def examples(kb, kind, text):
    return tuple(TermExample(lid.identifier, clause, value)
                 for lid, clause, value in retrieve_term_examples(kind, text, 3, kb))


# ----------------------------------------------------------------- embedding


def test_embed_deterministic_and_normalized():
    emb = NgramEmbedder()
    a, b = emb.embed("MIT License"), emb.embed("MIT License")
    assert np.array_equal(a, b)
    assert a.shape == (1024,)
    assert np.linalg.norm(a) == pytest.approx(1.0)


def test_embed_similarity_order():
    emb = NgramEmbedder()
    base = emb.embed("mit license")
    assert cosine(base, emb.embed("mit license text")) > cosine(base, emb.embed("patent litigation"))


def test_empty_text_zero_vector():
    assert not NgramEmbedder().embed("").any()
    assert not NgramEmbedder().embed(" -- ").any()


def test_embedding_backend_registry():
    assert embedding_backend("ngram3-1024").dimension == 1024
    with pytest.raises(BackendError):
        embedding_backend("word2vec")
    with pytest.raises(BackendError):
        cosine(np.ones(2), np.ones(3))


# ------------------------------------------------------------------ classify


def test_classify_have_fun(gateway):
    result = gateway.classify_sentence(ClassificationRequest("Have fun using this code!"))
    assert result.is_other and result.attempts == 1
    assert gateway.call_counter == 1


def test_classify_mit_permission(gateway, kb):
    sentence = kb["MIT"].sentences[2].text
    assert K.COPYRIGHT in gateway.classify_sentence(ClassificationRequest(sentence)).labels


def test_classify_apache_patent_sentence(gateway, kb):
    apache = kb["Apache-2.0"]
    sentence = next(s.text for s in apache.sentences if "patent litigation" in s.text)
    labels = gateway.classify_sentence(ClassificationRequest(sentence)).labels
    assert {K.PATENT_GRANT, K.PATENT_LITIGATION_TERMINATION} <= labels


def test_classify_novel_sentence_by_rules(gateway):
    labels = gateway.classify_sentence(ClassificationRequest(
        "This software may not be used for commercial purposes.")).labels
    assert K.USAGE_LIMITATION in labels


def test_classify_rejects_empty(gateway):
    with pytest.raises(ValueError):
        gateway.classify_sentence(ClassificationRequest("   "))


def test_prompts_carry_definitions():
    prompt = classification_prompt(ClassificationRequest("Some sentence."))
    assert "Some sentence." in prompt
    assert len(term_definitions()) == 15
    assert all(k.value in prompt for k in ALL_KINDS)
    vprompt = valuation_prompt(ValuationRequest(K.COPYLEFT, "clause", (TermExample("MIT", "c", 0),)))
    assert "clause" in vprompt and "MIT" in vprompt


# --------------------------------------------------------------------- value


def test_value_empty_clause(gateway):
    result = gateway.value_term(ValuationRequest(K.NETWORK_USE, ""))
    assert result.value == 0 and result.attempts == 0
    assert gateway.call_counter == 0
    assert gateway.value_term(ValuationRequest(K.SECONDARY_LICENSE, " ")).value is None
    with pytest.raises(ValueError):
        gateway.value_term(ValuationRequest(K.COPYRIGHT, ""))


def test_value_proprietary_clause(gateway, kb):
    clause = "You may not modify or distribute the Software."
    result = gateway.value_term(ValuationRequest(K.COPYRIGHT, clause, examples(kb, K.COPYRIGHT, clause)))
    assert result.value == 0


def test_value_lgpl_relicense_clause(gateway, kb):
    lgpl = kb["LGPL-2.1-only"]
    clause = lgpl.term_clauses[K.SECONDARY_LICENSE]
    result = gateway.value_term(
        ValuationRequest(K.SECONDARY_LICENSE, clause, examples(kb, K.SECONDARY_LICENSE, clause)))
    assert "GPL-2.0-only" in result.value


def test_value_in_domain_for_every_kind(gateway, kb):
    clause = "Licensee shall comply with every term herein."
    for kind in ALL_KINDS:
        value = gateway.value_term(ValuationRequest(kind, clause)).value
        assert parse_value(render_value(value, ""), kind)[0] == value


# --------------------------------------------------------------- re-asks


def test_reask_then_success():
    backend = Scripted(["no fence here", "```\nLABELS: copyright, bogus\n```",
                        "```\nLABELS: copyright\n```"])
    gw = Gateway(backend)
    result = gw.classify_sentence(ClassificationRequest("Permission is granted."))
    assert result.labels == {K.COPYRIGHT} and result.attempts == 3
    assert backend.call_counter == 3
    assert "no fenced block" in backend.prompts[1]


def test_protocol_error_after_two_reasks():
    backend = Scripted(["```\nVALUE: 7\n```"])
    gw = Gateway(backend)
    with pytest.raises(ProtocolError) as err:
        gw.value_term(ValuationRequest(K.COPYLEFT, "some clause"))
    assert err.value.attempts == 3
    assert backend.call_counter == 3


def test_segmentation_falls_back_to_primary():
    gw = Gateway(Scripted(["garbage"]))
    result = gw.segment_license_file("Some license text.\nMore text.\n")
    assert [c.kind for c in result.components] == [ComponentKind.PRIMARY]
    assert result.attempts == 3


@pytest.mark.parametrize("reply", [
    "```\n```", "```\nVALUE: maybe\n```", "```\nRATIONALE: x\n```", "```\nVALUE: [Foo]\n```",
])
def test_parse_value_rejects(reply):
    kind = K.SECONDARY_LICENSE if "Foo" in reply else K.COPYLEFT
    with pytest.raises(ReplyFormatError):
        parse_value(reply, kind)


def test_reply_round_trip():
    assert parse_labels(render_labels({K.COPYLEFT, K.EXCEPTION})) == {K.COPYLEFT, K.EXCEPTION}
    assert parse_labels(render_labels(set())) == frozenset()
    assert parse_value(render_value(("GPL-2.0-only",), "r"), K.SECONDARY_LICENSE) == (("GPL-2.0-only",), "r")
    assert parse_value("```\nVALUE: [unknown:Foo]\n```", K.SECONDARY_LICENSE)[0] == ("unknown:Foo",)


def test_parse_segments_must_partition():
    text = "a\nb\nc\n"
    comps = parse_segments("```\nprimary-license: 1-2\nnotice: 3-3\n```", text)
    assert "".join(c.text for c in comps) == text
    for bad in ("```\nprimary-license: 1-2\n```", "```\nprimary-license: 2-3\n```",
                "```\nsomething: 1-3\n```"):
        with pytest.raises(ReplyFormatError):
            parse_segments(bad, text)


# ------------------------------------------------------------------ segment


def kinds_of(gateway, text):
    result = gateway.segment_license_file(text)
    assert "".join(c.text for c in result.components) == text
    return [c.kind for c in result.components]


def test_segment_plain_mit(gateway, kb):
    assert kinds_of(gateway, kb["MIT"].full_text) == [ComponentKind.PRIMARY]
    assert gateway.call_counter == 1


def test_segment_bundled_file(gateway):
    assert kinds_of(gateway, read_fixture("bundled_mit_bsd3.txt")) == [
        ComponentKind.PRIMARY, ComponentKind.THIRD_PARTY]


def test_segment_reference(gateway):
    assert kinds_of(gateway, "Licensed under Apache-2.0") == [ComponentKind.REFERENCE]


def test_segment_every_kb_text_is_one_component(gateway, kb):
    for lic in kb.licenses.values():
        assert kinds_of(gateway, lic.full_text) == [ComponentKind.PRIMARY], lic.id


def test_segment_empty(gateway):
    assert gateway.segment_license_file("").components == ()


def test_mock_is_deterministic(kb):
    text = read_fixture("bundled_mit_bsd3.txt")
    replies = [MockReasoner(kb).complete("segment", "", SegmentationRequest(text)) for _ in range(2)]
    assert replies[0] == replies[1]


# ------------------------------------------------------------------- remote


def remote(handler, **cfg) -> tuple[RemoteReasoner, list[httpx.Request]]:
    seen: list[httpx.Request] = []

    def record(request: httpx.Request) -> httpx.Response:
        seen.append(request)
        return handler(request, len(seen))

    config = RemoteConfig(endpoint="http://model.test/v1", model="m", backoff_base=0.0, **cfg)
    client = httpx.Client(transport=httpx.MockTransport(record))
    return RemoteReasoner(config, client), seen


def chat(content: str) -> httpx.Response:
    return httpx.Response(200, json={"choices": [{"message": {"content": content}}]})


def test_remote_classify():
    backend, seen = remote(lambda req, n: chat("```\nLABELS: copyleft\n```"))
    gw = Gateway(backend)
    assert gw.classify_sentence(ClassificationRequest("Share alike.")).labels == {K.COPYLEFT}
    body = json.loads(seen[0].content)
    assert body["temperature"] == 0 and body["model"] == "m"
    assert seen[0].url.path == "/v1/chat/completions"


def test_remote_retries_429_then_succeeds():
    def handler(req, n):
        if n == 1:
            return httpx.Response(429, headers={"retry-after": "0"})
        if n == 2:
            return httpx.Response(503)
        return chat("```\nLABELS: other\n```")

    backend, seen = remote(handler)
    assert Gateway(backend).classify_sentence(ClassificationRequest("Hi.")).is_other
    assert len(seen) == 3
    assert backend.call_counter == 1  # one logical request


def test_remote_transport_error():
    def handler(req, n):
        raise httpx.ConnectError("refused", request=req)

    backend, seen = remote(handler, max_retries=2)
    with pytest.raises(TransportError) as err:
        backend.complete("classify", "prompt", None)
    assert err.value.attempts == 3 and len(seen) == 3


def test_remote_client_error_not_retried():
    backend, seen = remote(lambda req, n: httpx.Response(401, text="bad key"))
    with pytest.raises(BackendError, match="401"):
        backend.complete("classify", "prompt", None)
    assert len(seen) == 1


def test_remote_malformed_body_is_reasked():
    backend, _ = remote(lambda req, n: httpx.Response(200, json={"unexpected": True}))
    with pytest.raises(ProtocolError):
        Gateway(backend).classify_sentence(ClassificationRequest("Hi."))
    assert backend.call_counter == 3


def test_remote_embedder():
    def handler(req):
        return httpx.Response(200, json={"data": [{"embedding": [3.0, 4.0]}]})

    cfg = RemoteConfig(endpoint="http://model.test", embedding_model="e", backoff_base=0.0)
    emb = RemoteEmbedder(cfg, 2, httpx.Client(transport=httpx.MockTransport(handler)))
    assert np.allclose(emb.embed("text"), [0.6, 0.8])
    assert not emb.embed("").any()
    bad = RemoteEmbedder(cfg, 3, httpx.Client(transport=httpx.MockTransport(handler)))
    with pytest.raises(BackendError):
        bad.embed("text")


def test_remote_needs_endpoint():
    with pytest.raises(BackendError):
        RemoteReasoner(RemoteConfig())


def test_config_file_and_env(tmp_path):
    path = tmp_path / "licvar.ini"
    path.write_text("[licvar]\nendpoint = http://a\nmodel = small\nmax_in_flight = 2\ntimeout = 5\n")
    cfg = RemoteConfig.load(path, env={"LICVAR_MODEL": "large"})
    assert cfg.endpoint == "http://a" and cfg.model == "large"
    assert cfg.max_in_flight == 2 and cfg.timeout == 5.0
    with pytest.raises(BackendError):
        RemoteConfig.load(tmp_path / "missing.ini", env={})
    with pytest.raises(BackendError):
        RemoteConfig.load(None, env={"LICVAR_MAX_IN_FLIGHT": "many"})
