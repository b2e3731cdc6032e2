"""License text to term vector, reusing KB annotations for unchanged sentences.

The candidate is matched against the knowledge base by embedding. Above the
similarity threshold it is diffed sentence by sentence against the matched
standard: identical sentences keep their KB labels, and only the rest are
sent to the model. Terms untouched by the edits copy the KB value; terms
with new clauses are re-valued and merged conservatively with the KB value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

from licvar.errors import ParseError, ProtocolError, TransportError
from licvar.gateway import Gateway, MockReasoner, TermExample, ValuationRequest
from licvar.gateway.protocol import ClassificationRequest
from licvar.kb import KbLicense, KnowledgeBase, best_match, retrieve_term_examples
from licvar.model import (
    ALL_KINDS,
    LicenseId,
    Provenance,
    TermKind,
    TermValue,
    TermVector,
    default_value,
    most_restrictive_value,
    restrictiveness_max,
)
from licvar.textproc import SentenceUnit, diff_sentences, segment

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParserConfig:
    similarity_threshold: float = 0.9
    retrieval_k: int = 3
    embedding_backend: str | None = None
    reasoning_backend: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.similarity_threshold <= 1.0:
            raise ValueError("similarity_threshold must lie in [0, 1]")
        if self.retrieval_k < 1:
            raise ValueError("retrieval_k must be >= 1")


@dataclass(frozen=True)
class Conflict:
    kind: TermKind
    reused: TermValue
    inferred: TermValue
    resolved: TermValue


@dataclass
class ParseResult:
    term_vector: TermVector
    matched_standard: tuple[LicenseId, float] | None
    reused_sentence_count: int
    model_sentence_count: int
    model_calls: int
    conflicts: list[Conflict] = field(default_factory=list)
    best_similarity: float = 0.0
    sentence_count: int = 0
    model_sentences: tuple[int, ...] = ()  # candidate indices sent to the classifier
    reused_pairs: tuple[tuple[int, int], ...] = ()  # (candidate, standard) index pairs
    notes: list[str] = field(default_factory=list)

    @property
    def matched_id(self) -> str | None:
        return self.matched_standard[0].identifier if self.matched_standard else None

    def to_json_dict(self) -> dict[str, Any]:
        def enc(v: TermValue) -> Any:
            return list(v) if isinstance(v, tuple) else v

        return {
            "term_vector": self.term_vector.to_json_dict(),
            "matched_standard": (
                None
                if self.matched_standard is None
                else {"id": self.matched_standard[0].identifier,
                      "similarity": self.matched_standard[1]}
            ),
            "best_similarity": self.best_similarity,
            "sentence_count": self.sentence_count,
            "reused_sentence_count": self.reused_sentence_count,
            "model_sentence_count": self.model_sentence_count,
            "model_sentences": list(self.model_sentences),
            "model_calls": self.model_calls,
            "conflicts": [
                {"kind": c.kind.value, "reused": enc(c.reused), "inferred": enc(c.inferred),
                 "resolved": enc(c.resolved)}
                for c in self.conflicts
            ],
            "notes": list(self.notes),
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> ParseResult:
        def dec(kind: TermKind, v: Any) -> TermValue:
            return tuple(v) if isinstance(v, list) else v

        m = data.get("matched_standard")
        return cls(
            term_vector=TermVector.from_json_dict(data["term_vector"]),
            matched_standard=None if m is None else (LicenseId.of(m["id"]), float(m["similarity"])),
            reused_sentence_count=int(data["reused_sentence_count"]),
            model_sentence_count=int(data["model_sentence_count"]),
            model_calls=int(data["model_calls"]),
            conflicts=[
                Conflict(TermKind(c["kind"]), dec(TermKind(c["kind"]), c["reused"]),
                         dec(TermKind(c["kind"]), c["inferred"]),
                         dec(TermKind(c["kind"]), c["resolved"]))
                for c in data.get("conflicts", [])
            ],
            best_similarity=float(data.get("best_similarity", 0.0)),
            sentence_count=int(data.get("sentence_count", 0)),
            model_sentences=tuple(data.get("model_sentences", ())),
            notes=list(data.get("notes", [])),
        )


class _Run:
    """Per-parse mutable state: the call tally and diagnostics."""

    def __init__(self, gateway: Gateway, kb: KnowledgeBase | None, cfg: ParserConfig):
        self.gateway = gateway
        self.kb = kb
        self.cfg = cfg
        self.calls = 0
        self.notes: list[str] = []
        self.values: dict[TermKind, TermValue] = {}
        self.provenance: dict[TermKind, Provenance] = {}

    def classify(self, unit: SentenceUnit) -> frozenset[TermKind]:
        try:
            result = self.gateway.classify_sentence(ClassificationRequest(unit.text))
        except ProtocolError as exc:
            self.calls += exc.attempts
            self.notes.append(f"sentence {unit.index}: unusable labels, assuming every term")
            return frozenset(ALL_KINDS)
        self.calls += result.attempts
        return result.labels

    def value(self, kind: TermKind, clause_text: str) -> tuple[TermValue, Provenance]:
        examples: tuple[TermExample, ...] = ()
        if self.kb is not None:
            examples = tuple(
                TermExample(lid.identifier, text, value)
                for lid, text, value in retrieve_term_examples(
                    kind, clause_text, self.cfg.retrieval_k, self.kb, self.gateway.embedder
                )
            )
        try:
            result = self.gateway.value_term(ValuationRequest(kind, clause_text, examples))
        except ProtocolError as exc:
            self.calls += exc.attempts
            self.notes.append(f"{kind.value}: no usable value, using the most restrictive one")
            return most_restrictive_value(kind), Provenance.DEFAULT
        self.calls += result.attempts
        return result.value, Provenance.MODEL

    def set(self, kind: TermKind, value: TermValue, prov: Provenance) -> None:
        self.values[kind] = value
        self.provenance[kind] = prov

    def vector(self) -> TermVector:
        vals = {k: self.values.get(k, default_value(k)) for k in ALL_KINDS}
        prov = {k: self.provenance.get(k, Provenance.DEFAULT) for k in ALL_KINDS}
        return TermVector(vals, prov)


def _default_gateway(kb: KnowledgeBase | None) -> Gateway:
    embedder = kb.default_embedder() if kb is not None else None
    return Gateway(MockReasoner(kb), embedder)


def _value_unmatched(run: _Run, units: list[SentenceUnit], labels: dict[int, frozenset[TermKind]]) -> None:
    for kind in ALL_KINDS:
        clauses = [u.text for u in units if kind in labels[u.index]]
        if clauses:
            run.set(kind, *run.value(kind, " ".join(clauses)))
        else:
            run.set(kind, default_value(kind), Provenance.DEFAULT)


def _value_matched(
    run: _Run,
    units: list[SentenceUnit],
    std: KbLicense,
    pairs: dict[int, int],
    deleted: list[int],
    labels: dict[int, frozenset[TermKind]],
) -> list[Conflict]:
    conflicts: list[Conflict] = []
    for kind in ALL_KINDS:
        kb_value = std.term_vector[kind]
        reused = {i for i, j in pairs.items() if kind in std.sentences[j].labels}
        novel = {i for i, lab in labels.items() if kind in lab}
        removed = [j for j in deleted if kind in std.sentences[j].labels]
        if not novel and not removed:
            run.set(kind, kb_value, Provenance.KB_REUSE)
            continue
        # clause text in candidate document order
        clause_text = " ".join(u.text for u in units if u.index in reused or u.index in novel)
        if not clause_text:
            run.set(kind, default_value(kind), Provenance.DEFAULT)
            continue
        inferred, prov = run.value(kind, clause_text)
        if novel and reused and prov is Provenance.MODEL and inferred != kb_value:
            resolved = restrictiveness_max(kind, kb_value, inferred)
            conflicts.append(Conflict(kind, kb_value, inferred, resolved))
            run.set(kind, resolved, Provenance.CONFLICT)
        else:
            run.set(kind, inferred, prov)
    return conflicts


def parse(
    license_text: str,
    kb: KnowledgeBase,
    cfg: ParserConfig | None = None,
    gateway: Gateway | None = None,
) -> ParseResult:
    """Parse one license text into a term vector.

    ``gateway`` defaults to the offline mock backend seeded from ``kb``.
    Backend transport failures raise :class:`ParseError` with the partial
    result attached.
    """
    cfg = cfg or ParserConfig()
    gateway = gateway or _default_gateway(kb)
    units = segment(license_text)
    if not units:
        raise ValueError("license text has no content")
    kb.check_backend(gateway.embedder)
    run = _Run(gateway, kb, cfg)
    best_id, similarity = best_match(gateway.embed(license_text), kb)
    matched = similarity >= cfg.similarity_threshold
    labels: dict[int, frozenset[TermKind]] = {}
    pairs: dict[int, int] = {}
    conflicts: list[Conflict] = []
    try:
        if matched:
            std = kb[best_id]
            diff = diff_sentences(units, [s.unit for s in std.sentences])
            pairs = dict(diff.matched)
            for i in diff.candidate_only:
                labels[i] = run.classify(units[i])
            conflicts = _value_matched(run, units, std, pairs, diff.standard_only, labels)
        else:
            for u in units:
                labels[u.index] = run.classify(u)
            _value_unmatched(run, units, labels)
    except TransportError as exc:
        partial = _result(run, units, best_id, similarity, matched, labels, pairs, conflicts)
        raise ParseError(f"model backend unreachable: {exc}", partial) from exc
    return _result(run, units, best_id, similarity, matched, labels, pairs, conflicts)


def _result(run: _Run, units: list[SentenceUnit], best_id: LicenseId, similarity: float,
            matched: bool, labels: dict[int, frozenset[TermKind]], pairs: dict[int, int],
            conflicts: list[Conflict]) -> ParseResult:
    return ParseResult(
        term_vector=run.vector(),
        matched_standard=(best_id, similarity) if matched else None,
        reused_sentence_count=len(pairs),
        model_sentence_count=len(labels),
        model_calls=run.calls,
        conflicts=conflicts,
        best_similarity=similarity,
        sentence_count=len(units),
        model_sentences=tuple(sorted(labels)),
        reused_pairs=tuple(sorted(pairs.items())),
        notes=run.notes,
    )


def parse_baseline(
    license_text: str,
    cfg: ParserConfig | None = None,
    gateway: Gateway | None = None,
    kb: KnowledgeBase | None = None,
) -> ParseResult:
    """Model-only parsing: every sentence classified, every mentioned term valued.

    No sentence is reused from the knowledge base; ``kb``, when given, only
    supplies retrieval examples for valuation.
    """
    cfg = cfg or ParserConfig()
    gateway = gateway or _default_gateway(kb)
    units = segment(license_text)
    if not units:
        raise ValueError("license text has no content")
    run = _Run(gateway, kb, cfg)
    labels: dict[int, frozenset[TermKind]] = {}
    try:
        for u in units:
            labels[u.index] = run.classify(u)
        _value_unmatched(run, units, labels)
    except TransportError as exc:
        partial = _result(run, units, LicenseId.of("NONE"), 0.0, False, labels, {}, [])
        raise ParseError(f"model backend unreachable: {exc}", partial) from exc
    return _result(run, units, LicenseId.of("NONE"), 0.0, False, labels, {}, [])
