"""The annotated standard-license corpus and its similarity queries.

On-disk layout::

    <kb>/manifest.json            backend, fingerprint params, license ids
    <kb>/embeddings.npz           license and clause-group vectors
    <kb>/<ID>/license.txt         canonical text
    <kb>/<ID>/annotation.json     term vector and per-sentence labels
"""

from __future__ import annotations

import io
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from licvar.errors import BackendError, SchemaError, ValidationError
from licvar.fingerprint import DEFAULT_K, DEFAULT_W, normalized
from licvar.gateway.embedding import EmbeddingBackend, cosine, embedding_backend
from licvar.model import (
    ALL_KINDS,
    LicenseId,
    TermKind,
    TermValue,
    TermVector,
    check_valid,
)
from licvar.textproc import SentenceUnit, segment

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
OTHER = "other"
ANNOTATION_NOTE = (
    "Sentence labels and term vectors in this knowledge base are our own annotations."
)


@dataclass(frozen=True)
class KbSentence:
    unit: SentenceUnit
    labels: frozenset[TermKind]

    @property
    def text(self) -> str:
        return self.unit.text


@dataclass(frozen=True)
class KbLicense:
    id: LicenseId
    full_text: str
    sentences: tuple[KbSentence, ...]
    term_vector: TermVector
    embedding: np.ndarray = field(compare=False, repr=False)
    clause_embeddings: Mapping[TermKind, np.ndarray] = field(
        default_factory=dict, compare=False, repr=False
    )

    @cached_property
    def term_clauses(self) -> dict[TermKind, str]:
        """Concatenated text of the sentences labeled with each kind."""
        groups: dict[TermKind, list[str]] = {}
        for s in self.sentences:
            for kind in s.labels:
                groups.setdefault(kind, []).append(s.text)
        return {k: " ".join(groups[k]) for k in ALL_KINDS if k in groups}

    def sentences_labeled(self, kind: TermKind) -> list[int]:
        return [i for i, s in enumerate(self.sentences) if kind in s.labels]


@dataclass(frozen=True)
class BuildInfo:
    embedding_backend: str
    embedding_dimension: int
    k: int = DEFAULT_K
    w: int = DEFAULT_W


@dataclass(frozen=True)
class SentenceHit:
    license_id: LicenseId
    index: int
    labels: frozenset[TermKind]


class KnowledgeBase:
    """Immutable collection of annotated standard licenses."""

    def __init__(self, licenses: Iterable[KbLicense], built_with: BuildInfo, note: str = ""):
        self._licenses: dict[str, KbLicense] = {}
        for lic in sorted(licenses, key=lambda x: x.id.identifier):
            if lic.id.identifier in self._licenses:
                raise ValueError(f"duplicate license {lic.id}")
            self._licenses[lic.id.identifier] = lic
        self.built_with = built_with
        self.note = note or ANNOTATION_NOTE
        index: dict[str, SentenceHit] = {}
        for lic in self._licenses.values():
            for i, s in enumerate(lic.sentences):
                index.setdefault(s.unit.normalized, SentenceHit(lic.id, i, s.labels))
        self.sentence_index: Mapping[str, SentenceHit] = index

    @property
    def licenses(self) -> dict[str, KbLicense]:
        return dict(self._licenses)

    def ids(self) -> list[str]:
        return list(self._licenses)

    def __len__(self) -> int:
        return len(self._licenses)

    def __contains__(self, license_id: object) -> bool:
        return str(license_id) in self._licenses

    def __getitem__(self, license_id: str | LicenseId) -> KbLicense:
        return self._licenses[str(license_id)]

    def get(self, license_id: str | LicenseId) -> KbLicense | None:
        return self._licenses.get(str(license_id))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        if self.built_with != other.built_with or self.ids() != other.ids():
            return False
        for a, b in zip(self._licenses.values(), other._licenses.values()):
            if a != b or not np.array_equal(a.embedding, b.embedding):
                return False
            if set(a.clause_embeddings) != set(b.clause_embeddings) or not all(
                np.array_equal(a.clause_embeddings[k], b.clause_embeddings[k])
                for k in a.clause_embeddings
            ):
                return False
        return True

    __hash__ = None  # type: ignore[assignment]

    def check_backend(self, embedder: EmbeddingBackend) -> None:
        if embedder.name != self.built_with.embedding_backend:
            raise BackendError(
                f"knowledge base was built with {self.built_with.embedding_backend!r}, "
                f"query uses {embedder.name!r}"
            )

    def default_embedder(self) -> EmbeddingBackend:
        return embedding_backend(self.built_with.embedding_backend)

    def lookup_sentence(self, text: str) -> tuple[LicenseId, frozenset[TermKind]] | None:
        hit = self.sentence_index.get(normalized(text))
        return None if hit is None else (hit.license_id, hit.labels)


# ----------------------------------------------------------------- queries


def best_match(candidate_embedding: np.ndarray, kb: KnowledgeBase) -> tuple[LicenseId, float]:
    """Most similar KB license by cosine; ties go to the smaller id."""
    if len(kb) == 0:
        raise BackendError("knowledge base is empty")
    vec = np.asarray(candidate_embedding, dtype=np.float64)
    if vec.shape != (kb.built_with.embedding_dimension,):
        raise BackendError(
            f"embedding has shape {vec.shape}, knowledge base expects "
            f"({kb.built_with.embedding_dimension},)"
        )
    best_id: LicenseId | None = None
    best_score = -2.0
    for lic in kb.licenses.values():  # sorted by id
        score = cosine(vec, lic.embedding)
        if score > best_score:
            best_id, best_score = lic.id, score
    assert best_id is not None
    return best_id, best_score


def retrieve_term_examples(
    kind: TermKind,
    query_text: str,
    k: int,
    kb: KnowledgeBase,
    embedder: EmbeddingBackend | None = None,
) -> list[tuple[LicenseId, str, TermValue]]:
    """Top-``k`` KB clause groups of ``kind`` by embedding similarity to ``query_text``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    embedder = embedder or kb.default_embedder()
    kb.check_backend(embedder)
    query = embedder.embed(query_text)
    scored = []
    for lic in kb.licenses.values():
        vec = lic.clause_embeddings.get(kind)
        if vec is None:
            continue
        scored.append((-cosine(query, vec), lic.id.identifier, lic))
    scored.sort(key=lambda t: (t[0], t[1]))
    return [
        (lic.id, lic.term_clauses[kind], lic.term_vector[kind]) for _, _, lic in scored[:k]
    ]


def lookup_sentence(text: str, kb: KnowledgeBase) -> tuple[LicenseId, frozenset[TermKind]] | None:
    return kb.lookup_sentence(text)


# ------------------------------------------------------------- load / save


def bundled_path() -> Path:
    return Path(str(resources.files("licvar") / "data" / "kb"))


def _read_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SchemaError(path, "<file>", "missing") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(path, "<file>", f"invalid JSON: {exc}") from None


def _require(data: Mapping[str, Any], key: str, typ: type | tuple[type, ...], path: Path) -> Any:
    if not isinstance(data, Mapping) or key not in data:
        raise SchemaError(path, key, "missing")
    value = data[key]
    if not isinstance(value, typ) or isinstance(value, bool) and typ is int:
        raise SchemaError(path, key, f"expected {getattr(typ, '__name__', typ)}")
    return value


def _parse_labels(raw: Any, path: Path, where: str) -> frozenset[TermKind]:
    if not isinstance(raw, list) or not raw:
        raise SchemaError(path, where, "expected a non-empty list of term kinds or 'other'")
    if raw == [OTHER]:
        return frozenset()
    labels = set()
    for name in raw:
        try:
            labels.add(TermKind(name))
        except ValueError:
            raise SchemaError(path, where, f"unknown term kind {name!r}") from None
    return frozenset(labels)


def _parse_vector(raw: Any, path: Path) -> TermVector:
    if not isinstance(raw, Mapping):
        raise SchemaError(path, "term_vector", "expected an object")
    for key in raw:
        if key not in ("schema_version", "provenance") and key not in {k.value for k in ALL_KINDS}:
            raise SchemaError(path, f"term_vector.{key}", "unknown term kind")
    try:
        vector = TermVector.from_json_dict(raw)
        check_valid(vector)
    except ValidationError as exc:
        first = exc.violations[0]
        raise SchemaError(path, f"term_vector.{first.kind}", first.problem) from None
    except (TypeError, ValueError) as exc:
        raise SchemaError(path, "term_vector", str(exc)) from None
    return TermVector(vector.values)  # provenance is meaningless inside the KB


def _load_annotated(root: Path, license_id: str) -> KbLicense:
    """Text, labels and term vector of one license, without embeddings."""
    folder = root / license_id
    text_path = folder / "license.txt"
    ann_path = folder / "annotation.json"
    try:
        full_text = text_path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise SchemaError(text_path, "<file>", "missing") from None
    ann = _read_json(ann_path)
    if _require(ann, "schema_version", int, ann_path) != SCHEMA_VERSION:
        raise SchemaError(ann_path, "schema_version", f"expected {SCHEMA_VERSION}")
    if _require(ann, "id", str, ann_path) != license_id:
        raise SchemaError(ann_path, "id", f"does not match directory name {license_id!r}")
    name = ann.get("name", "")
    vector = _parse_vector(ann.get("term_vector"), ann_path)
    raw_sentences = _require(ann, "sentences", list, ann_path)
    units = segment(full_text)
    if len(units) != len(raw_sentences):
        raise SchemaError(
            ann_path,
            "sentences",
            f"{len(raw_sentences)} annotated sentences but license.txt segments into {len(units)}",
        )
    sentences = []
    for i, (unit, raw) in enumerate(zip(units, raw_sentences)):
        where = f"sentences[{i}]"
        if not isinstance(raw, Mapping):
            raise SchemaError(ann_path, where, "expected an object")
        if _require(raw, "text", str, ann_path) != unit.text:
            raise SchemaError(ann_path, f"{where}.text", "does not match the segmented license text")
        labels = _parse_labels(raw.get("labels"), ann_path, f"{where}.labels")
        sentences.append(KbSentence(unit, labels))
    return KbLicense(LicenseId.of(license_id, name), full_text, tuple(sentences), vector,
                     np.zeros(0))


def _attach_embeddings(lic: KbLicense, embeddings: Mapping[str, np.ndarray], path: Path,
                       dim: int) -> KbLicense:
    lid = lic.id.identifier

    def fetch(key: str) -> np.ndarray:
        if key not in embeddings:
            raise SchemaError(path, key, "missing (run `licvar kb build`)")
        vec = np.asarray(embeddings[key], dtype=np.float64)
        if vec.shape != (dim,):
            raise SchemaError(path, key, f"shape {vec.shape} != ({dim},)")
        return vec

    clause_vecs = {kind: fetch(f"clause/{lid}/{kind.value}") for kind in lic.term_clauses}
    return KbLicense(lic.id, lic.full_text, lic.sentences, lic.term_vector,
                     fetch(f"license/{lid}"), clause_vecs)


def _read_manifest(root: Path) -> tuple[dict[str, Any], BuildInfo, list[str]]:
    path = root / "manifest.json"
    if not root.is_dir():
        raise SchemaError(root, "<dir>", "not a directory")
    if not path.exists():
        raise SchemaError(path, "<file>", "missing")
    manifest = _read_json(path)
    if _require(manifest, "schema_version", int, path) != SCHEMA_VERSION:
        raise SchemaError(path, "schema_version", f"expected {SCHEMA_VERSION}")
    emb = _require(manifest, "embedding", Mapping, path)
    fp = _require(manifest, "fingerprint", Mapping, path)
    info = BuildInfo(
        _require(emb, "backend", str, path),
        _require(emb, "dimension", int, path),
        _require(fp, "k", int, path),
        _require(fp, "w", int, path),
    )
    ids = _require(manifest, "licenses", list, path)
    if not ids:
        raise SchemaError(path, "licenses", "empty")
    if len(set(ids)) != len(ids) or not all(isinstance(i, str) for i in ids):
        raise SchemaError(path, "licenses", "must be unique strings")
    return manifest, info, ids


def load(path: str | Path | None = None) -> KnowledgeBase:
    """Load and validate a knowledge base directory (the bundled one by default)."""
    root = Path(path) if path is not None else bundled_path()
    manifest, info, ids = _read_manifest(root)
    emb_path = root / "embeddings.npz"
    if not emb_path.exists():
        raise SchemaError(emb_path, "<file>", "missing (run `licvar kb build`)")
    try:
        with np.load(emb_path, allow_pickle=False) as npz:
            embeddings = {k: npz[k] for k in npz.files}
    except (OSError, ValueError) as exc:
        raise SchemaError(emb_path, "<file>", f"unreadable: {exc}") from None
    licenses = [
        _attach_embeddings(_load_annotated(root, lid), embeddings, emb_path,
                           info.embedding_dimension)
        for lid in ids
    ]
    kb = KnowledgeBase(licenses, info, manifest.get("note", ""))
    _check_label_consistency(kb, root)
    log.debug("loaded %d KB licenses from %s", len(kb), root)
    return kb


def _check_label_consistency(kb: KnowledgeBase, root: Path) -> None:
    """Identical sentences must carry identical labels across the whole KB."""
    for lic in kb.licenses.values():
        for i, s in enumerate(lic.sentences):
            hit = kb.sentence_index[s.unit.normalized]
            if hit.labels != s.labels:
                raise SchemaError(
                    root / lic.id.identifier / "annotation.json",
                    f"sentences[{i}].labels",
                    f"differ from the identical sentence {hit.index} of {hit.license_id}",
                )


def _annotation_doc(lic: KbLicense) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "id": lic.id.identifier,
        "name": lic.id.name,
        "term_vector": lic.term_vector.to_json_dict(),
        "sentences": [
            {"text": s.text, "labels": sorted(k.value for k in s.labels) or [OTHER]}
            for s in lic.sentences
        ],
    }


def _write_json(path: Path, data: Any) -> None:
    path.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def save(kb: KnowledgeBase, path: str | Path) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    _write_json(
        root / "manifest.json",
        {
            "schema_version": SCHEMA_VERSION,
            "note": kb.note,
            "embedding": {
                "backend": kb.built_with.embedding_backend,
                "dimension": kb.built_with.embedding_dimension,
            },
            "fingerprint": {"k": kb.built_with.k, "w": kb.built_with.w},
            "licenses": kb.ids(),
        },
    )
    arrays: dict[str, np.ndarray] = {}
    for lic in kb.licenses.values():
        folder = root / lic.id.identifier
        folder.mkdir(exist_ok=True)
        (folder / "license.txt").write_text(lic.full_text, encoding="utf-8")
        _write_json(folder / "annotation.json", _annotation_doc(lic))
        arrays[f"license/{lic.id.identifier}"] = lic.embedding
        for kind, vec in lic.clause_embeddings.items():
            arrays[f"clause/{lic.id.identifier}/{kind.value}"] = vec
    buf = io.BytesIO()
    np.savez_compressed(buf, **arrays)
    (root / "embeddings.npz").write_bytes(buf.getvalue())


def build(path: str | Path, embedder: EmbeddingBackend | None = None) -> KnowledgeBase:
    """Recompute embeddings and the manifest from the license texts and annotations.

    License ids come from the manifest when present, else from the
    subdirectories that hold an ``annotation.json``.
    """
    from licvar.gateway.embedding import NgramEmbedder

    root = Path(path)
    embedder = embedder or NgramEmbedder()
    manifest_path = root / "manifest.json"
    if manifest_path.exists():
        manifest = _read_json(manifest_path)
        ids = list(manifest.get("licenses") or [])
        note = manifest.get("note", "")
        fp = manifest.get("fingerprint") or {}
        k, w = int(fp.get("k", DEFAULT_K)), int(fp.get("w", DEFAULT_W))
    else:
        ids, note, k, w = [], "", DEFAULT_K, DEFAULT_W
    if not ids:
        ids = sorted(p.parent.name for p in root.glob("*/annotation.json"))
    if not ids:
        raise SchemaError(root, "licenses", "no annotated licenses found")
    info = BuildInfo(embedder.name, embedder.dimension, k, w)
    licenses = []
    for lid in ids:
        draft = _load_annotated(root, lid)
        clause_vecs = {kind: embedder.embed(text) for kind, text in draft.term_clauses.items()}
        licenses.append(
            KbLicense(draft.id, draft.full_text, draft.sentences, draft.term_vector,
                      embedder.embed(draft.full_text), clause_vecs)
        )
    kb = KnowledgeBase(licenses, info, note)
    save(kb, root)
    return kb

