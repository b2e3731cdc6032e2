"""End-to-end dependency license scan.

For every release in the resolved dependency tree the license evidence is
turned into parsed license components: license files are segmented, short
references and SPDX ids are replaced by the canonical text, and each text is
parsed. Every dependency's primary license is then checked against the root
license, and every bundled third-party component against the root as well.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import re
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Any, Callable, Iterable, TypeVar

from license_expression import (
    AND,
    OR,
    ExpressionError,
    LicenseSymbol,
    LicenseWithExceptionSymbol,
    get_spdx_licensing,
)

from licvar.compat import CompatibilityVerdict, check
from licvar.depgraph import (
    EvidenceKind,
    LicenseEvidence,
    PackageIndex,
    PackageRelease,
    extract_license_sources,
    resolve,
)
from licvar.errors import ParseError, TransportError
from licvar.fingerprint import normalized
from licvar.gateway import ComponentKind, Gateway, MockReasoner
from licvar.kb import KnowledgeBase
from licvar.model import (
    LicenseId,
    Provenance,
    TermKind,
    TermVector,
    spdx_exception_id,
    spdx_license_id,
)
from licvar.parser import ParserConfig, ParseResult, parse

log = logging.getLogger(__name__)

T = TypeVar("T")

# above this size a metadata license field is treated as license text
_FIELD_TEXT_CHARS = 200


class UnknownReason(str, Enum):
    UNRECOGNIZED = "unrecognized-license"
    VERSION_AMBIGUOUS = "version-ambiguous"
    BACKEND_FAILURE = "backend-failure"
    DEFAULT_CORE_TERM = "default-provenance-core-term"


class Status(str, Enum):
    COMPATIBLE = "Compatible"
    INCOMPATIBLE = "Incompatible"
    UNKNOWN = "Unknown"


def rollup(statuses: Iterable[Status]) -> Status:
    """Incompatible if any, else Unknown if any, else Compatible."""
    seen = set(statuses)
    if Status.INCOMPATIBLE in seen:
        return Status.INCOMPATIBLE
    if Status.UNKNOWN in seen:
        return Status.UNKNOWN
    return Status.COMPATIBLE


# ------------------------------------------------------------------ licenses


@dataclass(frozen=True)
class Unrecognized:
    reason: UnknownReason
    detail: str = ""


@dataclass(frozen=True)
class ResolvedLicense:
    """One license, either with a term vector or with the reason it has none."""

    license_id: LicenseId
    vector: TermVector | None
    unknown: Unrecognized | None = None
    exception: str | None = None  # SPDX exception attached with WITH
    parse_result: ParseResult | None = field(default=None, compare=False, repr=False)

    @property
    def label(self) -> str:
        return f"{self.license_id} WITH {self.exception}" if self.exception else str(self.license_id)

    @property
    def default_core(self) -> bool:
        if self.vector is None:
            return False
        prov = self.vector.provenance
        return any(prov.get(k) is Provenance.DEFAULT for k in (TermKind.COPYRIGHT, TermKind.COPYLEFT))


Alternative = tuple[ResolvedLicense, ...]  # licenses that all apply


@dataclass(frozen=True)
class ResolvedComponent:
    kind: ComponentKind
    text: str
    alternatives: tuple[Alternative, ...]  # any one may be chosen
    evidence: EvidenceKind
    augmented: bool = False

    @property
    def label(self) -> str:
        return _alternatives_label(self.alternatives)

    @property
    def fully_recognized(self) -> bool:
        return all(lic.unknown is None for alt in self.alternatives for lic in alt)


def _alternatives_label(alternatives: Iterable[Alternative]) -> str:
    parts = [" AND ".join(lic.label for lic in alt) for alt in alternatives]
    return " OR ".join(f"({p})" if " AND " in p and len(parts) > 1 else p for p in parts)


@dataclass(frozen=True)
class Augmentation:
    reference: str
    license_id: str


@dataclass
class LicenseResolution:
    release: PackageRelease
    components: list[ResolvedComponent]
    augmentation_log: list[Augmentation] = field(default_factory=list)
    unrecognized: Unrecognized | None = None

    @property
    def primary(self) -> list[ResolvedComponent]:
        return [c for c in self.components if c.kind is ComponentKind.PRIMARY]

    @property
    def third_party(self) -> list[ResolvedComponent]:
        return [c for c in self.components if c.kind is ComponentKind.THIRD_PARTY]

    def effective(self) -> tuple[Alternative, ...]:
        """Alternatives for the release's own license; every primary component applies."""
        if self.unrecognized is not None or not self.primary:
            why = self.unrecognized or Unrecognized(UnknownReason.UNRECOGNIZED, "no license text")
            return ((ResolvedLicense(LicenseId.of("UNKNOWN"), None, why),),)
        combos = itertools.product(*(c.alternatives for c in self.primary))
        return tuple(tuple(itertools.chain.from_iterable(combo)) for combo in combos)


# ------------------------------------------------------------------- caches


class ParseCache:
    """Content-addressed memo for model-backed work, safe across threads.

    Concurrent requests for the same key wait for the first computation, so
    a text is analysed at most once.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._entries: dict[str, Future[Any]] = {}
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(*parts: str) -> str:
        h = hashlib.sha256()
        for part in parts:
            h.update(part.encode("utf-8"))
            h.update(b"\0")
        return h.hexdigest()

    def get_or_compute(self, key: str, compute: Callable[[], T]) -> T:
        with self._lock:
            fut = self._entries.get(key)
            owner = fut is None
            if owner:
                fut = Future()
                self._entries[key] = fut
                self.misses += 1
            else:
                self.hits += 1
        assert fut is not None
        if owner:
            try:
                fut.set_result(compute())
            except BaseException as exc:
                fut.set_exception(exc)
        return fut.result()

    def __len__(self) -> int:
        return len(self._entries)


@dataclass(frozen=True)
class ScanConfig:
    parser: ParserConfig = field(default_factory=ParserConfig)
    max_workers: int = 4


@dataclass(frozen=True)
class _NameTable:
    patterns: tuple[tuple[re.Pattern[str], str | None], ...]
    text_aliases: dict[str, str]


@lru_cache(maxsize=1)
def _names() -> _NameTable:
    raw = json.loads((resources.files("licvar") / "data" / "license_names.json").read_text("utf-8"))
    return _NameTable(
        tuple((re.compile(p), ident) for p, ident in raw["names"]),
        dict(raw["text_aliases"]),
    )


_SPDX_TAG = re.compile(r"SPDX-License-Identifier:\s*([^\n*]+)", re.IGNORECASE)
_LICENSING = get_spdx_licensing()


class _Resolver:
    """Shared state for resolving licenses of many releases."""

    def __init__(self, kb: KnowledgeBase, gateway: Gateway, cfg: ScanConfig,
                 cache: ParseCache | None = None):
        self.kb = kb
        self.gateway = gateway
        self.cfg = cfg
        self.cache = cache if cache is not None else ParseCache()

    # ---------------------------------------------------------- single ids

    def canonical_text(self, spdx: str) -> str | None:
        ident = _names().text_aliases.get(spdx, spdx)
        lic = self.kb.get(ident)
        return lic.full_text if lic is not None else None

    def parse_text(self, text: str) -> ParseResult:
        key = self.cache.key("parse", repr(self.cfg.parser), text)
        return self.cache.get_or_compute(key, lambda: parse(text, self.kb, self.cfg.parser,
                                                            self.gateway))

    def from_text(self, text: str) -> ResolvedLicense:
        """Parse a license text and name it after its standard when unchanged."""
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
        try:
            result = self.parse_text(text)
        except ParseError as exc:
            return ResolvedLicense(LicenseId.of(f"LicenseRef-licvar-{digest}"), None,
                                   Unrecognized(UnknownReason.BACKEND_FAILURE, str(exc)))
        vector = result.term_vector
        if result.matched_standard is not None:
            std = self.kb[result.matched_standard[0]]
            if vector.same_terms(std.term_vector):
                return ResolvedLicense(std.id, vector, parse_result=result)
            name = f"variant of {std.id}"
        else:
            name = "custom license"
        return ResolvedLicense(LicenseId.of(f"LicenseRef-licvar-{digest}", name), vector,
                               parse_result=result)

    def from_spdx(self, spdx: str | None, raw: str, exception: str | None = None,
                  log_to: list[Augmentation] | None = None) -> ResolvedLicense:
        if spdx is None:
            return ResolvedLicense(LicenseId.of(raw or "UNKNOWN"), None,
                                   Unrecognized(UnknownReason.VERSION_AMBIGUOUS,
                                                f"{raw!r} names no specific license version"))
        text = self.canonical_text(spdx)
        if text is None:
            return ResolvedLicense(LicenseId.of(spdx), None,
                                   Unrecognized(UnknownReason.UNRECOGNIZED,
                                                f"no license text available for {spdx}"))
        if log_to is not None:
            log_to.append(Augmentation(raw, spdx))
        parsed = self.from_text(text)
        if parsed.unknown is not None:
            return parsed
        vector = parsed.vector
        assert vector is not None
        if exception:
            tags = set(vector.licenses(TermKind.EXCEPTION)) | {exception}
            vector = vector.replace(TermKind.EXCEPTION, tuple(sorted(tags)),
                                    Provenance.KB_REUSE)
        return ResolvedLicense(LicenseId.of(spdx), vector, None, exception, parsed.parse_result)

    # --------------------------------------------------------- expressions

    def expression(self, expr: str) -> tuple[Alternative, ...] | None:
        """Alternatives for an SPDX expression whose ids are all known, else None."""
        try:
            tree = _LICENSING.parse(expr, validate=False)
        except ExpressionError:
            return None
        if tree is None:
            return None
        try:
            dnf = _dnf(tree)
        except ValueError:
            return None
        out = []
        for conj in dnf:
            out.append(tuple(self.from_spdx(lid, lid, exc) for lid, exc in conj))
        return tuple(out)

    def names_in(self, text: str) -> list[str | None]:
        """License ids named in ``text``; None for a name without a version."""
        norm = normalized(text)
        for pattern, ident in _names().patterns:
            if pattern.search(norm):
                return [ident]
        return []

    # ------------------------------------------------------------ evidence

    def component_from_reference(self, text: str, kind: ComponentKind, evidence: EvidenceKind,
                                 aug: list[Augmentation]) -> ResolvedComponent | None:
        tag = _SPDX_TAG.search(text)
        if tag:
            alternatives = self.expression(tag.group(1).strip())
            if alternatives is not None:
                aug.extend(Augmentation(tag.group(0).strip(), lic.label)
                           for alt in alternatives for lic in alt if lic.unknown is None)
                return ResolvedComponent(kind, text, alternatives, evidence, augmented=True)
        names = self.names_in(text)
        if not names:
            return None
        alts = tuple((self.from_spdx(n, text.strip(), log_to=aug),) for n in names)
        return ResolvedComponent(kind, text, alts, evidence, augmented=True)

    def from_file(self, text: str, aug: list[Augmentation]) -> list[ResolvedComponent]:
        seg_key = self.cache.key("segment", text)
        seg = self.cache.get_or_compute(seg_key, lambda: self.gateway.segment_license_file(text))
        components: list[ResolvedComponent] = []
        for comp in seg.components:
            if comp.kind is ComponentKind.NOTICE:
                continue
            if comp.kind is ComponentKind.REFERENCE:
                ref_kind = ComponentKind.PRIMARY
                resolved = self.component_from_reference(comp.text, ref_kind,
                                                         EvidenceKind.LICENSE_FILE, aug)
                if resolved is not None:
                    components.append(resolved)
                continue
            lic = self.from_text(comp.text)
            components.append(ResolvedComponent(comp.kind, comp.text, ((lic,),),
                                                EvidenceKind.LICENSE_FILE))
        return components

    def from_field(self, text: str, aug: list[Augmentation]) -> list[ResolvedComponent]:
        alternatives = self.expression(text) if "\n" not in text.strip() else None
        if alternatives is not None and all(
            lic.license_id.canonical for alt in alternatives for lic in alt
        ):
            aug.extend(Augmentation(text, lic.label) for alt in alternatives for lic in alt
                       if lic.unknown is None)
            return [ResolvedComponent(ComponentKind.PRIMARY, text, alternatives,
                                      EvidenceKind.METADATA, augmented=True)]
        if len(text) > _FIELD_TEXT_CHARS or text.count("\n") >= 2:
            return self.from_file(text, aug)
        names = self.names_in(text)
        if names:
            alts = tuple((self.from_spdx(n, text, log_to=aug),) for n in names)
            return [ResolvedComponent(ComponentKind.PRIMARY, text, alts, EvidenceKind.METADATA,
                                      augmented=True)]
        lic = ResolvedLicense(LicenseId.of("UNKNOWN"), None,
                              Unrecognized(UnknownReason.UNRECOGNIZED,
                                           f"license field {text!r} not recognized"))
        return [ResolvedComponent(ComponentKind.PRIMARY, text, ((lic,),), EvidenceKind.METADATA)]

    def from_classifiers(self, evidence: list[LicenseEvidence],
                         aug: list[Augmentation]) -> list[ResolvedComponent]:
        alts = tuple((self.from_spdx(e.spdx, e.text, log_to=aug),) for e in evidence)
        text = "\n".join(e.text for e in evidence)
        return [ResolvedComponent(ComponentKind.PRIMARY, text, alts, EvidenceKind.CLASSIFIER,
                                  augmented=True)]

    def resolve_license(self, release: PackageRelease) -> LicenseResolution:
        evidence = extract_license_sources(release)
        if not evidence:
            return LicenseResolution(release, [], [], Unrecognized(
                UnknownReason.UNRECOGNIZED, "no license file, field or classifier"))
        candidates: list[tuple[list[ResolvedComponent], list[Augmentation]]] = []
        classifiers = [e for e in evidence if e.kind is EvidenceKind.CLASSIFIER]
        for ev in [e for e in evidence if e.kind is not EvidenceKind.CLASSIFIER] + (
            [classifiers[0]] if classifiers else []
        ):
            aug: list[Augmentation] = []
            try:
                if ev.kind is EvidenceKind.LICENSE_FILE:
                    comps = self.from_file(ev.text, aug)
                elif ev.kind is EvidenceKind.METADATA:
                    comps = self.from_field(ev.text, aug)
                else:
                    comps = self.from_classifiers(classifiers, aug)
            except TransportError as exc:
                return LicenseResolution(release, [], [], Unrecognized(
                    UnknownReason.BACKEND_FAILURE, str(exc)))
            if not any(c.kind is ComponentKind.PRIMARY for c in comps):
                continue
            candidates.append((comps, aug))
            if all(c.fully_recognized for c in comps if c.kind is ComponentKind.PRIMARY):
                break
        if not candidates:
            return LicenseResolution(release, [], [], Unrecognized(
                UnknownReason.UNRECOGNIZED, "license evidence names no license"))
        # the strongest evidence that fully resolves, else the strongest one
        for comps, aug in candidates:
            if all(c.fully_recognized for c in comps if c.kind is ComponentKind.PRIMARY):
                return LicenseResolution(release, comps, aug)
        comps, aug = candidates[0]
        return LicenseResolution(release, comps, aug)


def _dnf(node: Any) -> list[list[tuple[str | None, str | None]]]:
    """Expand an SPDX expression into alternatives of (license id, exception) lists."""
    if isinstance(node, LicenseWithExceptionSymbol):
        lid = spdx_license_id(node.license_symbol.key)
        exc = spdx_exception_id(node.exception_symbol.key)
        if lid is None or exc is None:
            raise ValueError(node)
        return [[(lid, exc)]]
    if isinstance(node, LicenseSymbol):
        lid = spdx_license_id(node.key)
        if lid is None:
            raise ValueError(node.key)
        return [[(lid, None)]]
    if isinstance(node, OR):
        return [conj for arg in node.args for conj in _dnf(arg)]
    if isinstance(node, AND):
        out: list[list[tuple[str | None, str | None]]] = [[]]
        for arg in node.args:
            out = [a + b for a in out for b in _dnf(arg)]
        return out
    raise ValueError(f"unsupported expression node {node!r}")


def resolve_license(
    release: PackageRelease,
    kb: KnowledgeBase,
    gateway: Gateway | None = None,
    cfg: ScanConfig | None = None,
    cache: ParseCache | None = None,
) -> LicenseResolution:
    """Turn a release's license evidence into parsed license components."""
    gateway = gateway or Gateway(MockReasoner(kb), kb.default_embedder())
    return _Resolver(kb, gateway, cfg or ScanConfig(), cache).resolve_license(release)


# -------------------------------------------------------------------- verdicts


@dataclass(frozen=True)
class PairVerdict:
    upstream: str
    downstream: str
    status: Status
    verdict: CompatibilityVerdict | None = None
    reason: UnknownReason | None = None
    detail: str = ""

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "upstream": self.upstream,
            "downstream": self.downstream,
            "status": self.status.value,
            "verdict": None if self.verdict is None else self.verdict.to_json_dict(),
            "reason": None if self.reason is None else self.reason.value,
            "detail": self.detail,
        }

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> PairVerdict:
        return cls(
            d["upstream"], d["downstream"], Status(d["status"]),
            None if d["verdict"] is None else CompatibilityVerdict.from_json_dict(d["verdict"]),
            None if d["reason"] is None else UnknownReason(d["reason"]),
            d.get("detail", ""),
        )


@dataclass(frozen=True)
class EdgeVerdict:
    upstream: str  # release ref
    downstream: str  # root release ref
    component: str  # "primary" or "third-party[n]"
    upstream_license: str
    status: Status
    reason: UnknownReason | None = None
    chosen: str | None = None  # alternative that made the edge compatible
    pairs: tuple[PairVerdict, ...] = ()

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "upstream": self.upstream,
            "downstream": self.downstream,
            "component": self.component,
            "upstream_license": self.upstream_license,
            "status": self.status.value,
            "reason": None if self.reason is None else self.reason.value,
            "chosen": self.chosen,
            "pairs": [p.to_json_dict() for p in self.pairs],
        }

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> EdgeVerdict:
        return cls(
            d["upstream"], d["downstream"], d["component"], d["upstream_license"],
            Status(d["status"]), None if d["reason"] is None else UnknownReason(d["reason"]),
            d.get("chosen"), tuple(PairVerdict.from_json_dict(p) for p in d.get("pairs", [])),
        )


def _pair(up: ResolvedLicense, down: ResolvedLicense) -> PairVerdict:
    for side in (up, down):
        if side.unknown is not None:
            return PairVerdict(up.label, down.label, Status.UNKNOWN, None, side.unknown.reason,
                               side.unknown.detail)
    assert up.vector is not None and down.vector is not None
    verdict = check((up.license_id, up.vector), (down.license_id, down.vector))
    if not verdict.compatible:
        return PairVerdict(up.label, down.label, Status.INCOMPATIBLE, verdict)
    if up.default_core or down.default_core:
        return PairVerdict(up.label, down.label, Status.UNKNOWN, verdict,
                           UnknownReason.DEFAULT_CORE_TERM,
                           "copyright or copyleft was not found in the license text")
    return PairVerdict(up.label, down.label, Status.COMPATIBLE, verdict)


def evaluate_edge(
    upstream_ref: str,
    downstream_ref: str,
    component: str,
    upstream: tuple[Alternative, ...],
    downstream: tuple[Alternative, ...],
) -> EdgeVerdict:
    """Verdict for one upstream license component against the root license.

    An upstream alternative is acceptable when each of its licenses is
    compatible with every license the root is offered under. The edge is
    Compatible when any alternative is acceptable.
    """
    down_licenses = list({lic.label: lic for alt in downstream for lic in alt}.values())
    pairs: list[PairVerdict] = []
    per_alt: list[Status] = []
    chosen = None
    for alt in upstream:
        verdicts = [_pair(u, d) for u in alt for d in down_licenses]
        pairs.extend(verdicts)
        status = rollup(v.status for v in verdicts)
        per_alt.append(status)
        if status is Status.COMPATIBLE and chosen is None:
            chosen = " AND ".join(u.label for u in alt)
    if Status.COMPATIBLE in per_alt:
        status = Status.COMPATIBLE
    elif Status.UNKNOWN in per_alt:
        status = Status.UNKNOWN
    else:
        status = Status.INCOMPATIBLE
    reason = None
    if status is Status.UNKNOWN:
        reason = next(p.reason for p in pairs if p.status is Status.UNKNOWN)
    return EdgeVerdict(upstream_ref, downstream_ref, component, _alternatives_label(upstream),
                       status, reason, chosen, tuple(pairs))


# ----------------------------------------------------------------------- scan


@dataclass
class ScanReport:
    root: str
    root_license: str
    edges: list[EdgeVerdict]
    third_party: list[EdgeVerdict]
    model_calls: int = 0
    resolution_log: list[str] = field(default_factory=list)

    @property
    def dependency_status(self) -> Status:
        return rollup(e.status for e in self.edges)

    @property
    def third_party_status(self) -> Status:
        return rollup(e.status for e in self.third_party)

    @property
    def package_status(self) -> Status:
        """Rollup over dependency edges and bundled third-party components."""
        return rollup([e.status for e in self.edges] + [e.status for e in self.third_party])

    def counts(self, group: str = "dependency") -> dict[Status, int]:
        items = self.edges if group == "dependency" else self.third_party
        return {s: sum(1 for e in items if e.status is s) for s in Status}

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "schema_version": 1,
            "root": self.root,
            "root_license": self.root_license,
            "package": self.package_status.value,
            "dependency_rollup": self.dependency_status.value,
            "third_party_rollup": self.third_party_status.value,
            "edges": [e.to_json_dict() for e in self.edges],
            "third_party": [e.to_json_dict() for e in self.third_party],
            "model_calls": self.model_calls,
            "resolution_log": list(self.resolution_log),
        }

    @classmethod
    def from_json_dict(cls, d: dict[str, Any]) -> ScanReport:
        return cls(
            d["root"], d["root_license"],
            [EdgeVerdict.from_json_dict(e) for e in d["edges"]],
            [EdgeVerdict.from_json_dict(e) for e in d["third_party"]],
            int(d.get("model_calls", 0)),
            list(d.get("resolution_log", [])),
        )


def scan(
    name: str,
    version: str | None,
    index: PackageIndex,
    kb: KnowledgeBase,
    gateway: Gateway | None = None,
    cfg: ScanConfig | None = None,
    cache: ParseCache | None = None,
) -> ScanReport:
    """Check every dependency and bundled component of a release against its license."""
    cfg = cfg or ScanConfig()
    gateway = gateway or Gateway(MockReasoner(kb), kb.default_embedder())
    tree = resolve(name, version, index)
    resolver = _Resolver(kb, gateway, cfg, cache)
    releases = [index.get(n.name, n.version) for n in tree.nodes]
    calls_before = gateway.call_counter
    with ThreadPoolExecutor(max_workers=max(1, cfg.max_workers)) as pool:
        resolutions = list(pool.map(resolver.resolve_license, releases))
    root_res = resolutions[0]
    root_license = root_res.effective()
    root_ref = root_res.release.ref
    edges = [
        evaluate_edge(res.release.ref, root_ref, "primary", res.effective(), root_license)
        for res in resolutions[1:]
    ]
    third_party: list[EdgeVerdict] = []
    for res in resolutions:
        for n, comp in enumerate(res.third_party):
            third_party.append(evaluate_edge(res.release.ref, root_ref, f"third-party[{n}]",
                                             comp.alternatives, root_license))
    notes = [str(e) for e in tree.resolution_log if e.note != "resolved"]
    for res in resolutions:
        notes.extend(f"{res.release.ref}: {a.reference!r} -> canonical {a.license_id} text"
                     for a in res.augmentation_log)
    return ScanReport(
        root=root_ref,
        root_license=_alternatives_label(root_license),
        edges=edges,
        third_party=third_party,
        model_calls=gateway.call_counter - calls_before,
        resolution_log=notes,
    )


def exit_code(report: ScanReport) -> int:
    return {Status.COMPATIBLE: 0, Status.INCOMPATIBLE: 1, Status.UNKNOWN: 2}[report.package_status]


def report_render(report: ScanReport, fmt: str = "human", explain: bool = False) -> str:
    """Render a report as a plain-text summary or as JSON."""
    if fmt == "json":
        return json.dumps(report.to_json_dict(), indent=2, sort_keys=True)
    if fmt != "human":
        raise ValueError(f"unknown format {fmt!r}")
    dep = report.counts("dependency")
    tp = report.counts("third-party")
    lines = [
        f"scan of {report.root} (license: {report.root_license})",
        f"package: {report.package_status.value}",
        f"dependencies: {len(report.edges)} checked, {dep[Status.INCOMPATIBLE]} incompatible, "
        f"{dep[Status.UNKNOWN]} unknown",
        f"third-party components: {len(report.third_party)} checked, "
        f"{tp[Status.INCOMPATIBLE]} incompatible, {tp[Status.UNKNOWN]} unknown",
        f"model calls: {report.model_calls}",
    ]
    for title, status in (("incompatible", Status.INCOMPATIBLE), ("unknown", Status.UNKNOWN)):
        items = [e for e in report.edges + report.third_party if e.status is status]
        if not items:
            continue
        lines.append(f"{title}:")
        for e in items:
            where = "" if e.component == "primary" else f" {e.component}"
            extra = f" ({e.reason.value})" if e.reason else ""
            lines.append(f"  {e.upstream}{where} [{e.upstream_license}]{extra}")
            if explain:
                for p in e.pairs:
                    label = p.verdict.label if p.verdict else "-"
                    lines.append(f"    {p.upstream} -> {p.downstream}: {label}"
                                 + (f" {p.detail}" if p.detail else ""))
                    if p.verdict:
                        lines.extend(f"      {step}" for step in p.verdict.trace)
    if explain and report.resolution_log:
        lines.append("notes:")
        lines.extend(f"  {n}" for n in report.resolution_log)
    return "\n".join(lines) + "\n"
