from __future__ import annotations

import json
import threading

import pytest
from hypothesis import given
from hypothesis import strategies as st

from licvar.depgraph import EvidenceKind, PackageIndex, PackageRelease, load_index
from licvar.errors import NotFoundError, TransportError
from licvar.gateway import ComponentKind, CountingBackend, Gateway, MockReasoner
from licvar.model import TermKind
from licvar.pipeline import (
    ParseCache,
    ScanReport,
    Status,
    UnknownReason,
    exit_code,
    report_render,
    resolve_license,
    rollup,
    scan,
)

from conftest import FIXTURES, read_fixture

MIT_CLASSIFIER = "License :: OSI Approved :: MIT License"


def index_of(*releases: PackageRelease) -> PackageIndex:
    return PackageIndex(list(releases))


def statuses(report: ScanReport) -> dict[str, Status]:
    return {e.upstream.split("==")[0]: e.status for e in report.edges}


class Down(CountingBackend):
    def __init__(self):
        super().__init__("down")

    def _complete(self, task, prompt, request):
        raise TransportError("service unavailable", attempts=5)


# ------------------------------------------------------------ resolve_license


def test_verbatim_mit_file(kb, gateway):
    res = resolve_license(PackageRelease("x", "1", license_file=kb["MIT"].full_text), kb, gateway)
    (comp,) = res.components
    (((lic,),)) = comp.alternatives
    assert comp.kind is ComponentKind.PRIMARY and comp.evidence is EvidenceKind.LICENSE_FILE
    assert lic.license_id.identifier == "MIT"
    assert lic.vector.same_terms(kb["MIT"].term_vector)
    assert lic.parse_result.model_calls == 0
    assert gateway.reasoner.calls_by_task() == {"segment": 1}


def test_bundled_file(kb, gateway):
    res = resolve_license(PackageRelease("x", "1", license_file=read_fixture("bundled_mit_bsd3.txt")),
                          kb, gateway)
    assert [c.kind for c in res.components] == [ComponentKind.PRIMARY, ComponentKind.THIRD_PARTY]
    assert [c.label for c in res.components] == ["MIT", "BSD-3-Clause"]
    bsd = res.third_party[0].alternatives[0][0]
    assert bsd.vector.same_terms(kb["BSD-3-Clause"].term_vector)


def test_bare_bsd_is_version_ambiguous(kb, gateway):
    res = resolve_license(PackageRelease("x", "1", license_field="BSD"), kb, gateway)
    (((lic,),)) = res.effective()
    assert lic.unknown.reason is UnknownReason.VERSION_AMBIGUOUS


def test_no_evidence_is_unrecognized(kb, gateway):
    res = resolve_license(PackageRelease("x", "1", license_field="UNKNOWN"), kb, gateway)
    assert res.unrecognized.reason is UnknownReason.UNRECOGNIZED
    assert res.effective()[0][0].unknown.reason is UnknownReason.UNRECOGNIZED


def test_unknown_field_text(kb, gateway):
    res = resolve_license(PackageRelease("x", "1", license_field="Frobnicator Public License"), kb, gateway)
    assert res.effective()[0][0].unknown.reason is UnknownReason.UNRECOGNIZED


def test_spdx_field_is_augmented(kb, gateway):
    res = resolve_license(PackageRelease("x", "1", license_field="Apache-2.0"), kb, gateway)
    (comp,) = res.components
    assert comp.augmented and comp.label == "Apache-2.0"
    assert [a.license_id for a in res.augmentation_log] == ["Apache-2.0"]
    assert comp.alternatives[0][0].vector.same_terms(kb["Apache-2.0"].term_vector)


def test_or_later_uses_only_text(kb, gateway):
    res = resolve_license(PackageRelease("x", "1", license_field="GPL-2.0-or-later"), kb, gateway)
    lic = res.components[0].alternatives[0][0]
    assert lic.license_id.identifier == "GPL-2.0-or-later"
    assert lic.vector.same_terms(kb["GPL-2.0-only"].term_vector)


def test_with_exception_adds_tag(kb, gateway):
    res = resolve_license(PackageRelease("x", "1", license_field="GPL-2.0-only WITH Classpath-exception-2.0"),
                          kb, gateway)
    lic = res.components[0].alternatives[0][0]
    assert lic.label == "GPL-2.0-only WITH Classpath-exception-2.0"
    assert "Classpath-exception-2.0" in lic.vector.licenses(TermKind.EXCEPTION)


def test_reference_file_is_augmented(kb, gateway):
    res = resolve_license(PackageRelease("x", "1", license_file="Licensed under Apache-2.0\n"), kb, gateway)
    (comp,) = res.components
    assert comp.augmented and comp.label == "Apache-2.0"


def test_spdx_tag_reference(kb, gateway):
    res = resolve_license(PackageRelease("x", "1", license_file="SPDX-License-Identifier: MIT OR Apache-2.0\n"),
                          kb, gateway)
    assert res.components[0].label == "MIT OR Apache-2.0"


def test_classifier_fallback(kb, gateway):
    res = resolve_license(PackageRelease("x", "1", license_field="UNKNOWN",
                                         classifiers=(MIT_CLASSIFIER,)), kb, gateway)
    assert res.components[0].label == "MIT"
    assert res.components[0].evidence is EvidenceKind.CLASSIFIER


def test_stronger_evidence_wins_when_recognized(kb, gateway):
    res = resolve_license(PackageRelease("x", "1", license_field="BSD",
                                         classifiers=(MIT_CLASSIFIER,)), kb, gateway)
    assert res.components[0].label == "MIT"
    res = resolve_license(PackageRelease("x", "1", license_field="Apache-2.0",
                                         classifiers=(MIT_CLASSIFIER,)), kb, gateway)
    assert res.components[0].label == "Apache-2.0"


def test_backend_failure(kb):
    gw = Gateway(Down(), kb.default_embedder())
    res = resolve_license(PackageRelease("x", "1", license_file=kb["MIT"].full_text), kb, gw)
    assert res.unrecognized.reason is UnknownReason.BACKEND_FAILURE


# ---------------------------------------------------------------------- scan


def test_gpl_root_with_mit_leaf(kb):
    index = index_of(PackageRelease("app", "1", ("leaf",), license_field="GPL-3.0-only"),
                     PackageRelease("leaf", "1", license_field="MIT"))
    report = scan("app", "1", index, kb)
    assert statuses(report) == {"leaf": Status.COMPATIBLE}
    assert report.package_status is Status.COMPATIBLE and exit_code(report) == 0


def test_proprietary_transitive_dependency(kb):
    index = index_of(
        PackageRelease("app", "1", ("mid",), license_field="MIT"),
        PackageRelease("mid", "1", ("blob",), license_field="MIT"),
        PackageRelease("blob", "1", license_file=read_fixture("variants", "nvidia_custom.txt")))
    report = scan("app", "1", index, kb)
    assert statuses(report) == {"mid": Status.COMPATIBLE, "blob": Status.INCOMPATIBLE}
    assert report.package_status is Status.INCOMPATIBLE and exit_code(report) == 1


def test_unrecognized_dependency_rolls_up_unknown(kb):
    index = index_of(PackageRelease("app", "1", ("old",), license_field="MIT"),
                     PackageRelease("old", "1"))
    report = scan("app", "1", index, kb)
    assert report.edges[0].reason is UnknownReason.UNRECOGNIZED
    assert report.package_status is Status.UNKNOWN and exit_code(report) == 2


def test_default_core_term_is_never_compatible(kb):
    index = index_of(PackageRelease("app", "1", ("odd",), license_field="MIT"),
                     PackageRelease("odd", "1", license_file="Be excellent to each other.\n"))
    edge = scan("app", "1", index, kb).edges[0]
    assert edge.status is Status.UNKNOWN
    assert edge.reason is UnknownReason.DEFAULT_CORE_TERM


def test_dual_license_any_alternative(kb):
    index = index_of(PackageRelease("app", "1", ("dual", "strict"), license_field="MIT"),
                     PackageRelease("dual", "1", license_field="GPL-3.0-only OR MIT"),
                     PackageRelease("strict", "1", license_field="GPL-3.0-only AND MIT"))
    report = scan("app", "1", index, kb)
    dual, strict = report.edges
    assert dual.status is Status.COMPATIBLE and dual.chosen == "MIT"
    assert strict.status is Status.INCOMPATIBLE


def test_dual_licensed_root_needs_every_license(kb):
    index = index_of(PackageRelease("app", "1", ("lib",), license_field="MIT OR GPL-3.0-only"),
                     PackageRelease("lib", "1", license_field="LGPL-2.1-only"))
    assert scan("app", "1", index, kb).edges[0].status is Status.COMPATIBLE
    index = index_of(PackageRelease("app", "1", ("lib",), license_field="MIT OR GPL-2.0-only"),
                     PackageRelease("lib", "1", license_field="Apache-2.0"))
    assert scan("app", "1", index, kb).edges[0].status is Status.INCOMPATIBLE


def test_root_not_found(kb):
    with pytest.raises(NotFoundError):
        scan("ghost", "1", PackageIndex([]), kb)


def test_cache_coherence(kb, gateway):
    variant = read_fixture("variants", "apache_trademark.txt")
    index = index_of(PackageRelease("app", "1", ("a", "b"), license_field="Apache-2.0"),
                     PackageRelease("a", "1", license_file=variant),
                     PackageRelease("b", "1", license_file=variant))
    cache = ParseCache()
    report = scan("app", "1", index, kb, gateway, cache=cache)
    single = index_of(PackageRelease("app", "1", ("a",), license_field="Apache-2.0"),
                      PackageRelease("a", "1", license_file=variant))
    alone = scan("app", "1", single, kb, Gateway(MockReasoner(kb), kb.default_embedder()))
    assert report.model_calls == alone.model_calls == gateway.call_counter
    assert cache.hits > 0
    again = scan("app", "1", index, kb, gateway, cache=cache)
    assert again.model_calls == 0


def test_cache_computes_once_under_contention():
    cache = ParseCache()
    calls = []
    barrier = threading.Barrier(8)

    def work():
        barrier.wait()
        return cache.get_or_compute("k", lambda: calls.append(1) or len(calls))

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert calls == [1] and cache.misses == 1 and cache.hits == 7


def test_cache_propagates_errors():
    cache = ParseCache()
    with pytest.raises(RuntimeError):
        cache.get_or_compute("k", lambda: (_ for _ in ()).throw(RuntimeError("boom")))
    with pytest.raises(RuntimeError):
        cache.get_or_compute("k", lambda: 1)


@given(st.lists(st.sampled_from(list(Status))))
def test_rollup_rule(items):
    got = rollup(items)
    if Status.INCOMPATIBLE in items:
        assert got is Status.INCOMPATIBLE
    elif Status.UNKNOWN in items:
        assert got is Status.UNKNOWN
    else:
        assert got is Status.COMPATIBLE


# -------------------------------------------------------------------- render


def test_render_empty_root(kb):
    report = scan("solo", "1", index_of(PackageRelease("solo", "1", license_field="MIT")), kb)
    text = report_render(report)
    assert "dependencies: 0 checked, 0 incompatible, 0 unknown" in text
    assert "third-party components: 0 checked, 0 incompatible, 0 unknown" in text
    assert "package: Compatible" in text


def test_render_fixture_counts_and_round_trip(kb):
    index = load_index(FIXTURES / "index30" / "packages")
    report = scan("webapp", "1.0.0", index, kb)
    text = report_render(report, explain=True)
    assert "dependencies: 29 checked, 3 incompatible, 2 unknown" in text
    assert "third-party components: 1 checked, 0 incompatible, 0 unknown" in text
    assert "proprietary-upstream" in text
    data = report_render(report, "json")
    assert ScanReport.from_json_dict(json.loads(data)) == report
    assert report_render(report, "json") == data
    with pytest.raises(ValueError):
        report_render(report, "xml")
