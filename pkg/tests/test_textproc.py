from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from licvar.textproc import diff_sentences, segment

from conftest import read_fixture

doc_chars = st.sampled_from(list("Aab1 .;:!?()\n\n-,\t"))
docs = st.lists(doc_chars, max_size=200).map("".join)


def squash(text: str) -> str:
    return "".join(text.split())


def test_two_period_paragraph():
    units = segment("The software is provided as is. No warranty is given.")
    assert [u.text for u in units] == ["The software is provided as is.", "No warranty is given."]


def test_abbreviation_and_number_guards():
    assert len(segment("Sec. 2.1 applies.")) == 1
    assert len(segment("See e.g. the notice in version 2.0 of the License.")) == 1


def test_semicolon_list():
    doc = ("Redistributions must:\n"
           "- retain the copyright notice;\n"
           "- reproduce this list of conditions;\n"
           "- not use the names of contributors.\n")
    units = segment(doc)
    items = [u.text for u in units if u.text.startswith("-")]
    assert items == ["- retain the copyright notice;", "- reproduce this list of conditions;",
                     "- not use the names of contributors."]


def test_inline_semicolons_split_before_capitals():
    units = segment("You may copy it; You may share it; you may not sell it.")
    assert [u.text for u in units] == ["You may copy it;", "You may share it; you may not sell it."]


def test_headings_are_units_and_hints():
    units = segment("TERMS AND CONDITIONS\n\n1. Definitions.\nA word means a word. Another rule.")
    assert units[0].text == "TERMS AND CONDITIONS"
    assert units[1].section_hint == "TERMS AND CONDITIONS"
    assert units[-1].section_hint == "1. Definitions."


def test_empty_document():
    assert segment("") == []
    assert segment("  \n\n ---- \n") == []


@given(docs)
def test_segment_reconstructs_document(doc):
    units = segment(doc)
    if units:
        assert squash("".join(u.text for u in units)) == squash(doc)
    assert [u.index for u in units] == list(range(len(units)))
    assert all(u.normalized for u in units)
    assert segment(doc) == units


def test_kb_texts_reconstruct(kb):
    for lic in kb.licenses.values():
        if "*" in lic.full_text:
            continue  # comment-box borders are dropped
        joined = squash("".join(s.text for s in lic.sentences))
        assert joined == squash(lic.full_text), lic.id


def test_diff_identical(kb):
    units = segment(kb["MIT"].full_text)
    d = diff_sentences(units, units)
    assert d.matched == [(i, i) for i in range(len(units))]
    assert d.candidate_only == [] and d.standard_only == []


def test_diff_one_inserted_sentence(kb):
    std = segment(kb["MIT"].full_text)
    cand_text = kb["MIT"].full_text.replace(
        "The above copyright notice", "Be kind to each other. The above copyright notice")
    cand = segment(cand_text)
    d = diff_sentences(cand, std)
    assert len(d.candidate_only) == 1
    assert cand[d.candidate_only[0]].text == "Be kind to each other."
    assert d.standard_only == []


def test_diff_apache_trademark_variant(kb):
    cand = segment(read_fixture("variants", "apache_trademark.txt"))
    std = segment(kb["Apache-2.0"].full_text)
    d = diff_sentences(cand, std)
    assert d.candidate_only == [34, 35, 36]
    assert all("trademark" in std[j].normalized or "6" in std[j].normalized for j in d.standard_only)


sentences = st.lists(st.sampled_from(["Alpha one.", "Beta two.", "Gamma three.", "Delta four."]),
                     max_size=12).map(" ".join)


@given(sentences, sentences)
def test_diff_properties(a, b):
    ua, ub = segment(a), segment(b)
    d = diff_sentences(ua, ub)
    assert all(ua[i].normalized == ub[j].normalized for i, j in d.matched)
    cand = [i for i, _ in d.matched] + d.candidate_only
    assert sorted(cand) == list(range(len(ua)))
    std = [j for _, j in d.matched] + d.standard_only
    assert sorted(std) == list(range(len(ub)))
    assert len(diff_sentences(ub, ua).matched) == len(d.matched)
    assert len(diff_sentences(ua, ua).matched) == len(ua)
