"""Generate annotation.json for each bundled KB license.

Sentence labels start from the offline keyword rules and are then corrected
by the per-license overrides below, which record the manual review. Term
vectors are written by hand here. Run ``licvar kb build`` afterwards to
refresh embeddings.

    python tools/annotate_kb.py [--kb DIR] [--show]
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from licvar.gateway.mock import MockReasoner
from licvar.model import TermKind, TermVector, check_valid
from licvar.textproc import segment

K = TermKind

NAMES = {
    "MIT": "MIT License",
    "BSD-2-Clause": 'BSD 2-Clause "Simplified" License',
    "BSD-3-Clause": 'BSD 3-Clause "New" or "Revised" License',
    "Apache-2.0": "Apache License 2.0",
    "MPL-2.0": "Mozilla Public License 2.0",
    "LGPL-2.1-only": "GNU Lesser General Public License v2.1 only",
    "LGPL-3.0-only": "GNU Lesser General Public License v3.0 only",
    "GPL-2.0-only": "GNU General Public License v2.0 only",
    "GPL-3.0-only": "GNU General Public License v3.0 only",
    "AGPL-3.0-only": "GNU Affero General Public License v3.0 only",
    "Unlicense": "The Unlicense",
}

GPL_FAMILY = [
    "AGPL-3.0-only",
    "AGPL-3.0-or-later",
    "GPL-2.0-only",
    "GPL-2.0-or-later",
    "GPL-3.0-only",
    "GPL-3.0-or-later",
    "LGPL-2.1-only",
    "LGPL-2.1-or-later",
    "LGPL-3.0-only",
    "LGPL-3.0-or-later",
]

_GPL3 = {
    K.COPYRIGHT: 3,
    K.COPYLEFT: 3,
    K.CHANGE_STATEMENT: 1,
    K.PATENT_GRANT: 1,
    K.TRADEMARK_LIMITATION: 1,
    K.ATTRIBUTION_RETENTION: 1,
    K.ENHANCED_ATTRIBUTION: 1,
    K.PATENT_LITIGATION_TERMINATION: 1,
}

VECTORS: dict[str, dict[TermKind, object]] = {
    "MIT": {K.COPYRIGHT: 3, K.ATTRIBUTION_RETENTION: 1},
    "BSD-2-Clause": {K.COPYRIGHT: 2, K.ATTRIBUTION_RETENTION: 1},
    "BSD-3-Clause": {K.COPYRIGHT: 2, K.ATTRIBUTION_RETENTION: 1, K.TRADEMARK_LIMITATION: 1},
    "Apache-2.0": {
        K.COPYRIGHT: 3,
        K.CHANGE_STATEMENT: 1,
        K.PATENT_GRANT: 1,
        K.TRADEMARK_LIMITATION: 1,
        K.ATTRIBUTION_RETENTION: 1,
        K.PATENT_LITIGATION_TERMINATION: 1,
    },
    "MPL-2.0": {
        K.COPYRIGHT: 3,
        K.COPYLEFT: 1,
        K.PATENT_GRANT: 1,
        K.TRADEMARK_LIMITATION: 1,
        K.ATTRIBUTION_RETENTION: 1,
        K.PATENT_LITIGATION_TERMINATION: 1,
        K.SECONDARY_LICENSE: GPL_FAMILY,
    },
    "LGPL-2.1-only": {
        K.COPYRIGHT: 3,
        K.COPYLEFT: 2,
        K.CHANGE_STATEMENT: 1,
        K.ATTRIBUTION_RETENTION: 1,
        K.ENHANCED_ATTRIBUTION: 1,
        K.SECONDARY_LICENSE: [
            "GPL-2.0-only",
            "GPL-2.0-or-later",
            "GPL-3.0-only",
            "GPL-3.0-or-later",
        ],
        K.GPL_COMBINATION: ["GPL-2.0-only", "GPL-3.0-only"],
        K.USAGE_LIMITATION: ["geographic-distribution"],
    },
    "LGPL-3.0-only": {
        **_GPL3,
        K.COPYLEFT: 2,
        K.SECONDARY_LICENSE: ["GPL-3.0-only", "GPL-3.0-or-later"],
        K.GPL_COMBINATION: ["GPL-3.0-only"],
    },
    "GPL-2.0-only": {
        K.COPYRIGHT: 3,
        K.COPYLEFT: 3,
        K.CHANGE_STATEMENT: 1,
        K.ATTRIBUTION_RETENTION: 1,
        K.ENHANCED_ATTRIBUTION: 1,
        K.USAGE_LIMITATION: ["geographic-distribution"],
    },
    "GPL-3.0-only": {**_GPL3, K.GPL_COMBINATION: ["AGPL-3.0-only"]},
    "AGPL-3.0-only": {**_GPL3, K.NETWORK_USE: 1, K.GPL_COMBINATION: ["GPL-3.0-only"]},
    "Unlicense": {K.COPYRIGHT: 1},
}

# (substring of the sentence text, labels to add, labels to remove); "*" removes all
OVERRIDES: dict[str, list[tuple[str, list[str], list[str]]]] = {
    # the NOTICE mention only bounds the trademark restriction
    "Apache-2.0": [("This License does not grant permission to use the trade names", [], ["attribution_retention"])],
}


def label_sentences(license_id: str, text: str) -> list[dict[str, object]]:
    mock = MockReasoner()
    out = []
    for unit in segment(text):
        labels = set(mock.labels_for(unit.text))
        for needle, add, remove in OVERRIDES.get(license_id, []):
            if needle in unit.text:
                if "*" in remove:
                    labels.clear()
                labels -= {K(r) for r in remove if r != "*"}
                labels |= {K(a) for a in add}
        out.append(
            {"text": unit.text, "labels": sorted(k.value for k in labels) or ["other"]}
        )
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kb", default=str(Path(__file__).parents[1] / "src/licvar/data/kb"))
    ap.add_argument("--show", action="store_true", help="print labels instead of writing")
    args = ap.parse_args()
    root = Path(args.kb)
    for license_id, values in VECTORS.items():
        text = (root / license_id / "license.txt").read_text(encoding="utf-8")
        vector = TermVector.from_mapping(values, fill_defaults=True)
        check_valid(vector)
        sentences = label_sentences(license_id, text)
        if args.show:
            print(f"== {license_id}")
            for i, s in enumerate(sentences):
                print(f"{i:4d} {','.join(s['labels']):40.40s} {s['text'][:110]}")
            continue
        doc = {
            "schema_version": 1,
            "id": license_id,
            "name": NAMES[license_id],
            "term_vector": vector.to_json_dict(),
            "sentences": sentences,
        }
        (root / license_id / "annotation.json").write_text(
            json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        print(f"wrote {license_id}: {len(sentences)} sentences")


if __name__ == "__main__":
    main()
