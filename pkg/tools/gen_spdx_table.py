"""Regenerate src/licvar/data/spdx.json from the SPDX list bundled with `packaging`."""

import json
from pathlib import Path

from packaging.licenses import _spdx

out = {
    "source": "packaging.licenses (SPDX license list)",
    "licenses": sorted(v["id"] for v in _spdx.LICENSES.values()),
    "deprecated": sorted(v["id"] for v in _spdx.LICENSES.values() if v["deprecated"]),
    "exceptions": sorted(v["id"] for v in _spdx.EXCEPTIONS.values()),
}
path = Path(__file__).resolve().parents[1] / "src" / "licvar" / "data" / "spdx.json"
path.write_text(json.dumps(out, indent=1) + "\n", encoding="utf-8")
print(f"wrote {len(out['licenses'])} licenses, {len(out['exceptions'])} exceptions to {path}")
