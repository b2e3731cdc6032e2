"""Write the package-index fixtures used by the test suite.

    python tools/make_fixtures.py

Creates ``tests/fixtures/index30`` (a 30-package index around the root
``webapp``), ``tests/fixtures/resolver/{diamond,conflict}`` and the
expected outcomes next to them. Expectations are tallied by hand from the
licenses planted below, not computed by licvar.
"""

from __future__ import annotations

import json
import shutil
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
KB = ROOT / "src" / "licvar" / "data" / "kb"
VARIANTS = ROOT / "tests" / "fixtures" / "variants"
OUT = ROOT / "tests" / "fixtures"


def kb_text(license_id: str) -> str:
    return (KB / license_id / "license.txt").read_text(encoding="utf-8")


def variant(name: str) -> str:
    return (VARIANTS / name).read_text(encoding="utf-8")


MIT_PLUS_BSD = (
    kb_text("MIT")
    + "\n\n----------------------------------------------------------------------\n"
    "Third-party software notices\n\n"
    "This package bundles a copy of the scanner module, distributed under the\n"
    "following license:\n\n"
    + kb_text("BSD-3-Clause")
)

APACHE_REFERENCE = (
    "Licensed under the Apache License, Version 2.0. The full license text is\n"
    "available at https://www.apache.org/licenses/LICENSE-2.0\n"
)


def rel(name, version, requires=(), license=None, classifiers=(), license_file=None):
    data = {"name": name, "version": version, "requires_dist": list(requires)}
    if license is not None:
        data["license"] = license
    if classifiers:
        data["classifiers"] = list(classifiers)
    if license_file is not None:
        data["license_file"] = license_file
    return data


C_MIT = "License :: OSI Approved :: MIT License"
C_BSD = "License :: OSI Approved :: BSD License"
C_GPL3 = "License :: OSI Approved :: GNU General Public License v3 (GPLv3)"

INDEX30 = [
    rel("webapp", "1.0.0",
        ["httpkit>=2.0", "datafmt", "clikit~=1.2", "plotlib", "gplcore>=2",
         "agpl-server", "mlstack", "legacy-utils", "dual-lib", "llvmish"],
        license_file=variant("mit_copyright.txt")),
    # httpkit 1.0.0 was GPL; the resolver must pick 2.1.0
    rel("httpkit", "1.0.0", license="GPL-3.0-only"),
    rel("httpkit", "2.1.0", ["urlparse-lite", "certbundle", "charsets", "pkgmeta",
                             "asyncio-extra"], license="Apache-2.0"),
    rel("urlparse-lite", "1.0", classifiers=["License :: OSI Approved :: BSD License",
                                             "Programming Language :: Python"],
        license="BSD-3-Clause"),
    rel("certbundle", "2023.1", license="MPL-2.0"),
    rel("charsets", "3.2", license_file=variant("mit_have_fun.txt")),
    rel("pkgmeta", "1.0", classifiers=[C_MIT]),
    rel("asyncio-extra", "0.9", license_file=variant("apache_trademark.txt")),
    rel("datafmt", "0.4.0", license="GPL-3.0-only"),
    rel("datafmt", "0.9.1", ["tinyjson", "yamlish"], license="MIT License"),
    rel("tinyjson", "1.0", license="Unlicense"),
    rel("yamlish", "6.0", license_file=MIT_PLUS_BSD),
    rel("clikit", "1.2.3", ["colorterm"], license="BSD-2-Clause"),
    rel("clikit", "1.3.0", ["colorterm"], license="BSD-2-Clause"),
    rel("clikit", "2.0.0", license="AGPL-3.0-only"),
    rel("colorterm", "0.4", license_file=APACHE_REFERENCE),
    rel("plotlib", "3.8", ["numcore>=1.20", "fontkit", "docgen"], license="MIT"),
    rel("numcore", "1.26", ["fastkernel"], license="BSD-3-Clause"),
    rel("fastkernel", "2.0", license_file=variant("bsd3_proprietary.txt")),
    rel("fontkit", "4.1", license="LGPL-2.1-only"),
    rel("docgen", "7.1", license_file=kb_text("BSD-2-Clause")),
    rel("gplcore", "1.0.0", license="MIT"),
    rel("gplcore", "2.0.0", ["six-compat>=1.0"], classifiers=[C_GPL3]),
    rel("agpl-server", "0.3", ["tinyjson", "oldbsd-a"], license="AGPL-3.0-only"),
    rel("oldbsd-a", "1.0", license="BSD"),
    rel("mlstack", "0.5", ["tensorish", "oldbsd-b", "gradlib", "retrylib"],
        license_file=kb_text("Apache-2.0")),
    rel("tensorish", "2.15", license="Apache-2.0 WITH LLVM-exception"),
    rel("oldbsd-b", "0.2", license="UNKNOWN", classifiers=[C_BSD]),
    rel("gradlib", "0.1", license=kb_text("MIT")),
    rel("retrylib", "8.2", license="Apache-2.0"),
    rel("legacy-utils", "1.0", ["six-compat", "datafmt<0.5"],
        license_file=variant("mpl_rewrapped.txt")),
    rel("six-compat", "1.16", license="MIT"),
    rel("dual-lib", "2.0", license="MIT OR GPL-3.0-only"),
    rel("llvmish", "17.0", ["zlibish"], license_file=variant("apache_llvm.txt")),
    rel("zlibish", "1.3", license="BSD-2-Clause"),
]

# hand tally against the MIT root
EXPECTED30 = {
    "root": "webapp==1.0.0",
    "package": "Incompatible",
    "incompatible": ["agpl-server", "fastkernel", "gplcore"],
    "unknown": ["oldbsd-a", "oldbsd-b"],
    "compatible": [
        "asyncio-extra", "certbundle", "charsets", "clikit", "colorterm", "datafmt",
        "docgen", "dual-lib", "fontkit", "gradlib", "httpkit", "legacy-utils", "llvmish",
        "mlstack", "numcore", "pkgmeta", "plotlib", "retrylib", "six-compat", "tensorish",
        "tinyjson", "urlparse-lite", "yamlish", "zlibish",
    ],
    "third_party": {"yamlish==6.0": "Compatible"},
    "versions": {"httpkit": "2.1.0", "clikit": "1.3.0", "gplcore": "2.0.0", "datafmt": "0.9.1"},
    "subscans": {
        "plotlib==3.8": "Incompatible",
        "agpl-server==0.3": "Unknown",
        "gplcore==2.0.0": "Compatible",
        "datafmt==0.9.1": "Compatible",
        "fastkernel==2.0": "Compatible",
    },
}

DIAMOND = [
    rel("app", "1.0", ["left", "right"], license="MIT"),
    rel("left", "1.0", ["shared>=1.0,<3"], license="MIT"),
    rel("right", "1.0", ["shared>=2.0"], license="MIT"),
    rel("shared", "1.5", license="MIT"),
    rel("shared", "2.1", license="MIT"),
    rel("shared", "3.0", license="MIT"),
]

# BFS: app(0) -> left(1), right(1); left -> shared 2.1 (highest below 3); right's
# requirement is already satisfied by 2.1
DIAMOND_TREE = [
    ["app", "1.0", 0, None],
    ["left", "1.0", 1, "app"],
    ["right", "1.0", 1, "app"],
    ["shared", "2.1", 2, "left"],
]

CONFLICT = [
    rel("tool", "1.0", ["base>=2", "plugin"], license="MIT"),
    rel("plugin", "1.0", ["base<2", "extras-lib"], license="MIT"),
    rel("base", "1.0", license="MIT"),
    rel("base", "2.0", license="MIT"),
    rel("base", "2.5", license="MIT"),
    rel("base", "3.0rc1", license="MIT"),
    rel("extras-lib", "1.0",
        ["missing-pkg>=1", "winonly; sys_platform == 'win32'", "docs-only; extra == 'docs'",
         "base>=9"],
        license="MIT"),
    rel("winonly", "0.1", license="MIT"),
    rel("docs-only", "0.1", license="MIT"),
]

# BFS: tool(0) -> base 2.5 (3.0rc1 is a pre-release), plugin(1); plugin's base<2 is a
# conflict kept at 2.5; extras-lib(2); missing-pkg is unresolvable; winonly is
# assumed to apply; docs-only needs the 'docs' extra and is skipped
CONFLICT_TREE = [
    ["tool", "1.0", 0, None],
    ["base", "2.5", 1, "tool"],
    ["plugin", "1.0", 1, "tool"],
    ["extras-lib", "1.0", 2, "plugin"],
    ["winonly", "0.1", 3, "extras-lib"],
]


def write_index(path: Path, releases: list[dict]) -> None:
    if path.exists():
        shutil.rmtree(path)
    for data in releases:
        target = path / data["name"] / f"{data['version']}.json"
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def write_json(path: Path, data: object) -> None:
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def main() -> None:
    write_index(OUT / "index30" / "packages", INDEX30)
    write_json(OUT / "index30" / "expected.json", EXPECTED30)
    for name, releases, tree in (("diamond", DIAMOND, DIAMOND_TREE),
                                 ("conflict", CONFLICT, CONFLICT_TREE)):
        write_index(OUT / "resolver" / name / "packages", releases)
        write_json(OUT / "resolver" / name / "expected.json", {"tree": tree})
    (OUT / "bundled_mit_bsd3.txt").write_text(MIT_PLUS_BSD, encoding="utf-8")
    print("fixtures written")


if __name__ == "__main__":
    main()
