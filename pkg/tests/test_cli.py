from __future__ import annotations

import json
import shutil
import subprocess
import sys

import pytest

from licvar import kb as kbmod
from licvar.cli import main

from conftest import FIXTURES

VARIANTS = FIXTURES / "variants"
INDEX = str(FIXTURES / "index30" / "packages")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_compare(capsys, tmp_path):
    a = tmp_path / "a.txt"
    a.write_text("The quick brown fox jumps over the lazy dog.")
    code, out, _ = run(capsys, "compare", str(a), str(a))
    assert code == 0 and out.strip() == "1.0000"
    code, out, _ = run(capsys, "compare", str(a), str(VARIANTS / "mit_have_fun.txt"), "--json")
    assert json.loads(out)["score"] < 0.2


def test_diff(capsys):
    code, out, _ = run(capsys, "diff", str(VARIANTS / "apache_trademark.txt"), "Apache-2.0")
    assert code == 0
    assert ", 3 added, " in out.splitlines()[0]
    code, out, _ = run(capsys, "diff", str(VARIANTS / "apache_trademark.txt"), "Apache-2.0", "--json")
    assert json.loads(out)["candidate_only"] == [34, 35, 36]


def test_parse(capsys):
    code, out, _ = run(capsys, "parse", str(VARIANTS / "apache_trademark.txt"))
    assert code == 0 and "matched standard: Apache-2.0" in out
    code, out, _ = run(capsys, "parse", str(VARIANTS / "apache_trademark.txt"), "--json")
    data = json.loads(out)
    assert data["model_sentences"] == [34, 35, 36]
    code, out, _ = run(capsys, "parse", str(VARIANTS / "mit_have_fun.txt"), "--baseline", "--json")
    assert json.loads(out)["matched_standard"] is None


def test_compat(capsys):
    code, out, _ = run(capsys, "compat", "GPL-2.0-only", "GPL-3.0-only", "--explain")
    assert code == 1 and "{I}" in out and "secondary:" in out
    code, out, _ = run(capsys, "compat", "LGPL-2.1-only", "GPL-2.0-only", "--json")
    assert code == 0 and json.loads(out)["kinds"] == ["Secondary", "Combinative"]
    code, out, _ = run(capsys, "compat", str(VARIANTS / "gpl2_classpath.txt"), "MIT")
    assert code == 0 and "{C}" in out
    code, _, err = run(capsys, "compat", "BSD", "MIT")
    assert code == 2 and "BSD" in err


def test_deps(capsys):
    code, out, _ = run(capsys, "deps", "app", "1.0", "--index", str(FIXTURES / "resolver" / "diamond" / "packages"))
    assert code == 0 and out.splitlines()[0] == "app 1.0"
    code, out, _ = run(capsys, "deps", "tool", "1.0", "--json",
                       "--index", str(FIXTURES / "resolver" / "conflict" / "packages"))
    assert [n["name"] for n in json.loads(out)["nodes"]] == ["tool", "base", "plugin", "extras-lib", "winonly"]


def test_scan(capsys):
    code, out, _ = run(capsys, "scan", "webapp", "1.0.0", "--index", INDEX)
    assert code == 1
    assert "dependencies: 29 checked, 3 incompatible, 2 unknown" in out
    code, out, _ = run(capsys, "scan", "datafmt", "0.9.1", "--index", INDEX, "--json")
    assert code == 0 and json.loads(out)["package"] == "Compatible"
    code, _, _ = run(capsys, "scan", "agpl-server", "0.3", "--index", INDEX)
    assert code == 2


def test_operational_errors(capsys, tmp_path):
    code, _, err = run(capsys, "scan", "webapp", "1.0.0", "--index", str(tmp_path / "none"))
    assert code == 3 and "error" in err
    code, _, err = run(capsys, "parse", str(tmp_path / "missing.txt"))
    assert code == 3
    code, _, err = run(capsys, "parse", str(VARIANTS / "mit_have_fun.txt"), "--backend", "remote")
    assert code == 3 and "endpoint" in err


def test_kb_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "kb", "validate")
    assert code == 0 and out.startswith("ok: 11 licenses")
    target = tmp_path / "kb"
    shutil.copytree(kbmod.bundled_path(), target)
    (target / "embeddings.npz").unlink()
    code, out, _ = run(capsys, "kb", "build", "--kb", str(target))
    assert code == 0 and "11 licenses" in out
    code, out, _ = run(capsys, "kb", "validate", "--kb", str(target))
    assert code == 0
    code, _, err = run(capsys, "kb", "validate", "--kb", str(tmp_path))
    assert code == 3


def test_console_script():
    exe = shutil.which("licvar")
    if exe is None:
        pytest.skip("console script not installed")
    proc = subprocess.run([exe, "compat", "MIT", "GPL-3.0-only"], capture_output=True, text=True)
    assert proc.returncode == 0 and "{S}" in proc.stdout


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "licvar.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "scan" in proc.stdout
