import json
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).parent.parent


def run_script(name, *args):
    return subprocess.run(
        [sys.executable, str(ROOT / "scripts" / name), *args],
        capture_output=True, text=True, cwd=ROOT, timeout=300)


def test_axiom_suite_script(tmp_path):
    out = tmp_path / "axioms.json"
    proc = run_script("run_axiom_suite.py", "--trials", "3", "--seed", "5",
                      "--out", str(out))
    assert proc.returncode == 0, proc.stdout + proc.stderr
    payload = json.loads(out.read_text())
    assert payload["trials"] == 3
    assert all(not r["failures"] for r in payload["reports"])
    assert "43/43 schemas sound" in proc.stdout


def test_roundtrip_script():
    proc = run_script("normal_form_roundtrip.py", "--count", "15", "--seed", "2")
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "15 circuits round-tripped exactly" in proc.stdout


def test_console_entry_point(tmp_path):
    circuit = tmp_path / "c.cgm"
    circuit.write_text("flip(1/2) ; not\n")
    proc = subprocess.run(["cgm", "eval", str(circuit), "--format", "json"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr
    payload = json.loads(proc.stdout)
    assert payload["outWord"] == "B"
