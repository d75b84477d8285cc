import json

import pytest

from cgm.cli import (EXIT_BOUNDARY, EXIT_CAP, EXIT_NOT_EQUIVALENT,
                     EXIT_NO_MATCH, EXIT_OK, EXIT_PARSE, main)

MIXTURE = """# p-mixture of N(3,1) and N(0,4)
let n31 = (stdnormal * one) ; (id(R) * scal(3)) ; add in
let n04 = stdnormal ; scal(2) in
flip(3/10) * (n31 * n04) ; ite
"""


@pytest.fixture
def mixture_file(tmp_path):
    path = tmp_path / "mixture.cgm"
    path.write_text(MIXTURE)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestEval:
    def test_json_table(self, mixture_file, capsys):
        code, out, _ = run(capsys, "eval", mixture_file, "--format", "json")
        assert code == EXIT_OK
        payload = json.loads(out)
        weights = sorted(c["weight"]
                         for c in payload["table"][0]["components"])
        assert weights == ["3/10", "7/10"]

    def test_parse_error_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.cgm"
        bad.write_text("flip(1/2) ; ; not")
        code, _, err = run(capsys, "eval", str(bad))
        assert code == EXIT_PARSE
        assert f"{bad}:1:13" in err

    def test_type_error_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.cgm"
        bad.write_text("and ; add")
        code, _, err = run(capsys, "eval", str(bad))
        assert code == EXIT_PARSE
        assert "type error" in err

    def test_cap_exit(self, tmp_path, capsys):
        wide = tmp_path / "wide.cgm"
        wide.write_text("id(" + "B" * 13 + ")")
        code, _, err = run(capsys, "eval", str(wide))
        assert code == EXIT_CAP
        assert "cap" in err

    def test_single_row(self, tmp_path, capsys):
        path = tmp_path / "gate.cgm"
        path.write_text("not")
        code, out, _ = run(capsys, "eval", str(path), "--input", "1",
                           "--format", "json")
        assert code == EXIT_OK
        payload = json.loads(out)
        assert len(payload["table"]) == 1
        assert payload["table"][0]["input"] == "1"


class TestEquiv:
    def test_normalize_then_equiv(self, mixture_file, tmp_path, capsys):
        out_path = tmp_path / "nf.cgm"
        cert_path = tmp_path / "cert.json"
        code, _, _ = run(capsys, "normalize", mixture_file,
                         "-o", str(out_path), "--cert", str(cert_path))
        assert code == EXIT_OK
        cert = json.loads(cert_path.read_text())
        assert cert["q"] == 0 and len(cert["leaves"]) == 1
        code, out, _ = run(capsys, "equiv", mixture_file, str(out_path))
        assert code == EXIT_OK
        assert out.startswith("EQUIVALENT ")

    def test_not_equivalent(self, mixture_file, tmp_path, capsys):
        other = tmp_path / "other.cgm"
        other.write_text(MIXTURE.replace("flip(3/10)", "flip(1/3)"))
        code, out, _ = run(capsys, "equiv", mixture_file, str(other))
        assert code == EXIT_NOT_EQUIVALENT
        assert out.startswith("NOT EQUIVALENT")

    def test_boundary_mismatch(self, tmp_path, capsys):
        one = tmp_path / "one.cgm"
        one.write_text("not")          # B -> B
        other = tmp_path / "other.cgm"
        other.write_text("scal(2)")    # R -> R
        code, _, err = run(capsys, "equiv", str(one), str(other))
        assert code == EXIT_BOUNDARY
        assert "boundaries" in err


class TestAxioms:
    def test_suite_single(self, capsys):
        code, out, _ = run(capsys, "axioms", "--axiom", "E10",
                           "--trials", "10", "--seed", "7")
        assert code == EXIT_OK
        assert "E10: PASS (10 trials)" in out

    def test_json_report(self, capsys):
        code, out, _ = run(capsys, "axioms", "--axiom", "A1", "--trials", "3",
                           "--format", "json")
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["passed"] is True
        assert payload["reports"][0]["name"] == "A1"


class TestSample:
    def test_reproducible(self, mixture_file, capsys):
        code, first, _ = run(capsys, "sample", mixture_file, "-n", "10",
                             "--seed", "5")
        assert code == EXIT_OK
        _, second, _ = run(capsys, "sample", mixture_file, "-n", "10",
                           "--seed", "5")
        assert first == second
        _, third, _ = run(capsys, "sample", mixture_file, "-n", "10",
                          "--seed", "6")
        assert first != third

    def test_requires_matching_inputs(self, tmp_path, capsys):
        path = tmp_path / "gate.cgm"
        path.write_text("ite")
        code, _, err = run(capsys, "sample", str(path))
        assert code == EXIT_PARSE
        assert "wants 1 bits and 2 reals" in err

    def test_with_inputs(self, tmp_path, capsys):
        path = tmp_path / "gate.cgm"
        path.write_text("ite")
        code, out, _ = run(capsys, "sample", str(path), "-n", "3",
                           "--seed", "2", "--bits", "1", "--reals", "2.5,7.0")
        assert code == EXIT_OK
        assert out.splitlines() == ["(, [2.5])"] * 3


class TestRenderAndRewrite:
    def test_render_deterministic(self, mixture_file, capsys):
        code, first, _ = run(capsys, "render", mixture_file)
        assert code == EXIT_OK and first.startswith("digraph circuit")
        _, second, _ = run(capsys, "render", mixture_file)
        assert first == second

    def test_render_json_ast(self, mixture_file, capsys):
        code, out, _ = run(capsys, "render", mixture_file, "--format", "json")
        assert code == EXIT_OK
        assert json.loads(out)["kind"] == "seq"

    def test_rewrite_script(self, tmp_path, capsys):
        circuit = tmp_path / "c.cgm"
        circuit.write_text("copyR ; (id(R) * copyR)")
        script = tmp_path / "steps.txt"
        script.write_text("# re-associate the copy comb\n"
                          "apply A1 at root dir L2R\n")
        code, out, _ = run(capsys, "rewrite", str(circuit), str(script))
        assert code == EXIT_OK
        assert out.strip() == "copyR ; copyR * id(R)"

    def test_rewrite_with_binding(self, tmp_path, capsys):
        circuit = tmp_path / "c.cgm"
        circuit.write_text(
            "(flip(1/2) * id(RR) ; ite) * id(R) ; (flip(1/2) * id(RR) ; ite)")
        script = tmp_path / "steps.txt"
        script.write_text("apply E10 at root dir L2R with p=1/2, q=1/2\n")
        code, out, _ = run(capsys, "rewrite", str(circuit), str(script))
        assert code == EXIT_OK
        assert "flip(1/4)" in out and "flip(1/3)" in out

    def test_rewrite_no_match(self, tmp_path, capsys):
        circuit = tmp_path / "c.cgm"
        circuit.write_text("add")
        script = tmp_path / "steps.txt"
        script.write_text("apply A1 at root dir L2R\n")
        code, _, err = run(capsys, "rewrite", str(circuit), str(script))
        assert code == EXIT_NO_MATCH
        assert "does not match" in err


class TestConfig:
    def test_backend_flags(self, tmp_path, capsys):
        path = tmp_path / "float.cgm"
        path.write_text("flip(0.25)")
        code, out, _ = run(capsys, "eval", str(path), "--format", "json")
        assert code == EXIT_OK
        weights = {c["weight"] for row in json.loads(out)["table"]
                   for c in row["components"]}
        assert weights == {0.25, 0.75}
        code, out, _ = run(capsys, "eval", str(path), "--format", "json",
                           "--backend", "rational")
        assert code == EXIT_OK
        weights = {c["weight"] for row in json.loads(out)["table"]
                   for c in row["components"]}
        assert all(isinstance(w, str) and "/" in w for w in weights)

    def test_normalize_json_payload(self, mixture_file, capsys):
        code, out, _ = run(capsys, "normalize", mixture_file,
                           "--format", "json")
        assert code == EXIT_OK
        payload = json.loads(out)
        assert "flip(7/10)" in payload["circuit"]
        assert payload["certificate"]["boolMarginal"][0]["input"] == ""

    def test_tolerance_env(self, mixture_file, tmp_path, capsys, monkeypatch):
        # widen the tolerance enough that a 1e-6 perturbation passes
        other = tmp_path / "close.cgm"
        other.write_text(MIXTURE.replace("scal(3)", "scal(3.0000001)"))
        code, _, _ = run(capsys, "equiv", mixture_file, str(other))
        assert code == EXIT_NOT_EQUIVALENT
        monkeypatch.setenv("CGM_TOLERANCE", "1e-3")
        code, _, _ = run(capsys, "equiv", mixture_file, str(other))
        assert code == EXIT_OK
