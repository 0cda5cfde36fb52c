import json
import subprocess
import sys

import pytest

from vdlab.cli import EXIT_INPUT, EXIT_NUMERIC, EXIT_PASS, EXIT_VIOLATED, main

GRID = "1:30:40"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_curve_document(capsys):
    code, out, _ = run(capsys, "curve", "exp(z)", "--functionals", "m,T,A", "--grid", GRID)
    doc = json.loads(out)
    assert code == EXIT_PASS and set(doc["curves"]) == {"m", "T", "A"}
    assert doc["config"]["per_decade"] == 40
    assert len(doc["curves"]["T"]["values"]) == len(doc["curves"]["T"]["r"])


def test_output_is_byte_identical_across_runs(capsys):
    argv = ("curve", "1 + exp(z)", "--functionals", "N,L", "--target", "1", "--grid", GRID)
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_out_directory_receives_json_and_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "curve", "exp(z)", "--functionals", "T,n", "--target", "1",
                       "--grid", GRID, "--out", str(tmp_path))
    assert code == EXIT_PASS
    assert json.loads((tmp_path / "curve.json").read_text()) == json.loads(out)
    assert (tmp_path / "curve_T.csv").read_text().startswith("r,value,label,accuracy_flag")
    assert (tmp_path / "curve_n.csv").exists()


def test_deficiency_sum_and_bound_checks(capsys):
    code, out, _ = run(capsys, "deficiency", "exp(z)", "--kind", "E", "--target", "0",
                       "--target", "inf", "--grid", "1:50:100")
    doc = json.loads(out)
    assert code == EXIT_PASS and doc["pass"]
    assert [c["check"] for c in doc["checks"]] == ["sum", "bergweiler-bock", "bergweiler-bock"]


def test_deficiency_of_a_constant_is_an_input_error(capsys):
    code, _, err = run(capsys, "deficiency", "5", "--grid", GRID)
    assert code == EXIT_INPUT and "transcendental" in err


def test_parse_errors_report_their_position(capsys):
    code, _, err = run(capsys, "curve", "exp(")
    assert code == EXIT_INPUT and "position 4" in err


@pytest.mark.parametrize("argv", [
    ("curve", "exp(z)", "--functionals", "Q"),
    ("curve", "exp(z)", "--grid", "50:1"),
    ("curve", "exp(z)", "--grid", "0.01:5"),
    ("curve", "exp(z)", "--m-exponent", "1"),
    ("density",),
    ("density", "--generator", "spiral 1"),
    ("verify-ode", "no/such/file.ode"),
    ("standardness", "no/such/file.ode"),
])
def test_bad_input_exits_two(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_INPUT


def test_argparse_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        main(["curve"])
    assert info.value.code == 2


def test_numeric_failure_exits_three(capsys):
    # e^(e^(e^10)) has a log-modulus beyond double range
    code, _, err = run(capsys, "curve", "exp(exp(exp(z)))", "--grid", "1:10:10")
    assert code == EXIT_NUMERIC and "Undefined" in err


def test_density_generators(capsys):
    code, out, _ = run(capsys, "density", "--generator", "comb 2 1", "--R", "1000")
    rep = json.loads(out)["report"]
    assert code == EXIT_PASS and abs(rep["upper_linear_density"] - 0.5) <= 0.02


def test_density_from_file(capsys, tmp_path):
    path = tmp_path / "set.json"
    path.write_text("[[1, 2], [5, 10]]")
    code, out, _ = run(capsys, "density", "--file", str(path), "--R", "10")
    assert code == EXIT_PASS and json.loads(out)["report"]["linear_measure"] == 6


def test_borel_lemma(capsys):
    code, out, _ = run(capsys, "lemma", "borel", "--F", "exp(r)", "--phi", "r", "--C", "2",
                       "--r0", "2", "--R", "100")
    rep = json.loads(out)["report"]
    assert code == EXIT_PASS and rep["lhs"] <= rep["rhs"]
    assert run(capsys, "lemma", "borel", "--C", "1")[0] == EXIT_INPUT


@pytest.mark.parametrize("lemma", ["zero-count", "min-modulus", "log-deriv"])
def test_function_lemmas(capsys, lemma):
    code, out, _ = run(capsys, "lemma", lemma, "--grid", GRID)
    assert code == EXIT_PASS and json.loads(out)["report"]["pass"]


def test_verify_ode_reports_residuals(capsys, equations_dir):
    code, out, _ = run(capsys, "verify-ode", str(equations_dir / "wittich_sharp.ode"),
                       "--theorems", "T1.1", "--grid", GRID)
    doc = json.loads(out)
    (sol,) = doc["solutions"]
    assert code == EXIT_PASS and sol["max_relative_residual"] <= 1e-9
    assert sol["verdicts"][0]["verdict"] == "violated"


def test_verify_ode_refuses_essential_singularities(capsys, equations_dir):
    code, _, err = run(capsys, "verify-ode", str(equations_dir / "exp_inverse.ode"))
    assert code == EXIT_INPUT and "essential singularity" in err


def test_standardness_exit_code_follows_the_verdicts(capsys, equations_dir):
    frei = str(equations_dir / "frei.ode")
    code, out, _ = run(capsys, "standardness", frei, "--solution", "0", "--theorems", "T1.1",
                       "--grid", GRID)
    assert code == EXIT_VIOLATED
    assert json.loads(out)["results"][0]["verdicts"][0]["verdict"] == "violated"
    code, out, _ = run(capsys, "standardness", str(equations_dir / "airy.ode"), "--theorems",
                       "C2.4", "--grid", "1:20:80", "--rays", "128")
    assert code == EXIT_PASS
    assert all(r["verdicts"][0]["corroboration"]["corroborated"]
               for r in json.loads(out)["results"])
    assert run(capsys, "standardness", frei, "--theorems", "T9.9")[0] == EXIT_INPUT


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "vdlab", "density", "--generator", "empty"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["report"]["linear_measure"] == 0
