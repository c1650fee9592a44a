import json
from pathlib import Path

import pytest

from singmod.cli import main

GOLDEN = Path(__file__).parent / "golden"

CASES = {
    "classnum": ["classnum", "--delta", "-23"],
    "forms": ["forms", "--delta", "-15"],
    "psi": ["psi", "--ell", "2", "--delta", "-3"],
    "denominators": ["denominators", "--A", "13"],
    "isogeny": ["isogeny", "--z", "1,1,-1023", "--w", "1,2,-1023", "--n", "2"],
    "jeval": ["jeval", "--form", "1,1,5", "--prec-bits", "64"],
    "verify-constants": ["verify-constants"],
    "masser-bound": ["masser-bound", "--k", "2", "--X", "100000000", "--ell", "1"],
    "check-hypothesis": ["check-hypothesis", "--k", "6", "--A", "162", "--X", "10000000000", "--Y", "277777777"],
    "solve-cases": ["solve-cases", "--table", "t5"],
    "search-watkins": ["search-watkins", "--bound", "10000", "--max-h", "1", "--quiet"],
    "search-2elem": ["search-2elem", "--no-bands", "--quiet"],
    "verify-relation": ["verify-relation", "--values", "1728,-32768,-884736", "--exps", "10,6,-10"],
    "lattice-bruteforce": ["lattice-bruteforce", "--values", "1728,-32768,-884736", "--cap", "12"],
}


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", sorted(CASES))
def test_json_golden(capsys, name):
    code, out, _ = run(capsys, CASES[name] + ["--format", "json"])
    assert code == 0
    doc = json.loads(out)
    golden = GOLDEN / f"{name}.json"
    assert doc == json.loads(golden.read_text())


@pytest.mark.parametrize("name", ["classnum", "jeval", "solve-cases", "search-watkins", "lattice-bruteforce"])
def test_byte_identical(capsys, name):
    first = run(capsys, CASES[name] + ["--format", "json"])[1]
    second = run(capsys, CASES[name] + ["--format", "json"])[1]
    assert first == second


def test_golden_values(capsys):
    doc = json.loads(run(capsys, CASES["lattice-bruteforce"] + ["--format", "json"])[1])
    assert doc["basis"] == [["5", "3", "-5"]]
    doc = json.loads(run(capsys, CASES["jeval"] + ["--format", "json"])[1])
    assert doc["integer"] == "-884736"
    doc = json.loads(run(capsys, CASES["search-2elem"] + ["--format", "json"])[1])
    assert (doc["count"], doc["max_abs"]) == ("101", "7392")


def test_exact_numbers_are_strings(capsys):
    doc = json.loads(run(capsys, CASES["masser-bound"] + ["--format", "json"])[1])
    assert doc == {"bound": "20662426080000"}


def test_search_watkins_acceptance(capsys):
    code, out, _ = run(capsys, ["search-watkins", "--bound", "1000000", "--max-h", "64", "--quiet", "--format", "json"])
    assert code == 0
    assert json.loads(out)["max_abs_delta_found"] == "991027"


def test_threads_do_not_change_output(capsys):
    base = ["search-watkins", "--bound", "50000", "--max-h", "10", "--quiet", "--format", "json"]
    one = run(capsys, base)[1]
    two = run(capsys, base + ["--threads", "2", "--chunks", "4"])[1]
    assert one == two


def test_progress_goes_to_stderr(capsys):
    code, out, err = run(capsys, ["search-watkins", "--bound", "10000", "--max-h", "1", "--format", "json"])
    assert code == 0 and "sieve" in err
    json.loads(out)


def test_solve_cases_all_reports_totals_and_fails(capsys):
    code, out, _ = run(capsys, ["solve-cases", "--table", "all"])
    assert "totals 9+9+72+300+9+8+2+6+6+3" in out
    assert code == 1


def test_verify_relation_human(capsys):
    code, out, _ = run(capsys, ["verify-relation", "--values", "1728,-32768,-884736", "--exps", "10,6,-10"])
    assert code == 0 and "verified" in out
    code, out, _ = run(capsys, ["verify-relation", "--values", "1728", "--exps", "1"])
    assert code == 1


def test_csv_outputs(capsys):
    code, out, _ = run(capsys, ["forms", "--delta", "-23", "--format", "csv"])
    assert code == 0
    assert out.strip().split("\n") == ["a,b,c", "1,1,6", "2,-1,3", "2,1,3"]
    code, out, _ = run(capsys, ["search-watkins", "--bound", "1000", "--max-h", "1", "--quiet", "--format", "csv"])
    assert out.split("\n")[0] == "delta,h,flags"


def test_false_hypothesis_exit_code(capsys):
    code, out, _ = run(capsys, ["check-hypothesis", "--k", "2", "--A", "1000000", "--X", "10000", "--Y", "10000", "--format", "json"])
    assert code == 1
    assert json.loads(out)["hypothesis"] is False


@pytest.mark.parametrize(
    "argv",
    [
        ["classnum", "--delta", "-5"],
        ["classnum"],
        ["nonsense"],
        ["classnum", "--delta", "-23", "--bogus", "1"],
        ["jeval", "--tau", "0,1/4"],
        ["masser-bound", "--k", "0", "--X", "5"],
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as e:
        code = e.code
    assert code == 2
