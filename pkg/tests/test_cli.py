"""Command-line surface: subcommands, exit codes, output formats."""

import json

import numpy as np
import pytest

from sinhgordon.cli import build_parser, main
from conftest import pair_problem_dict, threshold_problem_dict

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2
EXIT_MISMATCH = 3


@pytest.fixture
def case1_path(write_json):
    return write_json("case1.json",
                      pair_problem_dict((1.0, 0.0), (-1.0, 0.0), 1.0))


@pytest.fixture
def case2_path(write_json):
    return write_json("case2.json",
                      pair_problem_dict((1.0, 0.0), (0.0, -1.0), 1.0))


@pytest.fixture
def case4_path(write_json):
    return write_json("case4.json",
                      pair_problem_dict((1.0, 1.0), (-1.0, -1.0), 1.0))


@pytest.fixture
def threshold_path(write_json):
    return write_json("threshold.json", threshold_problem_dict(-0.5))


@pytest.fixture
def kw_escaped_path(write_json):
    # Kazdan-Warner instance whose only root escapes every search ball,
    # so the numeric degree honestly disagrees with the table
    return write_json("kw_escaped.json", {
        "vertices": [{"id": "x1", "mu": 1.0}, {"id": "x2", "mu": 9.0}],
        "edges": [{"u": "x1", "v": "x2", "w": 1.0}],
        "h": {"x1": -3.0, "x2": 0.0},
        "c": -2.0,
    })


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


# ---- solve -----------------------------------------------------------------

def test_solve_reports_closed_form_root(capsys, case1_path):
    code, doc = run_json(capsys, ["solve", case1_path])
    assert code == EXIT_OK
    assert doc["converged"] is True
    u = doc["solution"]["u"]
    x = float(np.arcsinh(1.0))
    assert u["x1"] == pytest.approx(x, abs=1e-8)
    assert u["x2"] == pytest.approx(x - 1.0, abs=1e-8)
    assert doc["solution"]["det_sign"] == -1
    assert doc["manifest"]["command"] == "solve"
    assert doc["manifest"]["config"]["tol"] == 1e-12


def test_solve_reads_start_file(capsys, case1_path, write_json):
    start = write_json("start.json", {"u": {"x1": 2.0, "x2": 1.0}})
    code, doc = run_json(capsys, ["solve", case1_path, "--start", start])
    assert code == EXIT_OK
    assert doc["solution"]["converged_from"] == {"x1": 2.0, "x2": 1.0}


def test_solve_failure_exits_2(capsys, case2_path):
    code, doc = run_json(capsys, ["solve", case2_path])
    assert code == EXIT_SOLVER
    assert doc["converged"] is False
    assert doc["error"]


def test_solve_deterministic_output(capsys, case1_path):
    code1, doc1 = run_json(capsys, ["solve", case1_path])
    code2, doc2 = run_json(capsys, ["solve", case1_path])
    assert code1 == code2 == EXIT_OK
    doc1["manifest"].pop("wall_time_ms")
    doc2["manifest"].pop("wall_time_ms")
    assert doc1 == doc2


def test_solve_writes_out_file(capsys, case1_path, tmp_path):
    out = tmp_path / "result.json"
    assert main(["solve", case1_path, "--out", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["converged"] is True


# ---- input errors -------------------------------------------------------------

def test_malformed_json_exits_1(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"vertices": [\n  broken\n]}\n')
    assert main(["solve", str(bad)]) == EXIT_INPUT
    err = capsys.readouterr().err
    assert "line 2" in err


def test_missing_file_exits_1(capsys, tmp_path):
    assert main(["solve", str(tmp_path / "nope.json")]) == EXIT_INPUT
    assert "error" in capsys.readouterr().err


def test_duplicate_edge_exits_1(capsys, write_json):
    doc = pair_problem_dict((1.0, 0.0), (-1.0, 0.0), 1.0)
    doc["edges"] = doc["edges"] + [{"u": "x2", "v": "x1", "w": 2.0}]
    path = write_json("dup.json", doc)
    assert main(["solve", path]) == EXIT_INPUT
    assert "more than once" in capsys.readouterr().err


def test_missing_coefficient_vertex_exits_1(capsys, write_json):
    doc = pair_problem_dict((1.0, 0.0), (-1.0, 0.0), 1.0)
    del doc["h_plus"]["x2"]
    path = write_json("gap.json", doc)
    assert main(["solve", path]) == EXIT_INPUT
    assert "x2" in capsys.readouterr().err


def test_unknown_solver_key_exits_1(capsys, write_json):
    doc = pair_problem_dict((1.0, 0.0), (-1.0, 0.0), 1.0,
                            solver={"speed": 11})
    path = write_json("opts.json", doc)
    assert main(["solve", path]) == EXIT_INPUT
    assert "speed" in capsys.readouterr().err


def test_tol_flag_beats_file_setting(capsys, write_json):
    doc = pair_problem_dict((1.0, 0.0), (-1.0, 0.0), 1.0,
                            solver={"tol": 0.01, "dedup_tol": 0.1})
    path = write_json("loose.json", doc)
    code, doc1 = run_json(capsys, ["solve", path])
    assert code == EXIT_OK
    assert doc1["manifest"]["config"]["tol"] == 0.01
    code, doc2 = run_json(capsys, ["solve", path, "--tol", "1e-12"])
    assert code == EXIT_OK
    assert doc2["manifest"]["config"]["tol"] == 1e-12
    assert doc2["solution"]["residual_inf_norm"] <= 1e-12


# ---- enumerate -------------------------------------------------------------------

def test_enumerate_fixed_radius(capsys, case1_path):
    code, doc = run_json(capsys, ["enumerate", case1_path, "--radius", "8"])
    assert code == EXIT_OK
    assert doc["radius"] == 8.0
    assert doc["radius_stable"] is None
    assert len(doc["solutions"]) == 1
    assert doc["attempted"] == 200


def test_enumerate_selects_radius(capsys, case4_path):
    code, doc = run_json(capsys, ["enumerate", case4_path])
    assert code == EXIT_OK
    assert doc["radius"] == 8.0
    assert doc["radius_stable"] is True
    assert len(doc["solutions"]) == 1


# ---- degree -----------------------------------------------------------------------

def test_degree_agreement(capsys, case1_path):
    code, doc = run_json(capsys, ["degree", case1_path])
    assert code == EXIT_OK
    assert doc["formula_degree"] == -1
    assert doc["numeric_degree"] == -1
    assert doc["agreement"] == "match"
    assert doc["radius_stable"] is True


def test_degree_formula_only_flag(capsys, case1_path):
    code, doc = run_json(capsys, ["degree", case1_path, "--formula-only"])
    assert code == EXIT_OK
    assert doc["formula_degree"] == -1
    assert doc["numeric_degree"] is None
    assert doc["agreement"] == "formula_only"


def test_degree_mismatch_exits_3(capsys, kw_escaped_path):
    code, doc = run_json(capsys, ["degree", kw_escaped_path])
    assert code == EXIT_MISMATCH
    assert doc["agreement"] == "mismatch"
    assert doc["formula_degree"] == 1
    assert doc["numeric_degree"] == 0


# ---- sweep ---------------------------------------------------------------------------

def parse_csv(text):
    lines = text.strip().split("\n")
    assert lines[0].startswith("# manifest: ")
    assert lines[1].startswith("# cstar_estimate:")
    header = lines[2].split(",")
    assert header == ["c", "n_solutions", "numeric_degree", "formula_degree",
                      "min_residual"]
    rows = [line.split(",") for line in lines[3:]]
    cstar_text = lines[1].split(":", 1)[1].strip()
    cstar = float(cstar_text) if cstar_text else None
    return cstar, rows


def test_sweep_csv_shape_and_threshold(capsys, threshold_path):
    code = main(["sweep", threshold_path, "--range=-1.2:-0.1",
                 "--steps", "12"])
    assert code == EXIT_OK
    cstar, rows = parse_csv(capsys.readouterr().out)
    assert len(rows) == 12
    assert cstar is not None and -0.7 < cstar < -0.5
    counts = {round(float(r[0]), 9): int(r[1]) for r in rows}
    assert counts[-1.2] == 0
    assert counts[-0.1] >= 2


def test_sweep_empty_range(capsys, case4_path):
    code = main(["sweep", case4_path, "--range=0:1", "--steps", "0"])
    assert code == EXIT_OK
    cstar, rows = parse_csv(capsys.readouterr().out)
    assert cstar is None
    assert rows == []


def test_sweep_matched_pair_always_one_root(capsys, case4_path):
    code = main(["sweep", case4_path, "--range=-2:2", "--steps", "9"])
    assert code == EXIT_OK
    _, rows = parse_csv(capsys.readouterr().out)
    assert len(rows) == 9
    assert all(int(r[1]) == 1 for r in rows)
    assert all(int(r[3]) == 1 for r in rows)
    assert 0.0 in {float(r[0]) for r in rows}


def test_sweep_json_format(capsys, threshold_path):
    code, doc = run_json(capsys, ["sweep", threshold_path,
                                  "--range=-0.3:-0.1", "--steps", "2",
                                  "--format", "json"])
    assert code == EXIT_OK
    assert "cstar_estimate" in doc
    assert len(doc["rows"]) == 2
    assert doc["rows"][0]["n_solutions"] >= 2


def test_sweep_rejects_bad_range(capsys, case4_path):
    assert main(["sweep", case4_path, "--range=zz", "--steps", "3"]) \
        == EXIT_INPUT


def test_sweep_rejects_unknown_parameter(capsys, case4_path):
    assert main(["sweep", case4_path, "--param", "radius", "--range=0:1",
                 "--steps", "2"]) == EXIT_INPUT


# ---- examples and verify ----------------------------------------------------------

def test_examples_two_vertex_case(capsys, tmp_path):
    out = tmp_path / "rows.json"
    code = main(["examples", "case1", "--c", "1.0", "--out", str(out)])
    text = capsys.readouterr().out
    assert code == EXIT_OK
    assert "PASS" in text and "FAIL" not in text
    rows = json.loads(out.read_text())["rows"]
    assert all(r["passed"] for r in rows)


def test_examples_kw_table(capsys):
    assert main(["examples", "kw-appendix"]) == EXIT_OK
    text = capsys.readouterr().out
    assert text.count("PASS") == 7
    assert "FAIL" not in text


def test_examples_unknown_name(capsys):
    assert main(["examples", "case9"]) == EXIT_INPUT
    assert "case9" in capsys.readouterr().err


def test_verify_defaults():
    args = build_parser().parse_args(["verify"])
    assert args.trials == 200 and args.seed == 0


def test_verify_runs_all_checks(capsys):
    code, doc = run_json(capsys, ["verify", "--trials", "40"])
    assert code == EXIT_OK
    outcomes = doc["outcomes"]
    assert [o["name"] for o in outcomes] == [
        "max_principle", "kato", "harnack", "elliptic", "green"]
    assert all(o["passed"] for o in outcomes)


def test_verify_user_graph(capsys, write_json):
    path = write_json("graph.json", {
        "vertices": [{"id": "a", "mu": 1.0}, {"id": "b", "mu": 2.0},
                     {"id": "c", "mu": 1.0}],
        "edges": [{"u": "a", "v": "b", "w": 1.0},
                  {"u": "b", "v": "c", "w": 2.0}],
    })
    code, doc = run_json(capsys, ["verify", path, "--trials", "40"])
    assert code == EXIT_OK
    assert all(o["passed"] for o in doc["outcomes"])


def test_verify_rejects_broken_graph(capsys, write_json):
    path = write_json("broken.json", {"edges": []})
    assert main(["verify", path]) == EXIT_INPUT


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip()
