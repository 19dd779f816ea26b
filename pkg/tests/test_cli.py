import io
import os
import json
import pytest

from i3audit import Dataset, __version__
from i3audit.cli import (DatasetFormatError, dataset_to_csv, main, parse_dataset_csv, read_dataset_file,
                         read_scenario_file, read_scheme_file, write_dataset_file)
from i3audit.evolution import EXAMPLE_A1, example_b_endpoints, example_b_like

GOLDEN_A = os.path.join(os.path.dirname(__file__), "data", "example_a_strict_lowest.csv")


@pytest.fixture
def b1_csv(tmp_path):
    path = tmp_path / "B1.csv"
    assert main(["example", "--name", "B1", "--output", str(path)]) == 0
    return path


@pytest.fixture
def b_like_json(tmp_path):
    path = tmp_path / "b-like.json"
    assert main(["example", "--name", "b-like", "--output", str(path)]) == 0
    return path


def test_example_a_matches_golden_file(tmp_path, capsys):
    path = tmp_path / "a.json"
    assert main(["example", "--name", "A", "--output", str(path)]) == 0
    capsys.readouterr()
    assert main(["scenario", str(path)]) == 0
    with open(GOLDEN_A, encoding="utf-8") as reader:
        assert capsys.readouterr().out == reader.read()


def test_example_a_average_weight(tmp_path, capsys):
    path = tmp_path / "a.json"
    main(["example", "--name", "A", "--output", str(path)])
    capsys.readouterr()
    assert main(["scenario", str(path), "--ties", "average-weight"]) == 0
    rows = capsys.readouterr().out.splitlines()[1:]
    assert len(rows) == 9
    assert all(row.split(",")[3] == "76" for row in rows)


def test_example_a_fractional(tmp_path, capsys):
    path = tmp_path / "a.json"
    main(["example", "--name", "A", "--output", str(path)])
    capsys.readouterr()
    assert main(["scenario", str(path), "--rule", "fractional"]) == 0
    rows = capsys.readouterr().out.splitlines()[1:]
    assert {row.split(",")[4] for row in rows} == {"1.9100"}


def test_compute_case_a1(tmp_path, capsys):
    path = tmp_path / "A1.json"
    write_dataset_file(Dataset.from_histogram("A1", EXAMPLE_A1), str(path))
    assert main(["compute", str(path), "--format", "csv"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "A1,40,52,76,1.9000"
    assert main(["compute", str(path), "--format", "csv", "--rule", "inclusive", "--ties", "average-weight"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "A1,40,52,77,1.9250"


def test_scenario_emit_json(tmp_path, capsys):
    path = tmp_path / "a.json"
    main(["example", "--name", "A", "--output", str(path)])
    capsys.readouterr()
    assert main(["--digits", "2", "scenario", str(path), "--emit", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["scenario"] == "A"
    assert data["policy"] == "strict-less/lowest"
    assert [case["i3"] for case in data["cases"]][:3] == ["76", "66", "67"]
    assert data["cases"][1]["r"] == "1.65"


def test_scenario_with_owners_and_relative_initial(b1_csv, tmp_path, capsys):
    scenario = tmp_path / "grow.yaml"
    scenario.write_text("name: grow\ninitial: B1.csv\nsteps:\n  - {case: B2, op: add_paper, owner: N}\n")
    capsys.readouterr()
    assert main(["scenario", str(scenario)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ("case,n_papers,n_citations,i3,r,i3_H,r_H,rank_H,i3_L,r_L,rank_L,"
                        "i3_M,r_M,rank_M,i3_N,r_N,rank_N")
    assert lines[1] == "B1,15,27,19,1.2667,8,2.0000,1,7,1.0000,2.5000,4,1.0000,2.5000,,,"
    assert lines[2] == "B2,16,27,28,1.7500,12,3.0000,1,7,1.0000,3.5000,8,2.0000,2,1,1.0000,3.5000"


def test_scenario_table(b_like_json, capsys):
    capsys.readouterr()
    assert main(["scenario", str(b_like_json), "--emit", "table"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("b-like (6PR, strict-less/lowest)")
    assert "B73" in out


def test_compute_csv_and_table(b1_csv, capsys):
    capsys.readouterr()
    assert main(["compute", str(b1_csv), "--format", "csv"]) == 0
    assert capsys.readouterr().out == "case,n_papers,n_citations,i3,r\nB1,15,27,19,1.2667\n"

    assert main(["compute", str(b1_csv)]) == 0
    out = capsys.readouterr().out
    assert "B1 (6PR, strict-less/lowest): 15 papers, 27 citations, I3 = 19, R = 1.2667" in out
    assert "percentage" in out and "weight" in out


def test_compute_by_owner(b1_csv, capsys):
    capsys.readouterr()
    assert main(["compute", str(b1_csv), "--format", "json", "--by-owner", "--rank-by", "i3"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["total_i3"]["num"] == 19
    assert data["rank_by"] == "i3"
    assert {owner: ind["i3"]["num"] for owner, ind in data["per_owner"].items()} == {"H": 8, "L": 7, "M": 4}
    assert data["per_owner"]["L"]["rank"]["num"] == 2

    assert main(["compute", str(b1_csv), "--format", "json"]) == 0
    assert "per_owner" not in json.loads(capsys.readouterr().out)

    assert main(["compute", str(b1_csv), "--format", "csv", "--by-owner"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "owner,papers,citations,i3,r,share,rank"
    assert lines[1].startswith("H,4,12,8,2.0000,")
    assert lines[-1].startswith("total,15,27,19,")


def test_compute_from_stdin(monkeypatch, capsys):
    b1, _, _ = example_b_endpoints()
    monkeypatch.setattr("sys.stdin", io.StringIO(dataset_to_csv(b1)))
    assert main(["compute", "-", "--format", "csv"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == ",15,27,19,1.2667"


def test_compute_yaml_record_list(tmp_path, capsys):
    path = tmp_path / "few.yaml"
    path.write_text("- {id: 1, owner: X, citations: 0}\n- {id: 2, owner: Y, citations: 4}\n")
    capsys.readouterr()
    assert main(["compute", str(path), "--format", "csv"]) == 0
    # 0% and 50% positions
    assert capsys.readouterr().out.splitlines()[1] == "few,2,4,3,1.5000"


def test_compute_fractional(b1_csv, capsys):
    capsys.readouterr()
    assert main(["compute", str(b1_csv), "--rule", "fractional", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["policy"] == "fractional"


def test_custom_scheme_file(b1_csv, tmp_path, capsys):
    scheme = tmp_path / "two.yaml"
    scheme.write_text("name: 2PR\nboundaries: [40, 100]\nweights: [1, 2]\n")
    capsys.readouterr()
    assert main(["compute", str(b1_csv), "--scheme", str(scheme)]) == 0
    assert "B1 (2PR, strict-less/lowest): 15 papers, 27 citations, I3 = 23," in capsys.readouterr().out

    broken = tmp_path / "broken.yaml"
    broken.write_text("boundaries: [40, 100]\n")
    assert main(["compute", str(b1_csv), "--scheme", str(broken)]) == 2


def test_audit_b_like(b_like_json, capsys):
    capsys.readouterr()
    assert main(["audit", str(b_like_json), "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["count"] == 7
    assert data["kind"] == "strict-independence"
    assert data["violations"][0]["from_case"] == "B1"

    assert main(["audit", str(b_like_json), "--ties", "average-weight", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["count"] == 0

    assert main(["audit", str(b_like_json)]) == 0
    out = capsys.readouterr().out
    assert "7 violation(s)" in out and "B46" in out


def test_audit_fail_on_violation(b_like_json):
    assert main(["audit", str(b_like_json), "--fail-on-violation"]) == 4
    assert main(["audit", str(b_like_json), "--ties", "average-weight", "--fail-on-violation"]) == 0
    assert main(["audit", str(b_like_json), "--check", "same-improvement", "--fail-on-violation"]) == 0


@pytest.mark.parametrize("args", [
    ["--rule", "fractional", "--ties", "lowest"],
    ["--rule", "rounded"],
    ["--ties", "random"],
    ["--rank-by", "h"],
])
def test_invalid_policy_exit_code(b1_csv, args):
    assert main(["compute", str(b1_csv)] + args) == 3


def test_invalid_input_exit_code(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["compute", str(empty)]) == 2

    header = tmp_path / "header.csv"
    header.write_text("id,name,citations\n1,H,3\n")
    assert main(["compute", str(header)]) == 2

    negative = tmp_path / "negative.csv"
    negative.write_text("id,owner,citations\n1,H,-3\n")
    assert main(["compute", str(negative)]) == 2

    assert main(["compute", str(tmp_path / "missing.csv")]) == 2
    assert main(["--digits", "-1", "compute", str(header)]) == 2


def test_missing_citation_target_exit_code(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "bad",
                                "initial": {"label": "T1", "papers": [{"id": 1, "owner": "X", "citations": 0}]},
                                "steps": [{"case": "T2", "op": "add_citation", "owner": "X", "from_count": 1}]}))
    assert main(["scenario", str(path)]) == 2
    assert main(["audit", str(path)]) == 2


def test_example_errors(tmp_path):
    assert main(["example", "--name", "C"]) == 2
    assert main(["example", "--name", "A", "--format", "csv", "--output", str(tmp_path / "a.csv")]) == 2


def test_example_to_stdout(capsys):
    assert main(["example", "--name", "B73", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "id,owner,citations"
    assert len(lines) == 61
    assert lines[16] == "16,N,3"


def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_read_helpers(b1_csv, b_like_json):
    b1, _, _ = example_b_endpoints()
    assert read_dataset_file(str(b1_csv)) == b1
    assert read_scenario_file(str(b_like_json)) == example_b_like()
    assert read_scheme_file(None).label == "6PR"
    assert read_scheme_file("6pr").boundaries[-1] == 100
    assert parse_dataset_csv("id,owner,citations\n", label="none") == Dataset(label="none")
    with pytest.raises(DatasetFormatError, match="integers"):
        parse_dataset_csv("id,owner,citations\n1,H,many\n")


def test_compute_json_exact_rationals(tmp_path, capsys):
    path = tmp_path / "A1.csv"
    write_dataset_file(Dataset.from_histogram("A1", EXAMPLE_A1), str(path), "csv")
    assert main(["compute", str(path), "--format", "json", "--by-owner"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["total_i3"] == {"num": 76, "den": 1, "decimal": "76"}
    assert data["total_r"] == {"num": 19, "den": 10, "decimal": "1.9000"}
    assert data["per_owner"]["_"]["share"] == {"num": 19, "den": 10, "decimal": "1.9000"}


def test_audit_json_exact_rationals(b_like_json, capsys):
    capsys.readouterr()
    assert main(["audit", str(b_like_json), "--format", "json"]) == 0
    detail = json.loads(capsys.readouterr().out)["violations"][0]["detail"]
    assert detail["rank_x_after"] == {"num": 7, "den": 2, "decimal": "3.5000"}
    assert detail["y_after"] == {"num": 2, "den": 1, "decimal": "2"}


def test_invalid_utf8_exit_code(tmp_path):
    path = tmp_path / "latin.csv"
    path.write_bytes(b"id,owner,citations\n1,\xff\xfe,3\n")
    assert main(["compute", str(path)]) == 2
    with pytest.raises(DatasetFormatError, match="UTF-8"):
        read_dataset_file(str(path))


def test_scalar_scheme_values_exit_code(b1_csv, tmp_path):
    scheme = tmp_path / "scalar.yaml"
    scheme.write_text("boundaries: 100\nweights: 1\n")
    assert main(["compute", str(b1_csv), "--scheme", str(scheme)]) == 2
    with pytest.raises(DatasetFormatError, match="list of numbers"):
        read_scheme_file(str(scheme))


@pytest.mark.parametrize("row", ["1,H,3,99", "1,H"])
def test_csv_row_with_wrong_number_of_values(tmp_path, row):
    path = tmp_path / "ragged.csv"
    path.write_text(f"id,owner,citations\n{row}\n")
    assert main(["compute", str(path), "--format", "csv"]) == 2
    with pytest.raises(DatasetFormatError, match="line 2"):
        parse_dataset_csv(path.read_text())


def test_integral_r_keeps_the_decimals(tmp_path, capsys):
    path = tmp_path / "flat.yaml"
    path.write_text("- {id: 1, owner: X, citations: 0}\n- {id: 2, owner: X, citations: 0}\n")
    capsys.readouterr()
    assert main(["compute", str(path), "--format", "csv"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "flat,2,0,2,1.0000"
