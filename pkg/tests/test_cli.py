import json

import pytest

from gridquorum.cli import main, parse_range


@pytest.fixture()
def schema_file(tmp_path):
    def write(name, ks):
        path = tmp_path / name
        path.write_text(json.dumps({"attributes": [
            {"name": f"A{i + 1}", "values": [f"v{v}" for v in range(k)]}
            for i, k in enumerate(ks)]}))
        return str(path)
    return write


def run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr().out


def test_parse_range():
    assert parse_range("4..7") == [4, 5, 6, 7]
    assert parse_range("9") == [9]
    assert parse_range("7,9,12") == [7, 9, 12]


def test_universe_command(capsys, schema_file):
    path = schema_file("osloc.json", [5, 7])
    code, out = run(capsys, ["universe", "--schema", path])
    assert code == 0
    assert "n=35" in out
    assert "belief 0 (A1): k=5 f=1 p=4 alpha=1" in out
    assert "belief 1 (A2): k=7 f=2 p=5 alpha=0" in out


def test_universe_three_equal(capsys, schema_file):
    path = schema_file("g444.json", [4, 4, 4])
    code, out = run(capsys, ["universe", "--schema", path, "--json"])
    data = json.loads(out)
    assert data["n"] == 64
    assert all(b["f"] == 1 and b["p"] == 3 and b["alpha"] == 2
               for b in data["beliefs"])


def test_check_b3_holds_exit_0(capsys, schema_file):
    path = schema_file("g44.json", [4, 4])
    code, out = run(capsys, ["check", "b3", "--schema", path, "--i", "0", "--j", "1"])
    assert code == 0
    data = json.loads(out)
    assert data["holds"] and data["slack"] == 8


def test_check_q3_forced_f_exit_1(capsys, schema_file):
    path = schema_file("g44.json", [4, 4])
    code, out = run(capsys, ["check", "q3", "--schema", path, "--i", "0",
                             "--force-f", "2"])
    assert code == 1
    data = json.loads(out)
    assert not data["holds"]
    assert data["witness"]["kind"] == "q3_cover"


def test_check_budget_exit_2(capsys, schema_file):
    path = schema_file("g77.json", [7, 7])
    code, out = run(capsys, ["check", "b3", "--schema", path, "--i", "0",
                             "--j", "1", "--budget", "100"])
    assert code == 2
    data = json.loads(out)
    assert data["error"] == "budget_exceeded"
    assert data["required"] == 705894


def test_check_availability(capsys, schema_file):
    path = schema_file("g44.json", [4, 4])
    code, out = run(capsys, ["check", "availability", "--schema", path, "--i", "0"])
    assert code == 0 and json.loads(out)["holds"]


def test_sweep_equal_rows(capsys):
    code, out = run(capsys, ["sweep", "equal", "--d", "2", "--k", "4..20",
                             "--threads", "1"])
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 1 + 17
    by_k = {line.split(",")[1]: line.split(",")[7] for line in lines[1:]}
    assert by_k["9"] == "false" and by_k["12"] == "false"
    assert by_k["7"] == "true" and by_k["15"] == "true"


def test_sweep_2d_rows(capsys):
    code, out = run(capsys, ["sweep", "2d", "--k1", "4..16", "--k2", "4..16",
                             "--threads", "1"])
    assert code == 0
    assert len(out.strip().splitlines()) == 1 + 169


def test_sweep_lemmas_zero_violations(capsys):
    code, out = run(capsys, ["sweep", "lemmas", "--format", "json", "--threads", "1"])
    assert code == 0
    assert json.loads(out)["violation_count"] == 0


def test_sweep_alpha_csv(capsys):
    code, out = run(capsys, ["sweep", "alpha", "--k1", "4..5", "--k2", "4..5",
                             "--mode", "EXHAUSTIVE", "--threads", "1"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "k1,k2,default_alpha,max_alpha,method,increase_percent"
    assert len(lines) == 1 + 4


def test_scenario_command(capsys, tmp_path):
    scenario = {
        "schema": {"attributes": [
            {"name": "A1", "values": ["a", "b", "c", "d"]},
            {"name": "A2", "values": ["w", "x", "y", "z"]}]},
        "beliefs": {"default": 0},
        "faults": [0, 1, 2, 3],
    }
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(scenario))
    code, out = run(capsys, ["scenario", "--file", str(path), "--safety"])
    assert code == 0
    data = json.loads(out)
    assert data["summary"] == {"FAULTY": 4, "WISE": 12, "NAIVE": 0}
    assert data["safety"][0]["violation_exists"] is False


def test_scenario_empty_and_full(capsys, tmp_path):
    base = {"schema": {"attributes": [
        {"name": "A1", "values": ["a", "b", "c", "d"]},
        {"name": "A2", "values": ["w", "x", "y", "z"]}]},
        "beliefs": {"default": 0}}
    empty = dict(base, faults=[])
    full = dict(base, faults=list(range(16)))
    p1, p2 = tmp_path / "e.json", tmp_path / "f.json"
    p1.write_text(json.dumps(empty))
    p2.write_text(json.dumps(full))
    _, out = run(capsys, ["scenario", "--file", str(p1)])
    assert json.loads(out)["summary"]["WISE"] == 16
    _, out = run(capsys, ["scenario", "--file", str(p2)])
    data = json.loads(out)
    assert data["summary"]["FAULTY"] == 16 and data["degenerate"]


def test_alpha_command(capsys, schema_file):
    path = schema_file("g44.json", [4, 4])
    code, out = run(capsys, ["alpha", "--schema", path, "--i", "0"])
    assert code == 0
    data = json.loads(out)
    assert data["max_alpha"] == 1 and data["feasibility_proven"]


def test_byte_identical_reruns(capsys, schema_file, tmp_path):
    path = schema_file("g45.json", [4, 5])
    outputs = []
    for _ in range(2):
        code, out = run(capsys, ["check", "b3", "--schema", path, "--i", "0",
                                 "--j", "1", "--seed", "0"])
        outputs.append(out)
    assert outputs[0] == outputs[1]
    for _ in range(2):
        code, out = run(capsys, ["sweep", "alpha", "--k1", "4..6", "--k2", "4..6",
                                 "--seed", "0", "--threads", "1"])
        outputs.append(out)
    assert outputs[2] == outputs[3]


def test_out_file_writing(schema_file, tmp_path, capsys):
    path = schema_file("g44.json", [4, 4])
    target = tmp_path / "verdict.json"
    code = main(["check", "b3", "--schema", path, "--i", "0", "--j", "1",
                 "--out", str(target)])
    capsys.readouterr()
    assert code == 0
    assert json.loads(target.read_text())["holds"]


def test_bad_schema_exit_3(capsys, tmp_path):
    missing = str(tmp_path / "nope.json")
    code = main(["universe", "--schema", missing])
    assert code == 3


def test_low_cardinality_schema_exit_3(capsys, schema_file, recwarn):
    path = schema_file("low.json", [3, 6])
    code = main(["universe", "--schema", path])
    assert code == 3


def test_alpha_requires_pair_or_adversarial(capsys, schema_file):
    path = schema_file("g444.json", [4, 4, 4])
    code = main(["alpha", "--schema", path, "--i", "0"])  # EXHAUSTIVE default
    assert code == 3
    code, out = run(capsys, ["alpha", "--schema", path, "--i", "0",
                             "--mode", "ADVERSARIAL", "--effort", "2"])
    assert code == 0
    data = json.loads(out)
    assert data["paired_belief"] is None
