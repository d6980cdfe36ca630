import csv
import io
import json

import pytest

from predcomb.cli import main, parse_range


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_parse_range():
    assert parse_range("1..3") == [1, 2, 3]
    assert parse_range("2") == [2]
    assert parse_range("1,3") == [1, 3]


def test_verify_claim(capsys):
    code, out = run(capsys, "verify", "claim", "--seed", "7")
    data = json.loads(out.out)
    assert code == 0 and data["ok"] and data["seed"] == 7
    k2 = [a for a in data["assertions"] if a["name"] == "trials n=2 k=2"][0]
    assert k2["max_observed"] == 3


def test_verify_sharpness(capsys):
    code, out = run(capsys, "verify", "sharpness", "--k", "2")
    data = json.loads(out.out)
    assert code == 0 and data["assertions"][0]["size"] == 8


def test_verify_main_theorem(capsys):
    code, _ = run(capsys, "verify", "main-theorem", "--n", "3", "--k", "2", "--trials", "20",
                  "--seed", "1")
    assert code == 0


@pytest.mark.parametrize("suite", ["coverability", "linked", "star"])
def test_other_suites(capsys, suite):
    code, _ = run(capsys, "verify", suite, "--trials", "30")
    assert code == 0


def test_tables(capsys):
    _, out = run(capsys, "table", "maxcover", "--n", "2", "--k", "1..3")
    assert [r["value"] for r in json.loads(out.out)["rows"]] == [1, 3, 7]
    _, out = run(capsys, "table", "cover", "--n", "2", "--L", "2", "--k", "1..2")
    assert [r["value"] for r in json.loads(out.out)["rows"]] == [4, 2]
    _, out = run(capsys, "table", "maxcover", "--n", "3", "--k", "2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out.out)))
    assert rows == [{"k": "2", "n": "3", "status": "ok", "value": "5"}]
    _, out = run(capsys, "table", "buckets")
    assert json.loads(out.out)["rows"][-1]["cumulative"] == 32906


def test_table_budget_rows_marked(capsys):
    code, out = run(capsys, "table", "cover", "--n", "3", "--L", "3", "--k", "1", "--budget", "10")
    row = json.loads(out.out)["rows"][0]
    assert code == 0 and row["value"] is None and row["status"].startswith("budget")


def test_budget_env_var(capsys, monkeypatch):
    monkeypatch.setenv("PREDCOMB_BUDGET", "5")
    code, out = run(capsys, "verify", "sharpness", "--k", "2")
    assert code == 2 and "budget" in out.err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nope"])
    assert exc.value.code == 2


def test_demos(capsys):
    code, out = run(capsys, "demo", "thm1", "--n", "3", "--k", "2", "--H", "60", "--seed", "2")
    data = json.loads(out.out)
    assert code == 0 and data["summary"].startswith("all windows hit from position")
    assert data["observed_from"] <= data["guaranteed_from"]
    code, out = run(capsys, "demo", "evader", "--k", "2", "--predictors", "3", "--H", "24")
    data = json.loads(out.out)
    assert code == 0 and len(data["trace"]) == 12
    assert [r["predictor"] for r in data["trace"][:4]] == [0, 1, 2, 0]
    code, out = run(capsys, "demo", "extension", "--k", "2")
    data = json.loads(out.out)
    assert code == 0 and data["m"] == 3 and len(data["inputs"]) == 3


def test_output_is_deterministic(capsys, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        assert main(["verify", "linked", "--seed", "4", "--trials", "40", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_failed_assertion_exits_one(capsys, monkeypatch):
    from predcomb import cli

    monkeypatch.setitem(cli.SUITE_FUNCS, "star", lambda cfg, rep: rep.check("forced", False))
    code, out = run(capsys, "verify", "star")
    assert code == 1 and json.loads(out.out)["ok"] is False
