import csv
import io
import json
import subprocess
import sys
from importlib import resources
from pathlib import Path

import pytest

from slidekit.cli import main

DATA = Path(str(resources.files("slidekit") / "data"))
FIXTURES = Path(__file__).parent / "fixtures"
BUNDLED = sorted(DATA.glob("*.json"))


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bundled_instances_exist():
    assert len(BUNDLED) >= 8


def test_solve_sat_echoes_solution(capsys):
    assert main(["solve", str(DATA / "roster-alternating.json")]) == 0
    (row,) = rows(capsys.readouterr().out)
    assert row["result"] == "sat" and row["solution"] == "s1=1 s2=0 s3=1 s4=0 s5=1 s6=0"
    assert row["wall_ms"] == ""


def test_solve_timing_column(capsys):
    main(["solve", str(DATA / "path-coloring.json"), "--timing"])
    (row,) = rows(capsys.readouterr().out)
    assert float(row["wall_ms"]) >= 0


def test_solve_unsat(tmp_path, capsys):
    doc = {
        "variables": [{"name": f"x{i}", "lower": 0, "upper": 1} for i in range(3)],
        "constraints": [{"type": "slide", "vars": ["x0", "x1", "x2"], "k": 2, "spec": {"kind": "table", "arity": 2, "tuples": []}}],
    }
    p = tmp_path / "empty.json"
    p.write_text(json.dumps(doc))
    assert main(["solve", str(p)]) == 1
    assert rows(capsys.readouterr().out)[0]["nodes"] == "0"


def test_invalid_json_reports_position(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text('{"variables": [\n  {"name": "x", "lower": 0,, "upper": 1}\n]}')
    assert main(["solve", str(p)]) == 3
    err = capsys.readouterr().err
    assert f"{p}:2:" in err


def test_schema_violation(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"variables": [], "constraints": [{"type": "slide", "vars": ["x"], "k": 1, "spec": {"kind": "nope"}}]}))
    assert main(["solve", str(p)]) == 3
    assert "constraints/0/spec" in capsys.readouterr().err
    p.write_text(json.dumps({"variables": [], "constraints": [], "extra": 1}))
    assert main(["verify", str(p)]) == 3


def test_node_limit_zero(capsys):
    assert main(["solve", str(DATA / "path-coloring.json"), "--node-limit", "0"]) == 2
    assert rows(capsys.readouterr().out)[0]["result"] == "limit"


def test_decomposed_variant(capsys):
    assert main(["solve", str(DATA / "regular-no-bb.json"), "--variant", "decomposed", "--mode", "count_all"]) == 0
    (row,) = rows(capsys.readouterr().out)
    assert row["variant"] == "decomposed" and row["solutions"] == "3"


@pytest.mark.parametrize("path", BUNDLED, ids=lambda p: p.stem)
def test_bundled_instance_verifies(path, capsys):
    assert main(["verify", str(path)]) == 0, capsys.readouterr().out


def test_verify_corrupted_fixture(capsys):
    assert main(["verify", str(FIXTURES / "corrupted-expected.json")]) == 1
    assert "MISMATCH expected domain x3" in capsys.readouterr().out


def test_verify_over_cap(capsys):
    assert main(["verify", str(DATA / "table-step2.json"), "--cap", "100"]) == 3
    assert "resource error" in capsys.readouterr().err


def test_generate_deterministic(tmp_path):
    for out in ("a", "b"):
        assert main(["generate", "amongseq-roster", "--out", str(tmp_path / out), "--count", "3", "--seed", "42"]) == 0
    a = sorted((tmp_path / "a").iterdir())
    b = sorted((tmp_path / "b").iterdir())
    assert [p.name for p in a] == [p.name for p in b]
    assert all(x.read_bytes() == y.read_bytes() for x, y in zip(a, b))


def test_generate_density_extremes(tmp_path, capsys):
    args = ["generate", "random-table", "--count", "3", "--seed", "1", "--n", "6", "--d", "2", "--k", "2"]
    main(args + ["--out", str(tmp_path / "empty"), "--density", "0"])
    main(args + ["--out", str(tmp_path / "full"), "--density", "1"])
    capsys.readouterr()
    for p in sorted((tmp_path / "empty").iterdir()):
        assert main(["solve", str(p)]) == 1
        assert main(["verify", str(p)]) == 0
    for p in sorted((tmp_path / "full").iterdir()):
        assert main(["solve", str(p)]) == 0
        assert main(["verify", str(p)]) == 0
    capsys.readouterr()
    main(["compare", str(tmp_path / "full")])
    for row in rows(capsys.readouterr().out):
        assert row["pruned"] == "0" and row["failures"] == "0"


def test_compare_dominance(tmp_path, capsys):
    main(["generate", "amongseq-roster", "--out", str(tmp_path), "--count", "6", "--seed", "5",
          "--n", "16", "--q", "4", "--l", "2", "--u", "2", "--density", "0.1"])
    capsys.readouterr()
    assert main(["compare", str(tmp_path), "--jobs", "3"]) == 0
    out = rows(capsys.readouterr().out)
    assert [r["variant"] for r in out] == ["slide", "decomposed"] * 6
    assert [r["instance"] for r in out[::2]] == sorted(p.stem for p in tmp_path.glob("*.json"))
    for s, d in zip(out[::2], out[1::2]):
        assert s["result"] == d["result"]
        assert int(s["nodes"]) <= int(d["nodes"]) and int(s["failures"]) <= int(d["failures"])


def test_compare_missing_dir(tmp_path):
    assert main(["compare", str(tmp_path / "nope")]) == 3


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "slidekit", "solve", str(DATA / "path-coloring.json")],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("instance,variant,result")
