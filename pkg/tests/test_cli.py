import json
import shutil
from pathlib import Path

import pytest

from constructive_fa.cli import main
from constructive_fa.serialize import certificate_from_csv, grid_to_record
from constructive_fa.spaces import GridFunction

SCENARIOS = Path(__file__).resolve().parents[1] / "demos" / "scenarios"


def write(tmp_path, obj, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return p


def test_list_kinds(capsys):
    assert main(["list-kinds"]) == 0
    kinds = [line.split("\t")[0] for line in capsys.readouterr().out.splitlines()]
    assert kinds == ["ubp-witness", "weak-ubp", "aa-extract", "fk-extract",
                     "choose-finite", "choose-asymptotic", "choose-singleton"]


def test_ubp_diagonal_csv(tmp_path):
    s = write(tmp_path, {"kind": "ubp-witness", "family": {"variant": "diagonal"}, "horizon": 10})
    assert main(["run", str(s), "--out", str(tmp_path / "o")]) == 0
    rows = certificate_from_csv((tmp_path / "o" / "certificate.csv").read_text())
    assert len(rows) == 10 and all(r.passed for r in rows)


def test_malformed_scenario_exit_2(tmp_path, capsys):
    s = write(tmp_path, "{ not json")
    assert main(["run", str(s)]) == 2
    assert "parse error" in capsys.readouterr().err
    assert main(["validate", str(s)]) == 2


@pytest.mark.parametrize("bad", [
    {"kind": "nope"},
    {"kind": "ubp-witness", "family": {"variant": "diagonal"}, "horizon": 0},
    {"kind": "aa-extract", "family": {"recipe": "phase-sine"}, "eps": [0.5, 1.0]},
    {"kind": "aa-extract", "family": {"recipe": "phase-sine"}, "eps": [-1.0]},
    {"kind": "choose-asymptotic", "sets": [[1]], "witness": "ramp"},
    {"kind": "fk-extract", "family": {"recipe": "x-over-k"}, "p": "inf", "mollifiers": [2], "eps": 1},
])
def test_invalid_scenarios_exit_2(tmp_path, bad):
    assert main(["validate", str(write(tmp_path, bad))]) == 2


def test_missing_file_exit_2(tmp_path, capsys):
    assert main(["run", str(tmp_path / "absent.json")]) == 2
    s = write(tmp_path, {"kind": "aa-extract", "family": {"files": ["g1.json"]}, "eps": [1.0]})
    assert main(["validate", str(s)]) == 2
    assert "missing file" in capsys.readouterr().err


def test_grid_files_are_read(tmp_path):
    for k in range(3):
        g = GridFunction.sample(lambda x, k=k: x * 0 + (k % 2), [0], [1], [32])
        (tmp_path / f"g{k}.json").write_text(json.dumps(grid_to_record(g)))
    s = write(tmp_path, {"kind": "aa-extract", "family": {"files": ["g0.json", "g1.json", "g2.json"]},
                         "eps": [0.9]})
    assert main(["run", str(s), "--out", str(tmp_path / "o")]) == 0
    rec = json.loads((tmp_path / "o" / "extraction.json").read_text())
    assert rec["diagonal"] == [0, 2]


def test_zero_witness_exit_3(tmp_path, capsys):
    s = write(tmp_path, {"kind": "choose-finite", "sets": [[1, 2]], "witness": "zero"})
    assert main(["run", str(s), "--out", str(tmp_path)]) == 3
    assert "empty selection" in capsys.readouterr().err


def test_certificate_failure_exit_4(tmp_path, capsys):
    s = write(tmp_path, {"kind": "ubp-witness", "family": {"variant": "diagonal", "weights": "2^n"},
                         "horizon": 3})
    assert main(["run", str(s), "--out", str(tmp_path)]) == 4
    assert "4^1" in capsys.readouterr().err


def test_unwritable_output_exit_5(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    s = write(tmp_path, {"kind": "choose-singleton", "sets": [[1, 2]]})
    assert main(["run", str(s), "--out", str(blocker / "sub")]) == 5


def test_asymptotic_report(tmp_path):
    assert main(["run", str(SCENARIOS / "choose_asymptotic.json"), "--out", str(tmp_path)]) == 0
    rec = json.loads((tmp_path / "selection.json").read_text())
    assert rec["C"] == 1 and rec["I"] == list(range(1, 51))
    assert all(rec["M"][str(n)] == list(range(1, n + 1)) for n in range(1, 51))


def test_text_format_for_certificates(tmp_path):
    s = SCENARIOS / "ubp_quotient.json"
    assert main(["run", str(s), "--out", str(tmp_path), "--format", "text"]) == 0
    rec = json.loads((tmp_path / "certificate.json").read_text())
    assert rec["family"]["variant"] == "quotient" and all(r["pass"] for r in rec["rows"])


@pytest.mark.parametrize("name", sorted(p.name for p in SCENARIOS.glob("*.json")))
def test_demo_scenarios_validate(name):
    assert main(["validate", str(SCENARIOS / name)]) == 0


def test_two_runs_identical(tmp_path):
    src = SCENARIOS / "choose_singleton.json"
    shutil.copy(src, tmp_path / "s.json")
    for out in ("a", "b"):
        assert main(["run", str(tmp_path / "s.json"), "--out", str(tmp_path / out)]) == 0
    assert (tmp_path / "a" / "selection.json").read_bytes() == (tmp_path / "b" / "selection.json").read_bytes()
