import json

import pytest

from disentangle import cli, storage
from disentangle.linalg import InvariantError


@pytest.fixture(autouse=True)
def no_default_ledger(monkeypatch):
    monkeypatch.setattr(cli, "SQLITE_DB_PATH", None)
    yield
    storage.close_connections()


def test_period_json(tmp_path, capsys):
    out = tmp_path / "period.json"
    assert cli.main(["period", "--N", "15", "--b", "7", "--seed", "1", "--out", str(out)]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["results"]["inferred_period"] == 4
    assert report["config"] == {
        "command": "period",
        "N": 15,
        "b": 7,
        "k": None,
        "samples": 32,
        "seed": 1,
        "format": "json",
    }
    assert "PERIOD FINDING" in capsys.readouterr().out


def test_period_json_to_stdout(capsys):
    assert cli.main(["period", "--N", "15", "--b", "7", "--samples", "8"]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["results"]["true_period"] == 4
    assert "PERIOD FINDING" in captured.err


def test_period_csv(tmp_path):
    out = tmp_path / "period.csv"
    code = cli.main(
        ["period", "--N", "15", "--b", "7", "--format", "csv", "--out", str(out)]
    )
    assert code == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "r,measure,reduced-rho,full-psi"
    assert len(lines) == 513


def test_period_outputs_are_byte_identical(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for out in (first, second):
        cli.main(["period", "--N", "21", "--b", "2", "--seed", "5", "--out", str(out)])
    assert first.read_bytes() == second.read_bytes()


def test_inconclusive_period_exit_code(tmp_path):
    out = tmp_path / "trivial.json"
    assert cli.main(["period", "--N", "15", "--b", "1", "--out", str(out)]) == 1
    assert json.loads(out.read_text(encoding="utf-8"))["results"]["inferred_period"] is None


@pytest.mark.parametrize(
    "argv",
    [
        ["period", "--N", "15", "--b", "5"],
        ["period", "--N", "15", "--b", "7", "--k", "4"],
        ["period", "--N", "15", "--b", "7", "--seed", "-3"],
        ["qec", "--code", "five-qubit", "--channel", "bogus"],
        ["qec", "--code", "five-qubit", "--channel", "pauli:Y2"],
        ["qec", "--code", "bit-flip", "--channel", "pauli:X9"],
        ["qec", "--code", "steane", "--channel", "mixed"],
        ["period", "--N", "15"],
        ["history"],
    ],
)
def test_invalid_configuration_exit_code(argv):
    assert cli.main(argv) == 2


def test_help_exits_cleanly(capsys):
    assert cli.main(["--help"]) == 0
    assert "period" in capsys.readouterr().out


def test_invariant_violation_exit_code(monkeypatch):
    def broken(config):
        raise InvariantError("state is not normalized")

    monkeypatch.setattr(cli, "run_period_experiment", broken)
    assert cli.main(["period", "--N", "15", "--b", "7"]) == 3


def test_qec_all_paulis(tmp_path):
    out = tmp_path / "qec.json"
    code = cli.main(
        ["qec", "--code", "five-qubit", "--channel", "all-paulis", "--seed", "3", "--out", str(out)]
    )
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["results"]["summary"]["recovered"] == 15
    assert all(check["pass"] for check in report["checks"])


def test_qec_phase_error_still_exits_zero(tmp_path):
    out = tmp_path / "qec.json"
    argv = ["qec", "--code", "bit-flip", "--channel", "phase-error", "--trials", "3"]
    assert cli.main(argv + ["--out", str(out)]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["results"]["summary"]["recovered"] == 0


def test_verify(tmp_path, capsys):
    out = tmp_path / "verify.json"
    assert cli.main(["verify", "--code", "bit-flip", "--out", str(out)]) == 0
    assert "ORTHOGONALITY CONDITIONS" in capsys.readouterr().out
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["results"]["compliant"] is False
    assert report["results"]["qubits"][0]["scalar_products"]["00,00"] == [1.0, 0.0]


def test_runs_are_recorded_in_ledger(tmp_path, capsys):
    db = str(tmp_path / "ledger.db")
    out = str(tmp_path / "period.json")
    assert cli.main(["--db", db, "period", "--N", "15", "--b", "7", "--out", out]) == 0
    assert cli.main(["--db", db, "verify", "--code", "five-qubit"]) == 0
    capsys.readouterr()
    assert cli.main(["--db", db, "history", "--limit", "5"]) == 0
    text = capsys.readouterr().out
    assert "period" in text and "verify" in text
    runs = storage.get_recent_runs(5, db_path=db)
    assert [run["command"] for run in runs] == ["period", "verify"]
    assert runs[0]["passed_checks"] == runs[0]["total_checks"] == 4
