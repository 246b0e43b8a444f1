import csv
import json
import subprocess
import sys

import pytest

from spvqe.cli import main
from spvqe.scan import CSV_COLUMNS, fixture_path

TOY = str(fixture_path("toy_vqe.json"))


def h2_config(tmp_path, **kw):
    data = {
        "points": [{"label": "h2_0.735", "bond_length": 0.735, "path": "h2_0.735.fcidump"}],
        "method": "spvqe",
        "constraints": [{"label": "particle_number", "target": 2}],
        "depth": 1,
        "optimizer": {"method": "CG", "max_iterations": 40},
        "mu_max": 10.0,
        "n_steps": 2,
        "seed": 3,
    }
    data.update(kw)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_scan_toy(tmp_path, capsys):
    assert main(["scan", "--config", TOY, "--out", str(tmp_path)]) == 0
    (row,) = read_csv(tmp_path / "scan.csv")
    assert float(row["energy_error"]) < 1e-8
    out = capsys.readouterr().out
    assert json.loads(out.splitlines()[0])["method"] == "vqe"


def test_overrides(tmp_path):
    cfg = h2_config(tmp_path)
    code = main(["scan", "--config", cfg, "--method", "cvqe", "--mu-max", "4", "--repeats", "2",
                 "--seed", "9", "--out", str(tmp_path)])
    assert code == 0
    rows = read_csv(tmp_path / "scan.csv")
    assert [r["method"] for r in rows] == ["cvqe", "cvqe"]
    assert {r["mu_max"] for r in rows} == {"4.0"}
    manifest = json.loads((tmp_path / "scan.json").read_text())
    assert manifest["config"]["seed"] == 9


def test_steps_sweep(tmp_path):
    cfg = h2_config(tmp_path)
    assert main(["steps-sweep", "--config", cfg, "--ns", "1,2", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "steps_sweep.csv")
    assert [r["ns"] for r in rows] == ["1", "2"]
    assert list(rows[0]) == list(CSV_COLUMNS)


def test_robustness(tmp_path):
    cfg = h2_config(tmp_path)
    assert main(["robustness", "--config", cfg, "--starts", "2", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "robustness.csv")
    assert sorted(r["method"] for r in rows) == ["cvqe", "cvqe", "spvqe", "spvqe"]


def test_robustness_too_few_starts(tmp_path, capsys):
    assert main(["robustness", "--config", h2_config(tmp_path), "--starts", "1"]) == 2
    assert "error" in capsys.readouterr().err


def test_oracle(tmp_path, capsys):
    assert main(["oracle", "--config", h2_config(tmp_path), "--levels", "3"]) == 0
    lines = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    assert len(lines) == 4 and lines[-1]["level"] == "target"


def test_validate_ok(tmp_path, capsys):
    assert main(["validate", "--config", h2_config(tmp_path)]) == 0
    assert capsys.readouterr().out.startswith("ok")


def test_validate_issues(tmp_path, capsys):
    assert main(["validate", "--config", h2_config(tmp_path, method="nope")]) == 1
    assert "method" in capsys.readouterr().out


def test_missing_config(tmp_path, capsys):
    assert main(["scan", "--config", str(tmp_path / "none.json")]) == 2


def test_failed_record_exit_code(tmp_path, monkeypatch, capsys):
    from spvqe import scan
    from spvqe.errors import OptimizationError

    def boom(*a, **k):
        raise OptimizationError("diverged")

    monkeypatch.setattr(scan, "spvqe_run", boom)
    assert main(["scan", "--config", h2_config(tmp_path), "--out", str(tmp_path)]) == 1
    assert "FAILED h2_0.735" in capsys.readouterr().err


def test_bad_subcommand():
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_console_script(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "spvqe.cli", "validate", "--config", TOY],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
