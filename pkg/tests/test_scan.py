import csv
import io
import json
import math
from dataclasses import replace

import numpy as np
import pytest

from spvqe.errors import StructuralError
from spvqe.optimizers import OptimizerConfig
from spvqe.scan import (
    CSV_COLUMNS,
    GeometryPoint,
    ScanConfig,
    fixture_path,
    load_config,
    oracle_table,
    record_seed,
    robustness_study,
    run_scan,
    steps_sweep,
    validate_inputs,
)

from .oracle_values import FCI

TOY_GROUND = -0.1 - math.sqrt(0.3**2 + 0.5**2)


def h2_config(**kw):
    base = dict(
        points=(GeometryPoint("h2_0.735", 0.735, str(fixture_path("h2_0.735.fcidump"))),
                GeometryPoint("h2_1.500", 1.5, str(fixture_path("h2_1.500.fcidump")))),
        method="spvqe",
        constraints=(("particle_number", 2.0), ("total_spin", 0.0)),
        depth=1,
        optimizer=OptimizerConfig(max_iterations=60),
        mu_max=10.0,
        n_steps=3,
        repeats=2,
        seed=11,
    )
    base.update(kw)
    return ScanConfig(**base)


def rows(report):
    return list(csv.DictReader(io.StringIO(report.to_csv())))


class TestConfig:
    def test_packaged_configs_load(self):
        for name in ("toy_vqe.json", "h2_number.json", "h3p_competing.json"):
            cfg = load_config(fixture_path(name)).validate()
            assert cfg.points

    def test_round_trip(self):
        cfg = h2_config(mu_max=(1.0, 2.0))
        assert ScanConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_key(self):
        with pytest.raises(StructuralError, match="unknown"):
            ScanConfig.from_dict({"points": [], "bogus": 1})

    @pytest.mark.parametrize("change", [
        {"method": "qaoa"}, {"mapping": "bk"}, {"budget_mode": "sometimes"}, {"repeats": 0},
        {"shots": -1}, {"constraints": (("charge", 1.0),)}, {"constraints": ()},
        {"mu_max": (1.0, 2.0, 3.0)}, {"n_steps": 0}, {"mu_max": -1.0},
    ])
    def test_invalid(self, change):
        with pytest.raises((StructuralError, ValueError)):
            h2_config(**change).validate()

    def test_missing_file(self):
        cfg = h2_config(points=(GeometryPoint("x", 1.0, "/nonexistent.fcidump"),))
        with pytest.raises(StructuralError):
            cfg.validate()

    def test_relative_paths(self, tmp_path):
        src = fixture_path("h2_0.735.fcidump")
        (tmp_path / "mol.fcidump").write_text(src.read_text())
        data = {"points": [{"label": "a", "bond_length": 1.0, "path": "mol.fcidump"}],
                "constraints": [{"label": "particle_number", "target": 2}]}
        (tmp_path / "c.json").write_text(json.dumps(data))
        cfg = load_config(tmp_path / "c.json")
        assert cfg.points[0].path == str(tmp_path / "mol.fcidump")

    def test_seed_excludes_method(self):
        assert record_seed(0, 1, 2) == record_seed(0, 1, 2) != record_seed(0, 2, 1)


class TestScan:
    def test_toy_smoke(self):
        report = run_scan(load_config(fixture_path("toy_vqe.json")))
        (row,) = rows(report)
        assert not report.failed
        assert float(row["energy_error"]) < 1e-8
        assert float(row["energy_hartree"]) == pytest.approx(TOY_GROUND, abs=1e-8)
        assert row["spin_error"] == "" and row["number_error"] == ""
        assert row["ns"] == "0" and row["mu_max"] == "0.0"

    def test_column_order(self):
        report = run_scan(load_config(fixture_path("toy_vqe.json")))
        assert report.to_csv().splitlines()[0] == ",".join(CSV_COLUMNS)

    def test_records_and_decomposition(self):
        report = run_scan(h2_config())
        assert not report.failed
        assert len(report.records) == 4
        for r in report.records:
            assert abs(r.energy_hartree - (r.cost - r.penalty)) <= 1e-10
            assert r.energy_error == pytest.approx(abs(r.energy_hartree - FCI[r.label][2]), abs=1e-9)
            assert r.ns == 3 and r.evaluations > 0
        assert {row["label"] for row in report.summary} == {"h2_0.735", "h2_1.500"}

    def test_rerun_byte_identical(self, tmp_path):
        a = run_scan(h2_config()).write(tmp_path / "a")
        b = run_scan(h2_config()).write(tmp_path / "b")
        assert a[0].read_bytes() == b[0].read_bytes()

    def test_jobs_same_output(self):
        assert run_scan(h2_config(), jobs=2).to_csv() == run_scan(h2_config()).to_csv()

    def test_repeats_differ(self):
        r0, r1 = run_scan(h2_config()).records[:2]
        assert r0.seed != r1.seed

    def test_total_budget_splits_iterations(self):
        opt = OptimizerConfig(max_iterations=6, gradient_tolerance=1e-14)
        per = run_scan(h2_config(budget_mode="per_step", repeats=1, optimizer=opt))
        tot = run_scan(h2_config(budget_mode="total", repeats=1, optimizer=opt))
        assert sum(r.evaluations for r in tot.records) < sum(r.evaluations for r in per.records)

    def test_per_constraint_mu(self):
        report = run_scan(h2_config(mu_max=(5.0, 20.0), repeats=1))
        assert report.records[0].mu_max == "5.0;20.0"

    def test_failure_is_recorded(self, monkeypatch):
        from spvqe import scan
        from spvqe.errors import OptimizationError

        def boom(*a, **k):
            raise OptimizationError("diverged")

        monkeypatch.setattr(scan, "spvqe_run", boom)
        report = run_scan(h2_config(repeats=1))
        assert len(report.failed) == 2
        assert report.manifest()["failures"][0]["error"].startswith("OptimizationError")
        assert rows(report)[0]["energy_hartree"] == ""

    def test_sampled_scan(self):
        cfg = h2_config(shots=256, optimizer=OptimizerConfig(method="NFT", sweeps=3), repeats=1)
        report = run_scan(cfg)
        assert not report.failed
        assert run_scan(cfg).to_csv() == report.to_csv()
        for r in report.records:
            assert r.shots == 256
            assert r.energy_error < 0.1

    def test_write_atomic_outputs(self, tmp_path):
        csv_path, json_path = run_scan(h2_config(repeats=1)).write(tmp_path, "x")
        manifest = json.loads(json_path.read_text())
        assert manifest["n_records"] == 2 and manifest["columns"] == list(CSV_COLUMNS)
        assert sorted(p.name for p in tmp_path.iterdir()) == ["x.csv", "x.json"]


class TestSweeps:
    def test_ns_one_matches_cvqe(self):
        cfg = h2_config()
        sweep = rows(steps_sweep(cfg, [1]))
        cvqe = rows(run_scan(replace(cfg, method="cvqe")))
        for s, c in zip(sweep, cvqe):
            assert s.pop("method") == "spvqe" and c.pop("method") == "cvqe"
            assert s == c

    def test_empty_ns(self):
        report = steps_sweep(h2_config(), [])
        assert report.records == [] and report.summary == []
        assert report.to_csv().strip() == ",".join(CSV_COLUMNS)

    def test_sweep_summary_keys(self):
        report = steps_sweep(h2_config(repeats=1), [1, 2])
        assert {(row["ns"], row["label"]) for row in report.summary} == {
            (n, l) for n in (1, 2) for l in ("h2_0.735", "h2_1.500")}

    def test_robustness_two_starts(self):
        report = robustness_study(h2_config(points=h2_config().points[:1]), 2)
        methods = [r.method for r in report.records]
        assert methods.count("cvqe") == 2 and methods.count("spvqe") == 2
        cv = [r for r in report.records if r.method == "cvqe"]
        sp = [r for r in report.records if r.method == "spvqe"]
        assert [r.seed for r in cv] == [r.seed for r in sp]

    def test_robustness_needs_two(self):
        with pytest.raises(StructuralError):
            robustness_study(h2_config(), 1)


class TestOracleAndValidate:
    def test_oracle_table(self):
        table = oracle_table(h2_config(), 4)
        targets = [r for r in table if r["level"] == "target"]
        assert [t["energy"] for t in targets] == pytest.approx([FCI["h2_0.735"][2], FCI["h2_1.500"][2]])
        levels = [r for r in table if r["label"] == "h2_0.735" and r["level"] != "target"]
        assert np.all(np.diff([r["energy"] for r in levels]) >= 0)
        assert {"total_spin", "particle_number"} <= set(levels[0])

    def test_validate_clean(self):
        assert validate_inputs(h2_config()) == []

    def test_validate_bad_file(self, tmp_path):
        bad = tmp_path / "bad.fcidump"
        bad.write_text("&FCI NORB=2,NELEC=2,MS2=0,\n&END\n 1.0 5 5 0 0\n")
        cfg = h2_config(points=(GeometryPoint("bad", 1.0, str(bad)),))
        issues = validate_inputs(cfg)
        assert issues and issues[0].startswith("bad")

    def test_validate_bad_config(self):
        assert validate_inputs(h2_config(method="nope"))
