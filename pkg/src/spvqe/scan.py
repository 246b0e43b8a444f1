"""Batch drivers: bond-length scans, step-count sweeps and random-start studies.

A scan is a pure function of its :class:`ScanConfig`. Each (point, repeat)
pair gets its own seed derived from the master seed, which fixes both the
random starting angles and any shot noise. The method is deliberately left
out of that derivation so CVQE and SPVQE records at the same (point, repeat)
start from the same angles.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .circuit import build_ansatz, expval
from .engine import (
    Constraint,
    PenaltySchedule,
    cvqe_run,
    final_remeasure,
    spvqe_run,
    vqe_run,
)
from .errors import SpvqeError, StructuralError
from .exact import constrained_ground_state, observable_error
from .fcidump import read_fcidump
from .fermion import MAPPINGS, map_problem, sector_for
from .optimizers import OptimizerConfig
from .pauli import QubitOperator, load_operator

METHODS = ("vqe", "cvqe", "spvqe")
BUDGET_MODES = ("per_step", "total")
CONSTRAINT_KINDS = ("total_spin", "particle_number")
OPERATOR_SUFFIX = ".qop"
DEFAULT_STARTS = 100

CSV_COLUMNS = (
    "label", "bond_length_angstrom", "method", "repeat", "seed", "energy_hartree",
    "cost", "penalty", "spin_expval", "number_expval", "energy_error", "spin_error",
    "number_error", "evaluations", "ns", "mu_max", "shots",
)


def fixture_path(name: str) -> Path:
    """Path of a data file shipped in ``spvqe/fixtures``."""
    return Path(str(resources.files("spvqe") / "fixtures" / name))


@dataclass(frozen=True)
class GeometryPoint:
    label: str
    bond_length: float
    path: str


@dataclass(frozen=True)
class ScanConfig:
    """Everything a scan depends on; mirrors the JSON config file.

    ``budget_mode="total"`` splits ``optimizer.max_iterations`` evenly over
    the SPVQE steps; ``"per_step"`` gives every step the full budget.
    When ``n_electrons`` is unset, a particle-number constraint's target
    picks the symmetry sector of the reduced mapping.
    """

    points: tuple[GeometryPoint, ...]
    method: str = "spvqe"
    constraints: tuple[tuple[str, float], ...] = ()
    mapping: str = "parity_reduced"
    depth: int = 3
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    mu_max: float | tuple[float, ...] = 1.0
    n_steps: int = 10
    shots: int = 0
    repeats: int = 1
    seed: int = 0
    budget_mode: str = "total"
    n_electrons: int | None = None
    ms2: int | None = None

    def validate(self) -> "ScanConfig":
        if self.method not in METHODS:
            raise StructuralError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.mapping not in MAPPINGS:
            raise StructuralError(f"mapping must be one of {MAPPINGS}, got {self.mapping!r}")
        if self.budget_mode not in BUDGET_MODES:
            raise StructuralError(f"budget_mode must be one of {BUDGET_MODES}")
        if self.repeats < 1:
            raise StructuralError("repeats must be >= 1")
        if self.depth < 0:
            raise StructuralError("depth must be >= 0")
        if self.shots < 0:
            raise StructuralError("shots must be >= 0")
        PenaltySchedule(self.mu_max, self.n_steps)
        mu = np.atleast_1d(np.asarray(self.mu_max, dtype=np.float64))
        if mu.size not in (1, len(self.constraints)):
            raise StructuralError("mu_max needs one value or one per constraint")
        for kind, _ in self.constraints:
            if kind not in CONSTRAINT_KINDS:
                raise StructuralError(f"constraint must be one of {CONSTRAINT_KINDS}, got {kind!r}")
        if self.method != "vqe" and not self.constraints:
            raise StructuralError(f"method {self.method} needs at least one constraint")
        for p in self.points:
            if not Path(p.path).is_file():
                raise StructuralError(f"point {p.label}: no such file {p.path}")
            if p.path.endswith(OPERATOR_SUFFIX) and self.constraints:
                raise StructuralError(
                    f"point {p.label}: qubit-operator files carry no N or S^2 observables"
                )
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["points"] = [asdict(p) for p in self.points]
        d["constraints"] = [{"label": k, "target": t} for k, t in self.constraints]
        if isinstance(self.mu_max, tuple):
            d["mu_max"] = list(self.mu_max)
        return d

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | os.PathLike | None = None) -> "ScanConfig":
        data = dict(data)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise StructuralError(f"unknown config keys: {sorted(unknown)}")
        points = []
        for p in data.pop("points", []):
            path = _resolve(p["path"], base_dir)
            points.append(GeometryPoint(str(p["label"]), float(p["bond_length"]), path))
        data["points"] = tuple(points)
        data["constraints"] = tuple(
            (c["label"], float(c["target"])) for c in data.get("constraints", [])
        )
        if "optimizer" in data:
            data["optimizer"] = OptimizerConfig(**data["optimizer"])
        if isinstance(data.get("mu_max"), list):
            data["mu_max"] = tuple(float(m) for m in data["mu_max"])
        return cls(**data)


def _resolve(path: str, base_dir) -> str:
    p = Path(path)
    if not p.is_absolute() and base_dir is not None and (Path(base_dir) / p).exists():
        return str(Path(base_dir) / p)
    if not p.exists() and fixture_path(p.name).exists():
        return str(fixture_path(p.name))
    return str(p)


def load_config(path) -> ScanConfig:
    path = Path(path)
    with open(path) as fh:
        data = json.load(fh)
    return ScanConfig.from_dict(data, base_dir=path.parent)


def record_seed(master: int, point_index: int, repeat: int) -> int:
    return int(np.random.SeedSequence([master, point_index, repeat]).generate_state(1)[0])


def random_start(seed: int, n_params: int) -> np.ndarray:
    """Angles drawn uniformly from [-pi, pi)."""
    return np.random.default_rng(seed).uniform(-np.pi, np.pi, n_params)


@dataclass
class ScanRecord:
    label: str
    bond_length_angstrom: float
    method: str
    repeat: int
    seed: int
    ns: int
    mu_max: str
    shots: int
    energy_hartree: float = math.nan
    cost: float = math.nan
    penalty: float = math.nan
    spin_expval: float | None = None
    number_expval: float | None = None
    energy_error: float = math.nan
    spin_error: float | None = None
    number_error: float | None = None
    evaluations: int = 0
    reference_energy: float = math.nan
    wall_time: float = 0.0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def csv_row(self) -> list[str]:
        return [_fmt(getattr(self, c)) for c in CSV_COLUMNS]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


@dataclass
class ScanReport:
    config: ScanConfig
    records: list[ScanRecord] = field(default_factory=list)
    summary: list[dict] = field(default_factory=list)
    kind: str = "scan"

    @property
    def failed(self) -> list[ScanRecord]:
        return [r for r in self.records if not r.ok]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.records:
            writer.writerow(r.csv_row())
        return buf.getvalue()

    def manifest(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config.to_dict(),
            "columns": list(CSV_COLUMNS),
            "n_records": len(self.records),
            "failures": [
                {"label": r.label, "method": r.method, "repeat": r.repeat, "ns": r.ns, "error": r.error}
                for r in self.failed
            ],
            "summary": self.summary,
            "records": [
                {
                    "label": r.label, "method": r.method, "repeat": r.repeat, "ns": r.ns,
                    "reference_energy": _json_float(r.reference_energy),
                    "wall_time": r.wall_time,
                }
                for r in self.records
            ],
        }

    def write(self, out_dir, stem: str = "scan") -> tuple[Path, Path]:
        """Write ``<stem>.csv`` and ``<stem>.json`` atomically into ``out_dir``."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{stem}.csv"
        json_path = out_dir / f"{stem}.json"
        _atomic_write(csv_path, self.to_csv())
        _atomic_write(json_path, json.dumps(self.manifest(), indent=2, sort_keys=True) + "\n")
        return csv_path, json_path


def _json_float(x):
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else x


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class _Problem:
    hamiltonian: QubitOperator
    observables: dict
    reference: tuple


@lru_cache(maxsize=64)
def _load_problem(path: str, mapping: str, constraints: tuple, n_electrons, ms2) -> _Problem:
    if path.endswith(OPERATOR_SUFFIX):
        ham = load_operator(Path(path).read_text())
        return _Problem(ham, {}, constrained_ground_state(ham))
    ints = read_fcidump(path)
    sector = None
    if mapping == "parity_reduced":
        if n_electrons is None:
            targets = [t for kind, t in constraints if kind == "particle_number"]
            n_electrons = int(round(targets[0])) if targets else None
        sector = sector_for(ints, n_electrons, ms2)
    problem = map_problem(ints, mapping, sector)
    observables = {"total_spin": problem.spin, "particle_number": problem.number}
    cons = [Constraint(observables[k], t, k) for k, t in constraints]
    return _Problem(problem.hamiltonian, observables, constrained_ground_state(problem.hamiltonian, cons))


def _iterations(config: ScanConfig, method: str, n_steps: int) -> int:
    total = config.optimizer.max_iterations
    if method == "spvqe" and config.budget_mode == "total":
        return max(1, total // n_steps)
    return total


def _mu_label(mu) -> str:
    if isinstance(mu, tuple):
        return ";".join(repr(float(m)) for m in mu)
    return repr(float(mu))


def _run_record(task) -> ScanRecord:
    config, point_index, repeat, method, n_steps = task
    point = config.points[point_index]
    seed = record_seed(config.seed, point_index, repeat)
    record = ScanRecord(
        label=point.label, bond_length_angstrom=point.bond_length, method=method,
        repeat=repeat, seed=seed,
        ns={"vqe": 0, "cvqe": 1, "spvqe": n_steps}[method],
        mu_max="0.0" if method == "vqe" else _mu_label(config.mu_max),
        shots=config.shots,
    )
    t0 = time.perf_counter()
    try:
        problem = _load_problem(point.path, config.mapping, config.constraints,
                                config.n_electrons, config.ms2)
        ham = problem.hamiltonian
        cons = [Constraint(problem.observables[k], t, k) for k, t in config.constraints]
        ansatz = build_ansatz(ham.n_qubits, config.depth)
        x0 = random_start(seed, ansatz.n_params)
        cfg = config.optimizer.with_iterations(_iterations(config, method, n_steps))
        if config.shots and cfg.fit_tolerance is not None:
            cfg = replace(cfg, fit_tolerance=None)
        shots = config.shots
        if method == "vqe":
            best = vqe_run(ham, ansatz, x0, cfg, shots=shots, seed=seed)
            evaluations = best.quantum_evaluations()
        elif method == "cvqe":
            mus = PenaltySchedule(config.mu_max, 1).mus(1, len(cons))
            best = cvqe_run(ham, cons, mus, ansatz, x0, cfg, shots=shots,
                            seed=_step_seed(seed, 1, shots))
            evaluations = best.quantum_evaluations()
        else:
            result = spvqe_run(ham, cons, PenaltySchedule(config.mu_max, n_steps), ansatz, x0,
                               cfg, shots=shots, seed=seed)
            best = result.best
            evaluations = result.quantum_evaluations()
        record.cost = best.cost
        record.penalty = best.penalty
        if shots:
            remeasure_seed = int(np.random.SeedSequence([seed, 0, 1]).generate_state(1)[0])
            record.energy_hartree = final_remeasure(ham, ansatz, best.params, shots, remeasure_seed).mean
        else:
            record.energy_hartree = best.cost - best.penalty
        errs = observable_error(best, problem.reference, problem.observables)
        record.reference_energy = problem.reference[0]
        record.energy_error = abs(record.energy_hartree - problem.reference[0])
        record.spin_error = errs.spin_error
        record.number_error = errs.number_error
        if problem.observables:
            record.spin_expval = expval(best.state, problem.observables["total_spin"])
            record.number_expval = expval(best.state, problem.observables["particle_number"])
        record.evaluations = evaluations
    except (SpvqeError, ValueError, OSError, ArithmeticError) as exc:
        record.error = f"{type(exc).__name__}: {exc}"
    record.wall_time = time.perf_counter() - t0
    return record


def _step_seed(seed: int, k: int, shots: int) -> int:
    # same derivation spvqe_run uses, so N_s = 1 matches CVQE under shot noise too
    return int(np.random.SeedSequence([seed, k]).generate_state(1)[0]) if shots else seed


def _execute(tasks: list, jobs: int) -> list[ScanRecord]:
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_record(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_record, tasks, chunksize=1))


def _summarize(records: list[ScanRecord], keys: tuple[str, ...]) -> list[dict]:
    groups: dict = {}
    for r in records:
        groups.setdefault(tuple(getattr(r, k) for k in keys), []).append(r)
    out = []
    for key, rs in groups.items():
        good = [r for r in rs if r.ok]
        row = dict(zip(keys, key))
        row["n"] = len(rs)
        row["failed"] = len(rs) - len(good)
        for name in ("energy_error", "spin_error", "number_error", "evaluations"):
            vals = [getattr(r, name) for r in good if getattr(r, name) is not None]
            row[f"mean_{name}"] = float(np.mean(vals)) if vals else None
            if name != "evaluations":
                row[f"{name}s"] = [float(v) for v in vals]
        out.append(row)
    return out


def run_scan(config: ScanConfig, jobs: int = 1) -> ScanReport:
    """One record per (point, repeat) with the configured method."""
    config.validate()
    tasks = [
        (config, i, rep, config.method, config.n_steps)
        for i in range(len(config.points))
        for rep in range(config.repeats)
    ]
    records = _execute(tasks, jobs)
    return ScanReport(config, records, _summarize(records, ("label", "method")))


def steps_sweep(config: ScanConfig, ns_values, jobs: int = 1) -> ScanReport:
    """SPVQE scans for each step count; summary rows are keyed by ``ns``."""
    config = replace(config, method="spvqe")
    ns_values = [int(n) for n in ns_values]
    if any(n < 1 for n in ns_values):
        raise StructuralError("step counts must be >= 1")
    if ns_values:
        config.validate()
    tasks = [
        (config, i, rep, "spvqe", ns)
        for ns in ns_values
        for i in range(len(config.points))
        for rep in range(config.repeats)
    ]
    records = _execute(tasks, jobs)
    return ScanReport(config, records, _summarize(records, ("ns", "label")), kind="steps_sweep")


def robustness_study(config: ScanConfig, n_starts: int = DEFAULT_STARTS, jobs: int = 1) -> ScanReport:
    """CVQE and SPVQE from the same ``n_starts`` random starts per point.

    Both methods get the same total iteration budget: SPVQE splits it
    across its steps.
    """
    if n_starts < 2:
        raise StructuralError("robustness study needs n_starts >= 2")
    config = replace(config, repeats=n_starts, budget_mode="total", method="spvqe")
    config.validate()
    tasks = [
        (config, i, rep, method, config.n_steps)
        for i in range(len(config.points))
        for method in ("cvqe", "spvqe")
        for rep in range(n_starts)
    ]
    records = _execute(tasks, jobs)
    return ScanReport(config, records, _summarize(records, ("label", "method")), kind="robustness")


def oracle_table(config: ScanConfig, n_levels: int = 8) -> list[dict]:
    """Lowest eigenpairs per point with their S^2 and N expectations."""
    from .exact import exact_spectrum

    rows = []
    for point in config.points:
        problem = _load_problem(point.path, config.mapping, config.constraints,
                                config.n_electrons, config.ms2)
        cons = [Constraint(op, 0.0, k) for k, op in problem.observables.items()]
        spec = exact_spectrum(problem.hamiltonian, cons)
        for level in range(min(n_levels, len(spec.eigenvalues))):
            row = {"label": point.label, "bond_length": point.bond_length, "level": level,
                   "energy": float(spec.eigenvalues[level])}
            for j, c in enumerate(cons):
                row[c.label] = float(spec.constraint_values[level, j])
            rows.append(row)
        rows.append({"label": point.label, "bond_length": point.bond_length, "level": "target",
                     "energy": problem.reference[0]})
    return rows


def validate_inputs(config: ScanConfig) -> list[str]:
    """Problems found in the config and its FCIDUMP files (empty when clean)."""
    issues = []
    try:
        config.validate()
    except (SpvqeError, ValueError) as exc:
        return [str(exc)]
    for point in config.points:
        if point.path.endswith(OPERATOR_SUFFIX):
            try:
                op = load_operator(Path(point.path).read_text())
                if not op.is_hermitian():
                    issues.append(f"{point.label}: operator is not Hermitian")
            except (ValueError, SpvqeError) as exc:
                issues.append(f"{point.label}: {exc}")
            continue
        try:
            ints = read_fcidump(point.path)
        except (ValueError, OSError) as exc:
            issues.append(f"{point.label}: {exc}")
            continue
        for name, defect in ints.symmetry_defects().items():
            if defect > 1e-10:
                issues.append(f"{point.label}: {name} asymmetry {defect:.3g}")
        if config.mapping == "parity_reduced":
            try:
                targets = [t for k, t in config.constraints if k == "particle_number"]
                n = config.n_electrons if config.n_electrons is not None else (
                    int(round(targets[0])) if targets else None)
                sector_for(ints, n, config.ms2)
            except SpvqeError as exc:
                issues.append(f"{point.label}: {exc}")
    return issues
