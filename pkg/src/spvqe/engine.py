"""VQE, constrained VQE and the sequence-of-penalties schedule.

The penalized cost is ``F = E + P`` with ``E = <H>`` and
``P = sum_i mu_i (<A_i> - a_i)**2``. SPVQE runs the constrained
optimization ``n_steps`` times with ``mu_k = mu_max * k / n_steps``, each
step warm-started from the previous optimum, and keeps the step with the
lowest cost (earliest step on ties).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    Ansatz,
    ExactEstimator,
    SampledEstimate,
    SampledEstimator,
    Statevector,
    apply_ansatz,
    expval,
    sampled_expval,
)
from .errors import (
    DegenerateConstraintError,
    NonHermitianError,
    OptimizationError,
    SpvqeError,
    StructuralError,
)
from .optimizers import (
    OptimizationTrace,
    OptimizerConfig,
    PenaltyStructure,
    cg_minimize,
    nft_minimize,
)
from .pauli import QubitOperator

CONSTRAINT_LABELS = ("total_spin", "particle_number", "custom")


@dataclass(frozen=True, eq=False)
class Constraint:
    operator: QubitOperator
    target: float
    label: str = "custom"

    def __post_init__(self):
        if self.label not in CONSTRAINT_LABELS:
            raise StructuralError(f"unknown constraint label {self.label!r}")
        if not self.operator.is_hermitian():
            raise NonHermitianError(f"constraint {self.label} is not Hermitian")
        object.__setattr__(self, "target", float(self.target))


@dataclass(frozen=True)
class PenaltySchedule:
    """Linear multiplier ramp; ``mu_max`` may be one value per constraint."""

    mu_max: float | tuple[float, ...]
    n_steps: int = 10

    def __post_init__(self):
        if self.n_steps < 1:
            raise StructuralError("n_steps must be >= 1")
        mu = np.atleast_1d(np.asarray(self.mu_max, dtype=np.float64))
        if np.any(mu < 0) or not np.all(np.isfinite(mu)):
            raise StructuralError("mu_max must be finite and non-negative")

    @property
    def step(self):
        return np.asarray(self.mu_max, dtype=np.float64) / self.n_steps

    def mus(self, k: int, n_constraints: int) -> np.ndarray:
        """Multipliers for step ``k`` in ``1..n_steps``."""
        if not 1 <= k <= self.n_steps:
            raise StructuralError(f"step {k} outside 1..{self.n_steps}")
        mu_max = np.broadcast_to(np.asarray(self.mu_max, dtype=np.float64), (n_constraints,))
        if k == self.n_steps:
            return mu_max.copy()
        return mu_max * k / self.n_steps


@dataclass
class VqeResult:
    params: np.ndarray
    energy: float
    cost: float
    penalty: float
    constraint_values: tuple[float, ...]
    trace: OptimizationTrace
    mus: tuple[float, ...] = ()
    x0: np.ndarray | None = None
    state: Statevector | None = None

    def constraint_errors(self, constraints) -> tuple[float, ...]:
        return tuple(abs(v - c.target) for v, c in zip(self.constraint_values, constraints))

    def quantum_evaluations(self) -> int:
        """Energy-estimation rounds: each gradient costs ``2 * n_params`` rounds."""
        return self.trace.evaluations + 2 * len(self.params) * self.trace.gradient_evaluations


@dataclass
class SpvqeStep:
    k: int
    mus: tuple[float, ...]
    x0: np.ndarray
    result: VqeResult


@dataclass
class SpvqeResult:
    steps: list[SpvqeStep] = field(default_factory=list)
    best_index: int = 0

    @property
    def best(self) -> VqeResult:
        return self.steps[self.best_index].result

    @property
    def energy(self) -> float:
        best = self.best
        return best.cost - best.penalty

    def quantum_evaluations(self) -> int:
        return sum(s.result.quantum_evaluations() for s in self.steps)


def _split_cost(comps, mus, targets):
    energy = comps[0]
    if len(mus):
        resid = comps[1:] - targets
        penalty = float(np.sum(mus * resid * resid))
    else:
        penalty = 0.0
    return energy + penalty, energy, penalty


def penalized_cost(ham: QubitOperator, constraints, mus, state: Statevector):
    """Return ``(F, E, P)`` for ``state``."""
    constraints = list(constraints)
    mus = np.asarray(mus, dtype=np.float64)
    if mus.shape != (len(constraints),):
        raise StructuralError("need one multiplier per constraint")
    if np.any(mus < 0):
        raise StructuralError("multipliers must be non-negative")
    comps = np.array([expval(state, ham)] + [expval(state, c.operator) for c in constraints])
    targets = np.array([c.target for c in constraints])
    return _split_cost(comps, mus, targets)


class _Objective:
    """Cost and gradient closures over a shared estimator, caching the last point."""

    def __init__(self, estimator, mus, targets):
        self.estimator = estimator
        self.mus = mus
        self.targets = targets
        self._key = None
        self._comps = None

    def components(self, params):
        key = params.tobytes()
        if key != self._key:
            self._comps = np.asarray(self.estimator.values(params), dtype=np.float64)
            self._key = key
        return self._comps

    def value(self, params):
        return _split_cost(self.components(params), self.mus, self.targets)[0]

    def gradient(self, params):
        grads = self.estimator.gradients(params)
        g = grads[0]
        if len(self.mus):
            resid = self.components(params)[1:] - self.targets
            g = g + (2.0 * self.mus * resid) @ grads[1:]
        return g


def _make_estimator(ansatz, ham, constraints, shots, seed):
    observables = [ham] + [c.operator for c in constraints]
    if shots:
        return SampledEstimator(ansatz, observables, shots, seed)
    return ExactEstimator(ansatz, observables)


def cvqe_run(ham: QubitOperator, constraints, mus, ansatz: Ansatz, x0,
             optimizer_cfg: OptimizerConfig, shots: int = 0, seed: int = 0,
             estimator=None) -> VqeResult:
    """Minimize ``F = E + sum mu_i (<A_i> - a_i)^2`` from ``x0``."""
    constraints = list(constraints)
    mus = np.asarray(mus, dtype=np.float64)
    if mus.shape != (len(constraints),):
        raise StructuralError("need one multiplier per constraint")
    if np.any(mus < 0):
        raise StructuralError("multipliers must be non-negative")
    for c in constraints:
        if c.operator.n_qubits != ham.n_qubits:
            raise StructuralError(f"constraint {c.label} acts on a different qubit count")
    if ham.n_qubits != ansatz.n_qubits:
        raise StructuralError("Hamiltonian and ansatz qubit counts differ")
    x0 = ansatz.check_params(x0).copy()
    targets = np.array([c.target for c in constraints], dtype=np.float64)
    if estimator is None:
        estimator = _make_estimator(ansatz, ham, constraints, shots, seed)
    objective = _Objective(estimator, mus, targets)

    if optimizer_cfg.method == "CG":
        trace = cg_minimize(objective.value, objective.gradient, x0, optimizer_cfg)
    else:
        structure = PenaltyStructure(tuple(mus.tolist()), tuple(targets.tolist()))
        trace = nft_minimize(objective.components, structure, x0, optimizer_cfg)

    params = np.array(trace.best_params)
    comps = objective.components(params)
    cost, energy, penalty = _split_cost(comps, mus, targets)
    return VqeResult(
        params=params,
        energy=float(energy),
        cost=float(cost),
        penalty=float(penalty),
        constraint_values=tuple(float(v) for v in comps[1:]),
        trace=trace,
        mus=tuple(mus.tolist()),
        x0=x0,
        state=apply_ansatz(ansatz, params),
    )


def vqe_run(ham: QubitOperator, ansatz: Ansatz, x0, optimizer_cfg: OptimizerConfig,
            shots: int = 0, seed: int = 0) -> VqeResult:
    """Plain energy minimization; penalty fields are zero."""
    return cvqe_run(ham, [], [], ansatz, x0, optimizer_cfg, shots=shots, seed=seed)


def spvqe_run(ham: QubitOperator, constraints, schedule: PenaltySchedule, ansatz: Ansatz,
              x0, optimizer_cfg: OptimizerConfig, shots: int = 0, seed: int = 0) -> SpvqeResult:
    """Sequence of constrained runs with linearly increasing multipliers.

    Step ``k`` starts from the optimum of step ``k - 1`` (``x0`` for k = 1).
    In sampled mode step ``k`` draws shot noise from seed stream ``(seed, k)``.
    """
    constraints = list(constraints)
    result = SpvqeResult()
    start = ansatz.check_params(x0).copy()
    best_cost = np.inf
    for k in range(1, schedule.n_steps + 1):
        mus = schedule.mus(k, len(constraints))
        step_seed = int(np.random.SeedSequence([seed, k]).generate_state(1)[0]) if shots else seed
        try:
            res = cvqe_run(ham, constraints, mus, ansatz, start, optimizer_cfg,
                           shots=shots, seed=step_seed)
        except SpvqeError as exc:
            raise OptimizationError(
                f"SPVQE step {k} failed: {exc}", last_params=start, partial=result
            ) from exc
        result.steps.append(SpvqeStep(k, tuple(mus.tolist()), start, res))
        if res.cost < best_cost:
            best_cost = res.cost
            result.best_index = k - 1
        start = res.params
    return result


def mu_max_lower_bound(e_gs: float, e_target: float, a_gs_expval: float, a_target: float) -> float:
    """``(E_gs - E_target) / (<A>_gs - a)^2``; negative values are non-binding."""
    denom = (a_gs_expval - a_target) ** 2
    if denom == 0.0:
        raise DegenerateConstraintError(
            "ground state already satisfies the constraint; any mu_max >= 0 is admissible"
        )
    return (e_gs - e_target) / denom


def check_mu_max(mu_max: float, bound: float) -> bool:
    """Warn and return False when a positive bound exceeds ``mu_max``."""
    if bound > 0 and mu_max < bound:
        warnings.warn(
            f"mu_max={mu_max:g} is below the lower bound {bound:g}", RuntimeWarning, stacklevel=2
        )
        return False
    return True


def final_remeasure(ham: QubitOperator, ansatz: Ansatz, best_params, shots: int,
                    seed: int) -> SampledEstimate:
    """Estimate ``E`` alone at the optimum; ``shots=0`` returns the exact value.

    The uncertainty is that of the energy measurement only, which is smaller
    than propagating errors through ``F - P``.
    """
    state = apply_ansatz(ansatz, best_params)
    if shots == 0:
        return SampledEstimate(expval(state, ham), 0.0, 0, seed)
    return sampled_expval(state, ham, shots, seed)


def reconstructed_energy(ham: QubitOperator, constraints, mus, ansatz: Ansatz, params,
                         shots: int, seed: int) -> SampledEstimate:
    """``E = F - P`` with ``F`` and ``P`` estimated from independent measurements.

    ``F`` uses one sample of ``H`` and every ``A_i``; ``P`` uses a second,
    independent sample of every ``A_i``.
    """
    constraints = list(constraints)
    mus = np.asarray(mus, dtype=np.float64)
    state = apply_ansatz(ansatz, params)
    m = len(constraints)
    e = sampled_expval(state, ham, shots, seed, stream=(0,))
    a_f = [sampled_expval(state, c.operator, shots, seed, stream=(1 + i,)) for i, c in enumerate(constraints)]
    a_p = [sampled_expval(state, c.operator, shots, seed, stream=(1 + m + i,)) for i, c in enumerate(constraints)]
    targets = np.array([c.target for c in constraints])
    r_f = np.array([a.mean for a in a_f]) - targets
    r_p = np.array([a.mean for a in a_p]) - targets
    f = e.mean + float(np.sum(mus * r_f ** 2))
    p = float(np.sum(mus * r_p ** 2))
    var_f = e.stderr ** 2 + float(np.sum((2 * mus * r_f * np.array([a.stderr for a in a_f])) ** 2))
    var_p = float(np.sum((2 * mus * r_p * np.array([a.stderr for a in a_p])) ** 2))
    return SampledEstimate(f - p, float(np.sqrt(var_f + var_p)), shots, seed)
