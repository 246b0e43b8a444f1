"""Dense-diagonalization reference: spectra and constrained target states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Statevector, expval
from .errors import InfeasibleSectorError, NonHermitianError
from .pauli import QubitOperator, to_matrix

CLUSTER_GAP = 1e-8
SECTOR_TOL = 1e-6


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    constraint_values: np.ndarray | None = None  # (n_eigen, n_constraints)

    def residuals(self, op: QubitOperator) -> np.ndarray:
        mat = to_matrix(op)
        r = mat @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return np.linalg.norm(r, axis=0)


def _hermitian_matrix(op: QubitOperator) -> np.ndarray:
    if not op.is_hermitian():
        raise NonHermitianError("exact spectrum needs a Hermitian operator")
    mat = to_matrix(op)
    return 0.5 * (mat + mat.conj().T)


def _clusters(eigenvalues):
    start = 0
    for i in range(1, len(eigenvalues) + 1):
        if i == len(eigenvalues) or eigenvalues[i] - eigenvalues[i - 1] >= CLUSTER_GAP:
            yield start, i
            start = i


def exact_spectrum(op: QubitOperator, constraints=()) -> SpectrumResult:
    """Full eigendecomposition, ascending.

    When constraint operators are given, every degenerate eigenvalue cluster
    is rotated into a simultaneous eigenbasis of the constraints so the
    per-eigenvector expectations do not depend on LAPACK's basis choice.
    """
    ham = _hermitian_matrix(op)
    evals, evecs = np.linalg.eigh(ham)
    constraints = list(constraints)
    if not constraints:
        return SpectrumResult(evals, evecs)
    mats = [_hermitian_matrix(c.operator) for c in constraints]
    # a generic real combination separates joint eigenvalues of commuting operators
    weights = np.sqrt(np.arange(2, 2 + len(mats), dtype=np.float64))
    combo = sum(w * m for w, m in zip(weights, mats))
    evecs = evecs.astype(np.complex128)
    for lo, hi in _clusters(evals):
        if hi - lo < 2:
            continue
        block = evecs[:, lo:hi]
        sub = block.conj().T @ combo @ block
        _, rot = np.linalg.eigh(0.5 * (sub + sub.conj().T))
        evecs[:, lo:hi] = block @ rot
    values = np.array([
        [float(np.real(v.conj() @ m @ v)) for m in mats] for v in evecs.T
    ])
    if np.allclose(evecs.imag, 0.0, atol=1e-14):
        evecs = evecs.real.copy()
    return SpectrumResult(evals, evecs, values)


def constrained_ground_state(ham: QubitOperator, constraints=(), tol: float = SECTOR_TOL):
    """Lowest eigenpair whose constraint expectations all lie within ``tol`` of target."""
    constraints = list(constraints)
    spec = exact_spectrum(ham, constraints)
    if not constraints:
        return float(spec.eigenvalues[0]), spec.eigenvectors[:, 0]
    targets = np.array([c.target for c in constraints])
    ok = np.all(np.abs(spec.constraint_values - targets) <= tol, axis=1)
    if not np.any(ok):
        raise InfeasibleSectorError(
            "no eigenstate satisfies " + ", ".join(f"{c.label}={c.target:g}" for c in constraints)
        )
    i = int(np.argmax(ok))
    return float(spec.eigenvalues[i]), spec.eigenvectors[:, i]


@dataclass(frozen=True)
class ObservableError:
    energy_error: float
    spin_error: float | None = None
    number_error: float | None = None


def observable_error(result, reference, observables=None) -> ObservableError:
    """Absolute deviations ``|O_result - O_reference|``.

    ``observables`` maps ``"total_spin"``/``"particle_number"`` to operators;
    a list of :class:`Constraint` works too, keyed by their labels.
    """
    ref_energy, ref_vec = reference
    if observables is None:
        observables = {}
    elif not isinstance(observables, dict):
        observables = {c.label: c.operator for c in observables}
    n_qubits = result.state.n_qubits
    ref_state = Statevector(np.asarray(ref_vec), n_qubits)
    errs = {}
    for label, key in (("total_spin", "spin_error"), ("particle_number", "number_error")):
        op = observables.get(label)
        if op is not None:
            errs[key] = abs(expval(result.state, op) - expval(ref_state, op))
    return ObservableError(abs(result.energy - ref_energy), **errs)
