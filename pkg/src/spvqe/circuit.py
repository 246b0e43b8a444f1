"""Hardware-efficient Ry/CNOT ansatz, statevectors and expectation estimators.

Ry(theta) = exp(-i theta Y / 2). Each of the ``depth`` repetitions applies
one Ry per qubit followed by a CNOT ladder (control q, target q + 1); a
final Ry layer closes the circuit, giving ``n_qubits * (depth + 1)``
parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import CapacityError, NonHermitianError, StructuralError
from .pauli import DEFAULT_TOL, MAX_DENSE_QUBITS, QubitOperator

IMAG_TOL = 1e-10


@dataclass(frozen=True)
class Ansatz:
    n_qubits: int
    depth: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise StructuralError("ansatz needs at least one qubit")
        if self.depth < 0:
            raise StructuralError("depth must be non-negative")
        if self.n_qubits > MAX_DENSE_QUBITS:
            raise CapacityError(f"{self.n_qubits} qubits exceeds {MAX_DENSE_QUBITS}")

    @property
    def n_params(self) -> int:
        return self.n_qubits * (self.depth + 1)

    @property
    def layout(self) -> list[tuple]:
        """Gate list: ``("ry", qubit, param_index)`` and ``("cx", control, target)``."""
        n = self.n_qubits
        gates = []
        for layer in range(self.depth):
            gates.extend(("ry", q, layer * n + q) for q in range(n))
            gates.extend(("cx", q, q + 1) for q in range(n - 1))
        gates.extend(("ry", q, self.depth * n + q) for q in range(n))
        return gates

    def check_params(self, params) -> np.ndarray:
        params = np.ascontiguousarray(params, dtype=np.float64)
        if params.shape != (self.n_params,):
            raise StructuralError(
                f"expected {self.n_params} parameters, got shape {params.shape}"
            )
        return params


def build_ansatz(n_qubits: int, depth: int) -> Ansatz:
    return Ansatz(n_qubits, depth)


@dataclass(frozen=True, eq=False)
class Statevector:
    """Amplitudes indexed little-endian (bit q of the index is qubit q)."""

    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise StructuralError("amplitude count does not match 2**n_qubits")

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.amplitudes)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def basis(cls, n_qubits: int, index: int = 0) -> "Statevector":
        amps = np.zeros(1 << n_qubits)
        amps[index] = 1.0
        return cls(amps, n_qubits)


def apply_ansatz(ansatz: Ansatz, params) -> Statevector:
    params = ansatz.check_params(params)
    psi = kernels.prepare_state(ansatz.n_qubits, ansatz.depth, params)
    return Statevector(psi, ansatz.n_qubits)


class CompiledObservables:
    """Flattened term masks for a list of Hermitian operators.

    Feeds the kernels, which assume real amplitudes: terms with an odd
    number of Y letters have zero expectation there and get weight 0.
    """

    def __init__(self, operators: list[QubitOperator]):
        if not operators:
            raise StructuralError("need at least one observable")
        n = operators[0].n_qubits
        xs, zs, ws, offsets = [], [], [], [0]
        for op in operators:
            if op.n_qubits != n:
                raise StructuralError("observables act on different qubit counts")
            _require_hermitian(op)
            xm, zm, ny, coeffs = op.masks
            sign = np.where(ny % 2 == 0, 1.0 - 2.0 * ((ny // 2) % 2), 0.0)
            xs.append(xm)
            zs.append(zm)
            ws.append(coeffs.real * sign)
            offsets.append(offsets[-1] + len(xm))
        self.n_qubits = n
        self.operators = list(operators)
        self.xm = np.ascontiguousarray(np.concatenate(xs), dtype=np.int64)
        self.zm = np.ascontiguousarray(np.concatenate(zs), dtype=np.int64)
        self.w = np.ascontiguousarray(np.concatenate(ws), dtype=np.float64)
        self.offsets = np.asarray(offsets, dtype=np.int64)

    def __len__(self):
        return len(self.operators)

    def values(self, psi: np.ndarray) -> np.ndarray:
        return kernels.observable_values(psi, self.xm, self.zm, self.w, self.offsets)

    def gradients(self, ansatz: Ansatz, params: np.ndarray) -> np.ndarray:
        return kernels.shift_gradients(
            ansatz.n_qubits, ansatz.depth, params, self.xm, self.zm, self.w, self.offsets
        )


def _require_hermitian(op: QubitOperator):
    if not op.is_hermitian(DEFAULT_TOL):
        raise NonHermitianError("expectation values need a Hermitian operator")


def _check_sizes(state: Statevector, op: QubitOperator):
    if state.n_qubits != op.n_qubits:
        raise StructuralError(
            f"state has {state.n_qubits} qubits, operator {op.n_qubits}"
        )


def _term_expvals_general(state: Statevector, op: QubitOperator) -> np.ndarray:
    """Per-term ``<psi|P_t|psi>`` (without coefficient) for arbitrary amplitudes."""
    psi = np.asarray(state.amplitudes)
    if len(op) == 0:
        return np.zeros(0)
    if state.is_real:
        xm, zm, ny, _ = op.masks
        signs = np.where(ny % 2 == 0, 1.0 - 2.0 * ((ny // 2) % 2), 0.0)
        return kernels.term_values(np.ascontiguousarray(psi), xm, zm, signs)
    xm, zm, ny, _ = op.masks
    idx = np.arange(psi.shape[0], dtype=np.int64)
    signs = 1.0 - 2.0 * (np.bitwise_count(idx[None, :] & zm[:, None]) & 1)
    raw = (np.conj(psi[idx[None, :] ^ xm[:, None]]) * signs) @ psi
    vals = raw * (1j ** (ny % 4))
    if np.max(np.abs(vals.imag), initial=0.0) > IMAG_TOL:
        raise NonHermitianError("Pauli expectation has an imaginary part")
    return vals.real


def expval(state: Statevector, op: QubitOperator) -> float:
    """Exact ``<psi|op|psi>``."""
    _check_sizes(state, op)
    _require_hermitian(op)
    coeffs = op.masks[3]
    value = complex(np.dot(coeffs, _term_expvals_general(state, op)))
    if abs(value.imag) > IMAG_TOL:
        raise NonHermitianError(f"expectation has imaginary part {value.imag:g}")
    return value.real


@dataclass(frozen=True)
class SampledEstimate:
    mean: float
    stderr: float
    shots: int
    seed: int


def term_rng(seed: int, term_index: int, *stream: int) -> np.random.Generator:
    """Per-term generator, independent of evaluation order."""
    return np.random.default_rng([seed, *stream, term_index])


def sampled_expval(state: Statevector, op: QubitOperator, shots: int, seed: int,
                   stream: tuple = ()) -> SampledEstimate:
    """Finite-shot estimate, each Pauli term measured separately.

    Term ``t`` (in sorted word order) draws ``shots`` ±1 outcomes from its
    exact outcome distribution with a generator seeded by ``(seed, *stream, t)``.
    The identity term is added exactly. ``stderr`` propagates per-term
    sample variances assuming independent terms.
    """
    if shots < 1:
        raise StructuralError("shots must be >= 1")
    _check_sizes(state, op)
    _require_hermitian(op)
    exact = _term_expvals_general(state, op)
    coeffs = op.masks[3].real
    identity = "I" * op.n_qubits
    mean = 0.0
    var = 0.0
    for t, (word, c) in enumerate(zip(op.terms, coeffs)):
        if word == identity:
            mean += c
            continue
        p_plus = min(max(0.5 * (1.0 + exact[t]), 0.0), 1.0)
        k = term_rng(seed, t, *stream).binomial(shots, p_plus)
        m = (2.0 * k - shots) / shots
        mean += c * m
        var += c * c * (1.0 - m * m) / shots
    return SampledEstimate(float(mean), float(np.sqrt(max(var, 0.0))), shots, seed)


def parameter_shift_grad(ansatz: Ansatz, params, op: QubitOperator) -> np.ndarray:
    """``d<op>/dtheta_k = (E(theta + pi/2 e_k) - E(theta - pi/2 e_k)) / 2``."""
    params = ansatz.check_params(params)
    if op.n_qubits != ansatz.n_qubits:
        raise StructuralError("operator and ansatz qubit counts differ")
    return CompiledObservables([op]).gradients(ansatz, params)[0]


class ExactEstimator:
    """Exact expectation values of a fixed observable list along an ansatz."""

    shots = 0

    def __init__(self, ansatz: Ansatz, observables: list[QubitOperator]):
        self.ansatz = ansatz
        self.compiled = CompiledObservables(observables)
        if self.compiled.n_qubits != ansatz.n_qubits:
            raise StructuralError("observables and ansatz qubit counts differ")

    def values(self, params) -> np.ndarray:
        psi = kernels.prepare_state(self.ansatz.n_qubits, self.ansatz.depth, params)
        return self.compiled.values(psi)

    def gradients(self, params) -> np.ndarray:
        return self.compiled.gradients(self.ansatz, params)


class SampledEstimator:
    """Shot-noise estimates; every call consumes a fresh deterministic stream."""

    def __init__(self, ansatz: Ansatz, observables: list[QubitOperator], shots: int, seed: int):
        if shots < 1:
            raise StructuralError("shots must be >= 1")
        self.ansatz = ansatz
        self.observables = list(observables)
        self.shots = shots
        self.seed = seed
        self.calls = 0
        CompiledObservables(self.observables)  # validates Hermiticity and sizes

    def _estimate(self, params) -> np.ndarray:
        state = apply_ansatz(self.ansatz, params)
        call = self.calls
        self.calls += 1
        return np.array([
            sampled_expval(state, op, self.shots, self.seed, stream=(call, i)).mean
            for i, op in enumerate(self.observables)
        ])

    def values(self, params) -> np.ndarray:
        return self._estimate(params)

    def gradients(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=np.float64)
        grad = np.zeros((len(self.observables), params.shape[0]))
        shifted = params.copy()
        for k in range(params.shape[0]):
            shifted[k] = params[k] + 0.5 * np.pi
            plus = self._estimate(shifted)
            shifted[k] = params[k] - 0.5 * np.pi
            minus = self._estimate(shifted)
            shifted[k] = params[k]
            grad[:, k] = 0.5 * (plus - minus)
        return grad
