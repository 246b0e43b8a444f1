"""Weighted Pauli strings and their dense-matrix realization.

Letter words are little-endian: ``word[q]`` is the letter acting on qubit
``q``, and qubit ``q`` is bit ``q`` of a computational-basis index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import CapacityError, StructuralError

MAX_DENSE_QUBITS = 12
DEFAULT_TOL = 1e-12

# (a, b) -> (power of i, letter) for the single-qubit product a·b
_PRODUCT = {
    ("I", "I"): (0, "I"), ("I", "X"): (0, "X"), ("I", "Y"): (0, "Y"), ("I", "Z"): (0, "Z"),
    ("X", "I"): (0, "X"), ("X", "X"): (0, "I"), ("X", "Y"): (1, "Z"), ("X", "Z"): (3, "Y"),
    ("Y", "I"): (0, "Y"), ("Y", "X"): (3, "Z"), ("Y", "Y"): (0, "I"), ("Y", "Z"): (1, "X"),
    ("Z", "I"): (0, "Z"), ("Z", "X"): (1, "Y"), ("Z", "Y"): (3, "X"), ("Z", "Z"): (0, "I"),
}
_I_POWERS = (1, 1j, -1, -1j)


@lru_cache(maxsize=1 << 16)
def _word_product(a: str, b: str) -> tuple[int, str]:
    power = 0
    letters = []
    for la, lb in zip(a, b):
        k, letter = _PRODUCT[la, lb]
        power += k
        letters.append(letter)
    return power % 4, "".join(letters)


def _check_word(word: str) -> str:
    if not isinstance(word, str) or any(c not in "IXYZ" for c in word):
        raise StructuralError(f"invalid Pauli word {word!r}")
    return word


@dataclass(frozen=True)
class PauliTerm:
    """A single coefficient times a tensor product of Pauli letters."""

    coefficient: complex
    letters: str

    def __post_init__(self):
        _check_word(self.letters)
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return set(self.letters) <= {"I"}

    def __mul__(self, other):
        if isinstance(other, PauliTerm):
            return pauli_mul(self, other)
        return PauliTerm(self.coefficient * other, self.letters)

    __rmul__ = __mul__


def pauli_mul(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Product ``a·b`` including the accumulated phase."""
    if len(a.letters) != len(b.letters):
        raise StructuralError(
            f"word length mismatch: {len(a.letters)} vs {len(b.letters)}"
        )
    power, word = _word_product(a.letters, b.letters)
    return PauliTerm(a.coefficient * b.coefficient * _I_POWERS[power], word)


class QubitOperator:
    """Immutable weighted sum of Pauli strings on ``n_qubits`` qubits.

    Construction merges duplicate words but keeps zero coefficients; call
    :meth:`simplify` to drop them. Arithmetic results are simplified with the
    default tolerance.
    """

    def __init__(self, terms: Mapping[str, complex] | Iterable = (), n_qubits: int | None = None):
        items = terms.items() if isinstance(terms, Mapping) else (
            (t.letters, t.coefficient) if isinstance(t, PauliTerm) else (t[1], t[0])
            for t in terms
        )
        merged: dict[str, complex] = {}
        for word, coeff in items:
            _check_word(word)
            if n_qubits is None:
                n_qubits = len(word)
            elif len(word) != n_qubits:
                raise StructuralError(
                    f"word {word!r} has length {len(word)}, operator has {n_qubits} qubits"
                )
            merged[word] = merged.get(word, 0j) + complex(coeff)
        if n_qubits is None:
            raise StructuralError("n_qubits is required for an empty operator")
        if n_qubits < 0:
            raise StructuralError("n_qubits must be non-negative")
        self.n_qubits = n_qubits
        self._terms = MappingProxyType(dict(sorted(merged.items())))

    # constructors
    @classmethod
    def identity(cls, n_qubits: int, coefficient: complex = 1.0) -> "QubitOperator":
        return cls({"I" * n_qubits: coefficient}, n_qubits)

    @classmethod
    def zero(cls, n_qubits: int) -> "QubitOperator":
        return cls({}, n_qubits)

    @classmethod
    def from_sparse(cls, spec: Mapping[int, str], n_qubits: int, coefficient: complex = 1.0):
        """Build a single term from ``{qubit: letter}``, e.g. ``{0: "X", 3: "Z"}``."""
        word = ["I"] * n_qubits
        for q, letter in spec.items():
            if not 0 <= q < n_qubits:
                raise StructuralError(f"qubit {q} out of range for {n_qubits} qubits")
            word[q] = letter
        return cls({"".join(word): coefficient}, n_qubits)

    @property
    def terms(self) -> Mapping[str, complex]:
        return self._terms

    def __iter__(self):
        for word, coeff in self._terms.items():
            yield PauliTerm(coeff, word)

    def __len__(self):
        return len(self._terms)

    def __repr__(self):
        body = " + ".join(f"({c:.6g}) {w}" for w, c in list(self._terms.items())[:6])
        more = " + ..." if len(self._terms) > 6 else ""
        return f"QubitOperator(n_qubits={self.n_qubits}, {body or '0'}{more})"

    def __eq__(self, other):
        if not isinstance(other, QubitOperator):
            return NotImplemented
        return self.n_qubits == other.n_qubits and dict(self._terms) == dict(other._terms)

    def __hash__(self):
        return hash((self.n_qubits, tuple(self._terms.items())))

    def _check_size(self, other: "QubitOperator"):
        if self.n_qubits != other.n_qubits:
            raise StructuralError(
                f"qubit count mismatch: {self.n_qubits} vs {other.n_qubits}"
            )

    # arithmetic
    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = QubitOperator.identity(self.n_qubits, other)
        if not isinstance(other, QubitOperator):
            return NotImplemented
        self._check_size(other)
        merged = dict(self._terms)
        for word, coeff in other._terms.items():
            merged[word] = merged.get(word, 0j) + coeff
        return QubitOperator(merged, self.n_qubits).simplify()

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return QubitOperator(
                {w: c * other for w, c in self._terms.items()}, self.n_qubits
            ).simplify()
        if not isinstance(other, QubitOperator):
            return NotImplemented
        self._check_size(other)
        out: dict[str, complex] = {}
        for wa, ca in self._terms.items():
            for wb, cb in other._terms.items():
                power, word = _word_product(wa, wb)
                out[word] = out.get(word, 0j) + ca * cb * _I_POWERS[power]
        return QubitOperator(out, self.n_qubits).simplify()

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def adjoint(self) -> "QubitOperator":
        return QubitOperator(
            {w: c.conjugate() for w, c in self._terms.items()}, self.n_qubits
        )

    def simplify(self, tol: float = DEFAULT_TOL) -> "QubitOperator":
        return op_simplify(self, tol)

    def is_hermitian(self, tol: float = DEFAULT_TOL) -> bool:
        return all(abs(c.imag) <= tol for c in self.simplify(tol)._terms.values())

    def constant(self) -> complex:
        return self._terms.get("I" * self.n_qubits, 0j)

    def to_matrix(self) -> np.ndarray:
        return to_matrix(self)

    def dump(self) -> str:
        return dump_operator(self)

    @cached_property
    def masks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """``(x_masks, z_masks, y_counts, coefficients)`` in term order.

        Term ``t`` acts as ``coefficient * i**y_count * X^x_mask Z^z_mask``.
        """
        n = len(self._terms)
        xm = np.zeros(n, dtype=np.int64)
        zm = np.zeros(n, dtype=np.int64)
        ny = np.zeros(n, dtype=np.int64)
        coeffs = np.zeros(n, dtype=np.complex128)
        for t, (word, coeff) in enumerate(self._terms.items()):
            for q, letter in enumerate(word):
                if letter in "XY":
                    xm[t] |= 1 << q
                if letter in "ZY":
                    zm[t] |= 1 << q
                if letter == "Y":
                    ny[t] += 1
            coeffs[t] = coeff
        for arr in (xm, zm, ny, coeffs):
            arr.setflags(write=False)
        return xm, zm, ny, coeffs


def op_simplify(op: QubitOperator, tol: float = DEFAULT_TOL) -> QubitOperator:
    """Drop terms with ``|coefficient| <= tol``; words are already merged and sorted."""
    if tol < 0:
        raise StructuralError("tol must be non-negative")
    kept = {w: c for w, c in op.terms.items() if abs(c) > tol}
    return QubitOperator(kept, op.n_qubits)


def _parity_signs(indices: np.ndarray, mask: int) -> np.ndarray:
    """``(-1)**popcount(indices & mask)`` as float64."""
    return 1.0 - 2.0 * (np.bitwise_count(indices & mask) & 1)


def to_matrix(op: QubitOperator) -> np.ndarray:
    """Dense ``2**n x 2**n`` complex matrix of ``op``."""
    n = op.n_qubits
    if n > MAX_DENSE_QUBITS:
        raise CapacityError(f"{n} qubits exceeds the dense limit of {MAX_DENSE_QUBITS}")
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=np.complex128)
    cols = np.arange(dim, dtype=np.int64)
    xm, zm, ny, coeffs = op.masks
    for x, z, y, c in zip(xm, zm, ny, coeffs):
        # P|i> = i^ny (-1)^{|i & z|} |i ^ x>
        mat[cols ^ x, cols] += c * _I_POWERS[y % 4] * _parity_signs(cols, z)
    return mat


def commutator(a: QubitOperator, b: QubitOperator) -> QubitOperator:
    a._check_size(b)
    out: dict[str, complex] = {}
    for wa, ca in a.terms.items():
        for wb, cb in b.terms.items():
            p_ab, word = _word_product(wa, wb)
            p_ba, _ = _word_product(wb, wa)
            if p_ab == p_ba:
                continue  # commuting strings cancel
            out[word] = out.get(word, 0j) + ca * cb * (_I_POWERS[p_ab] - _I_POWERS[p_ba])
    return QubitOperator(out, a.n_qubits).simplify()


def commutator_norm(a: QubitOperator, b: QubitOperator) -> float:
    """Largest coefficient magnitude of ``[a, b]``; zero iff they commute."""
    if a.n_qubits > MAX_DENSE_QUBITS:
        raise CapacityError(f"{a.n_qubits} qubits exceeds {MAX_DENSE_QUBITS}")
    comm = commutator(a, b)
    return max((abs(c) for c in comm.terms.values()), default=0.0)


def dump_operator(op: QubitOperator) -> str:
    """One ``<re> <im> <letters>`` line per term, lexicographic by word."""
    lines = [f"{c.real:.16e} {c.imag:.16e} {w}" for w, c in sorted(op.terms.items())]
    return "\n".join(lines) + ("\n" if lines else "")


def load_operator(text: str, n_qubits: int | None = None) -> QubitOperator:
    """Inverse of :func:`dump_operator`."""
    terms = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        re_s, im_s, word = line.split()
        terms[word] = terms.get(word, 0j) + complex(float(re_s), float(im_s))
    return QubitOperator(terms, n_qubits)
