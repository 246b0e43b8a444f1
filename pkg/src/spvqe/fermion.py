"""Second-quantized operators and fermion-to-qubit mappings.

Spin orbitals use block ordering: mode ``p`` is spatial orbital ``p`` with
spin alpha for ``p < n_spatial``, and mode ``n_spatial + p`` is the same
orbital with spin beta. The two-qubit reduction relies on this ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

from .errors import StructuralError, SymmetryViolationError
from .fcidump import FermionIntegrals
from .pauli import DEFAULT_TOL, QubitOperator

Ladder = tuple[int, bool]  # (mode, is_creation)


def _normal_order_term(ops: list[Ladder], coeff: complex, out: dict) -> None:
    """Accumulate the normal-ordered expansion of ``coeff * ops`` into ``out``.

    Creation operators end up left of annihilators, each group sorted by
    descending mode index.
    """
    ops = list(ops)
    for i in range(1, len(ops)):
        for j in range(i, 0, -1):
            right, left = ops[j], ops[j - 1]
            if right[1] and not left[1]:
                ops[j - 1], ops[j] = right, left
                coeff = -coeff
                if right[0] == left[0]:
                    # a_p a+_p = 1 - a+_p a_p
                    _normal_order_term(ops[: j - 1] + ops[j + 1 :], -coeff, out)
            elif right[1] == left[1]:
                if right[0] == left[0]:
                    return  # Pauli exclusion
                if right[0] > left[0]:
                    ops[j - 1], ops[j] = right, left
                    coeff = -coeff
    key = tuple(ops)
    out[key] = out.get(key, 0j) + coeff


class FermionOperator:
    """Immutable, normal-ordered sum of ladder-operator products."""

    def __init__(self, terms: Mapping[tuple[Ladder, ...], complex] = (), n_modes: int = 1):
        if n_modes < 1:
            raise StructuralError("n_modes must be positive")
        merged: dict = {}
        for ops, coeff in dict(terms).items():
            ops = tuple((int(m), bool(d)) for m, d in ops)
            for m, _ in ops:
                if not 0 <= m < n_modes:
                    raise StructuralError(f"mode {m} out of range for {n_modes} modes")
            _normal_order_term(list(ops), complex(coeff), merged)
        self.n_modes = n_modes
        self.terms = {k: v for k, v in sorted(merged.items()) if abs(v) > DEFAULT_TOL}

    @classmethod
    def identity(cls, n_modes: int, coefficient: complex = 1.0) -> "FermionOperator":
        return cls({(): coefficient}, n_modes)

    @classmethod
    def ladder(cls, mode: int, creation: bool, n_modes: int) -> "FermionOperator":
        return cls({((mode, creation),): 1.0}, n_modes)

    def __repr__(self):
        return f"FermionOperator(n_modes={self.n_modes}, {len(self.terms)} terms)"

    def __eq__(self, other):
        if not isinstance(other, FermionOperator):
            return NotImplemented
        if self.n_modes != other.n_modes or self.terms.keys() != other.terms.keys():
            return False
        return all(abs(self.terms[k] - other.terms[k]) <= DEFAULT_TOL for k in self.terms)

    def _check(self, other):
        if self.n_modes != other.n_modes:
            raise StructuralError(f"mode count mismatch: {self.n_modes} vs {other.n_modes}")

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = FermionOperator.identity(self.n_modes, other)
        self._check(other)
        merged = dict(self.terms)
        for k, v in other.terms.items():
            merged[k] = merged.get(k, 0j) + v
        return FermionOperator(merged, self.n_modes)

    __radd__ = __add__

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return FermionOperator({k: v * other for k, v in self.terms.items()}, self.n_modes)
        self._check(other)
        out: dict = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                out[ka + kb] = out.get(ka + kb, 0j) + va * vb
        return FermionOperator(out, self.n_modes)

    def __rmul__(self, other):
        return self * other


def build_hamiltonian(ints: FermionIntegrals) -> FermionOperator:
    """Molecular Hamiltonian over ``2 * n_spatial`` spin orbitals.

    ``sum h_pq a+_p a_q + 1/2 sum g_pqrs a+_p a+_r a_s a_q + e0`` with each
    spatial coefficient replicated over same-spin index combinations.
    """
    n = ints.n_spatial
    n_modes = 2 * n
    terms: dict = {(): ints.e0}
    spins = (0, n)
    for p in range(n):
        for q in range(n):
            if ints.h[p, q] == 0.0:
                continue
            for off in spins:
                key = ((p + off, True), (q + off, False))
                terms[key] = terms.get(key, 0.0) + ints.h[p, q]
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s in range(n):
                    v = ints.g[p, q, r, s]
                    if v == 0.0:
                        continue
                    for a in spins:
                        for b in spins:
                            if p + a == r + b:
                                continue
                            key = ((p + a, True), (r + b, True), (s + b, False), (q + a, False))
                            terms[key] = terms.get(key, 0.0) + 0.5 * v
    return FermionOperator(terms, n_modes)


def number_operator(n_modes: int) -> FermionOperator:
    return FermionOperator({((i, True), (i, False)): 1.0 for i in range(n_modes)}, n_modes)


def total_spin_operator(n_spatial: int) -> FermionOperator:
    """S^2 = S- S+ + Sz (Sz + 1) in block spin-orbital ordering."""
    n_modes = 2 * n_spatial
    s_plus = FermionOperator(
        {((p, True), (p + n_spatial, False)): 1.0 for p in range(n_spatial)}, n_modes
    )
    s_minus = FermionOperator(
        {((p + n_spatial, True), (p, False)): 1.0 for p in range(n_spatial)}, n_modes
    )
    sz_terms = {((p, True), (p, False)): 0.5 for p in range(n_spatial)}
    sz_terms.update({((p + n_spatial, True), (p + n_spatial, False)): -0.5 for p in range(n_spatial)})
    s_z = FermionOperator(sz_terms, n_modes)
    return s_minus * s_plus + s_z * s_z + s_z


@lru_cache(maxsize=None)
def _jw_ladder(mode: int, creation: bool, n_modes: int) -> QubitOperator:
    z = "Z" * mode
    pad = "I" * (n_modes - mode - 1)
    sign = -0.5j if creation else 0.5j
    return QubitOperator({z + "X" + pad: 0.5, z + "Y" + pad: sign}, n_modes)


@lru_cache(maxsize=None)
def _parity_ladder(mode: int, creation: bool, n_modes: int) -> QubitOperator:
    # qubit j holds the parity of modes 0..j: flip the update set X_{>j},
    # read the sign from Z_{j-1}, and project on n_j with (Z_{j-1} + Z_j)/2
    low = "I" * max(mode - 1, 0)
    high = "X" * (n_modes - mode - 1)
    if mode == 0:
        first = "X" + high
    else:
        first = low + "ZX" + high
    second = low + ("I" if mode else "") + "Y" + high
    sign = -0.5j if creation else 0.5j
    return QubitOperator({first: 0.5, second: sign}, n_modes)


def _map(fop: FermionOperator, ladder_image) -> QubitOperator:
    n = fop.n_modes
    out: dict[str, complex] = {}
    identity = QubitOperator.identity(n)
    for ops, coeff in fop.terms.items():
        image = identity
        for mode, creation in ops:
            image = image * ladder_image(mode, creation, n)
        for word, c in image.terms.items():
            out[word] = out.get(word, 0j) + coeff * c
    return QubitOperator(out, n).simplify()


def jordan_wigner(fop: FermionOperator) -> QubitOperator:
    """a+_j -> 1/2 (X_j - i Y_j) Z_{j-1} ... Z_0."""
    return _map(fop, _jw_ladder)


def parity_map(fop: FermionOperator) -> QubitOperator:
    """Parity encoding: qubit ``j`` stores the occupation parity of modes ``0..j``."""
    return _map(fop, _parity_ladder)


@dataclass(frozen=True)
class ReductionSector:
    """Z eigenvalues substituted by the two-qubit reduction.

    ``parity_alpha = (-1)**N_alpha`` and ``parity_beta = (-1)**N_beta``.
    """

    parity_alpha: int
    parity_beta: int

    def __post_init__(self):
        if self.parity_alpha not in (1, -1) or self.parity_beta not in (1, -1):
            raise StructuralError("sector parities must be +1 or -1")

    @classmethod
    def from_occupations(cls, n_alpha: int, n_beta: int) -> "ReductionSector":
        return cls(1 - 2 * (n_alpha % 2), 1 - 2 * (n_beta % 2))

    @classmethod
    def from_electrons(cls, n_electrons: int, ms2: int) -> "ReductionSector":
        if (n_electrons + ms2) % 2:
            raise StructuralError(f"MS2={ms2} incompatible with {n_electrons} electrons")
        return cls.from_occupations((n_electrons + ms2) // 2, (n_electrons - ms2) // 2)


def two_qubit_reduction(qop: QubitOperator, sector: ReductionSector) -> QubitOperator:
    """Remove qubits ``n/2 - 1`` (alpha parity) and ``n - 1`` (total parity)."""
    n = qop.n_qubits
    if n % 2 or n < 2:
        raise StructuralError(f"two-qubit reduction needs an even qubit count, got {n}")
    qa, qt = n // 2 - 1, n - 1
    eig = {qa: sector.parity_alpha, qt: sector.parity_alpha * sector.parity_beta}
    out: dict[str, complex] = {}
    for word, coeff in qop.terms.items():
        for q in (qa, qt):
            letter = word[q]
            if letter in "XY":
                raise SymmetryViolationError(
                    f"term {word} acts with {letter} on removed qubit {q}"
                )
            if letter == "Z":
                coeff = coeff * eig[q]
        reduced = word[:qa] + word[qa + 1 : qt]
        out[reduced] = out.get(reduced, 0j) + coeff
    return QubitOperator(out, n - 2).simplify()


MAPPINGS = ("jordan_wigner", "parity", "parity_reduced")


def map_operator(fop: FermionOperator, mapping: str, sector: ReductionSector | None = None) -> QubitOperator:
    """Dispatch on a mapping name from :data:`MAPPINGS`."""
    if mapping == "jordan_wigner":
        return jordan_wigner(fop)
    if mapping == "parity":
        return parity_map(fop)
    if mapping == "parity_reduced":
        if sector is None:
            raise StructuralError("parity_reduced mapping needs a ReductionSector")
        return two_qubit_reduction(parity_map(fop), sector)
    raise StructuralError(f"unknown mapping {mapping!r}; expected one of {MAPPINGS}")


@dataclass(frozen=True, eq=False)
class MappedProblem:
    """Qubit images of H, N and S^2 for one set of integrals."""

    hamiltonian: QubitOperator
    number: QubitOperator
    spin: QubitOperator
    mapping: str
    sector: ReductionSector | None

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_qubits


def sector_for(ints: FermionIntegrals, n_electrons: int | None = None, ms2: int | None = None) -> ReductionSector:
    """Parity sector for a target electron count.

    Without an explicit ``ms2`` the header value is kept when the electron
    count matches the header, otherwise the lowest ``|2 S_z|`` compatible
    with the count is used.
    """
    n = ints.n_electrons if n_electrons is None else int(n_electrons)
    if ms2 is None:
        ms2 = ints.ms2 if n == ints.n_electrons else n % 2
    return ReductionSector.from_electrons(n, ms2)


def map_problem(ints: FermionIntegrals, mapping: str = "parity_reduced",
                sector: ReductionSector | None = None) -> MappedProblem:
    if mapping == "parity_reduced" and sector is None:
        sector = sector_for(ints)
    ops = [build_hamiltonian(ints), number_operator(ints.n_modes), total_spin_operator(ints.n_spatial)]
    ham, num, spin = (map_operator(op, mapping, sector) for op in ops)
    return MappedProblem(ham, num, spin, mapping, sector if mapping == "parity_reduced" else None)
