"""FCIDUMP reader (chemists' notation, 1-based indices)."""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

from .errors import FcidumpError

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FermionIntegrals:
    """Spatial-orbital integrals in Hartree.

    ``h[p, q]`` is the one-body term, ``g[p, q, r, s] = (pq|rs)`` the
    two-body term in chemists' order, ``e0`` the constant shift.
    """

    n_spatial: int
    n_electrons: int
    ms2: int
    h: np.ndarray
    g: np.ndarray
    e0: float = 0.0

    def __post_init__(self):
        n = self.n_spatial
        if n < 1:
            raise FcidumpError("NORB must be positive")
        if self.h.shape != (n, n) or self.g.shape != (n, n, n, n):
            raise FcidumpError("integral arrays do not match NORB")

    @property
    def n_modes(self) -> int:
        return 2 * self.n_spatial

    def symmetry_defects(self) -> dict[str, float]:
        """Largest deviation from h/g permutational symmetry."""
        h, g = self.h, self.g
        dh = float(np.max(np.abs(h - h.T)))
        dg = 0.0
        for perm in _EIGHTFOLD:
            dg = max(dg, float(np.max(np.abs(g - g.transpose(perm)))))
        return {"h": dh, "g": dg}


# index permutations (as transposes of g) leaving real (pq|rs) invariant
_EIGHTFOLD = [
    (0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
    (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0),
]

_HEADER_END = re.compile(r"(&END|/)\s*$", re.IGNORECASE)


def _looks_numeric(line: str) -> bool:
    fields = line.split()
    if not fields:
        return False
    try:
        float(fields[0].replace("D", "E").replace("d", "e"))
    except ValueError:
        return False
    return True


def _header_int(header: str, key: str, required: bool) -> int | None:
    m = re.search(rf"\b{key}\s*=\s*(-?\d+)", header, re.IGNORECASE)
    if m is None:
        if required:
            raise FcidumpError(f"missing {key} in FCIDUMP header")
        return None
    return int(m.group(1))


def _set_symmetric(arr, idx_sets, value, where):
    for idx in idx_sets:
        old = arr[idx]
        if old != 0.0 and abs(old - value) > SYMMETRY_TOL:
            raise FcidumpError(
                f"{where}: value {value} conflicts with symmetric record {old}"
            )
        arr[idx] = value


def parse_fcidump(text: str) -> FermionIntegrals:
    """Parse FCIDUMP text into fully expanded integral arrays.

    Records with ``k = l = 0`` are one-body, all-zero indices give the
    constant shift, and records with only ``i`` set (orbital energies) are
    ignored. Two-body records are expanded over the 8-fold symmetry.
    """
    lines = text.splitlines()
    if not lines or "&FCI" not in lines[0].upper():
        raise FcidumpError("FCIDUMP must start with an &FCI namelist")
    header_lines = []
    body_start = None
    for i, line in enumerate(lines):
        if i > 0 and _looks_numeric(line):
            body_start = i  # header without explicit terminator
            break
        header_lines.append(line)
        if _HEADER_END.search(line.strip()):
            body_start = i + 1
            break
    if body_start is None:
        body_start = len(lines)
    header = " ".join(header_lines)
    norb = _header_int(header, "NORB", required=True)
    nelec = _header_int(header, "NELEC", required=False) or 0
    ms2 = _header_int(header, "MS2", required=False) or 0
    if norb < 1:
        raise FcidumpError(f"NORB must be positive, got {norb}")

    h = np.zeros((norb, norb))
    g = np.zeros((norb, norb, norb, norb))
    e0 = 0.0
    for lineno, line in enumerate(lines[body_start:], start=body_start + 1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 5:
            raise FcidumpError(f"line {lineno}: expected 5 fields, got {len(fields)}")
        try:
            value = float(fields[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(f) for f in fields[1:])
        except ValueError as exc:
            raise FcidumpError(f"line {lineno}: {exc}") from None
        if any(x < 0 or x > norb for x in (i, j, k, l)):
            raise FcidumpError(f"line {lineno}: index out of range 0..{norb}")
        where = f"line {lineno}"
        if i and j and k and l:
            p, q, r, s = i - 1, j - 1, k - 1, l - 1
            base = (p, q, r, s)
            idx = {tuple(base[a] for a in perm) for perm in _EIGHTFOLD}
            _set_symmetric(g, idx, value, where)
        elif i and j and not k and not l:
            _set_symmetric(h, {(i - 1, j - 1), (j - 1, i - 1)}, value, where)
        elif not (i or j or k or l):
            e0 = value
        elif i and not (j or k or l):
            continue  # orbital energy
        else:
            raise FcidumpError(f"line {lineno}: unsupported index pattern {i} {j} {k} {l}")
    return FermionIntegrals(norb, nelec, ms2, h, g, e0)


def read_fcidump(path) -> FermionIntegrals:
    return parse_fcidump(Path(path).read_text())


def write_fcidump(ints: FermionIntegrals, tol: float = 1e-15) -> str:
    """Serialize integrals, emitting one record per symmetry-unique index set."""
    n = ints.n_spatial
    out = [f" &FCI NORB={n},NELEC={ints.n_electrons},MS2={ints.ms2},", " &END"]
    for p, q, r, s in product(range(n), repeat=4):
        if p < q or r < s or (p * n + q) < (r * n + s):
            continue
        v = ints.g[p, q, r, s]
        if abs(v) > tol:
            out.append(f"{v: .16e} {p + 1} {q + 1} {r + 1} {s + 1}")
    for p in range(n):
        for q in range(p + 1):
            if abs(ints.h[p, q]) > tol:
                out.append(f"{ints.h[p, q]: .16e} {p + 1} {q + 1} 0 0")
    out.append(f"{ints.e0: .16e} 0 0 0 0")
    return "\n".join(out) + "\n"
