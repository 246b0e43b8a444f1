"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and semantics; results agree to rounding, not bit-for-bit.
"""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _ladder_permutation(n):
    """Gather index equivalent to CNOT(0,1) CNOT(1,2) ... CNOT(n-2,n-1)."""
    idx = np.arange(1 << n)
    perm = idx.copy()
    for q in range(n - 1):
        flip = np.where(idx & (1 << q), idx ^ (1 << (q + 1)), idx)
        perm = perm[flip]
    perm.setflags(write=False)
    return perm


def _ry_layer(psi, n, angles):
    for q in range(n):
        half = 0.5 * angles[q]
        c, s = np.cos(half), np.sin(half)
        v = psi.reshape(1 << (n - 1 - q), 2, 1 << q)
        a0 = v[:, 0, :].copy()
        a1 = v[:, 1, :]
        v[:, 0, :] = c * a0 - s * a1
        v[:, 1, :] = s * a0 + c * a1


def prepare_state(n_qubits, depth, params):
    params = np.asarray(params, dtype=np.float64)
    psi = np.zeros(1 << n_qubits)
    psi[0] = 1.0
    perm = _ladder_permutation(n_qubits)
    for layer in range(depth):
        _ry_layer(psi, n_qubits, params[layer * n_qubits:(layer + 1) * n_qubits])
        psi = psi[perm]
    _ry_layer(psi, n_qubits, params[depth * n_qubits:(depth + 1) * n_qubits])
    return psi


def _raw_terms(psi, xm, zm):
    idx = np.arange(psi.shape[0], dtype=np.int64)
    gathered = psi[idx[None, :] ^ xm[:, None]]
    signs = 1.0 - 2.0 * (np.bitwise_count(idx[None, :] & zm[:, None]) & 1)
    return (gathered * signs) @ psi


def observable_values(psi, xm, zm, w, offsets):
    n_obs = len(offsets) - 1
    out = np.zeros(n_obs)
    if len(xm) == 0:
        return out
    weighted = w * _raw_terms(psi, xm, zm)
    for o in range(n_obs):
        out[o] = weighted[offsets[o]:offsets[o + 1]].sum()
    return out


def term_values(psi, xm, zm, signs):
    if len(xm) == 0:
        return np.zeros(0)
    return np.where(signs != 0.0, signs * _raw_terms(psi, xm, zm), 0.0)


def shift_gradients(n_qubits, depth, params, xm, zm, w, offsets):
    params = np.asarray(params, dtype=np.float64)
    n_par = params.shape[0]
    grad = np.zeros((len(offsets) - 1, n_par))
    if len(xm) == 0:
        return grad
    shifted = params.copy()
    for k in range(n_par):
        shifted[k] = params[k] + 0.5 * np.pi
        plus = observable_values(prepare_state(n_qubits, depth, shifted), xm, zm, w, offsets)
        shifted[k] = params[k] - 0.5 * np.pi
        minus = observable_values(prepare_state(n_qubits, depth, shifted), xm, zm, w, offsets)
        shifted[k] = params[k]
        grad[:, k] = 0.5 * (plus - minus)
    return grad
