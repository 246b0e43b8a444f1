# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled statevector kernels for the real Ry/CNOT ladder ansatz.

Amplitudes are float64 (the ansatz never leaves the real subspace).
Observables arrive flattened: term ``t`` contributes
``w[t] * <psi| X^xm[t] Z^zm[t] |psi>`` to observable ``o`` when
``offsets[o] <= t < offsets[o + 1]``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, M_PI
from libc.string cimport memset, memcpy

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline void _ry(double* psi, Py_ssize_t dim, Py_ssize_t q, double theta) noexcept nogil:
    cdef double c = cos(0.5 * theta)
    cdef double s = sin(0.5 * theta)
    cdef Py_ssize_t bit = (<Py_ssize_t>1) << q
    cdef Py_ssize_t i, j
    cdef double a0, a1
    for i in range(dim):
        if i & bit:
            continue
        j = i | bit
        a0 = psi[i]
        a1 = psi[j]
        psi[i] = c * a0 - s * a1
        psi[j] = s * a0 + c * a1


cdef inline void _cnot(double* psi, Py_ssize_t dim, Py_ssize_t ctrl, Py_ssize_t tgt) noexcept nogil:
    cdef Py_ssize_t cb = (<Py_ssize_t>1) << ctrl
    cdef Py_ssize_t tb = (<Py_ssize_t>1) << tgt
    cdef Py_ssize_t i, j
    cdef double tmp
    for i in range(dim):
        if (i & cb) and not (i & tb):
            j = i | tb
            tmp = psi[i]
            psi[i] = psi[j]
            psi[j] = tmp


cdef void _prepare(double* psi, int n, int depth, const double* params) noexcept nogil:
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n
    cdef int layer, q
    memset(psi, 0, dim * sizeof(double))
    psi[0] = 1.0
    for layer in range(depth):
        for q in range(n):
            _ry(psi, dim, q, params[layer * n + q])
        for q in range(n - 1):
            _cnot(psi, dim, q, q + 1)
    for q in range(n):
        _ry(psi, dim, q, params[depth * n + q])


cdef inline double _term(const double* psi, Py_ssize_t dim, long long x, long long z) noexcept nogil:
    cdef double acc = 0.0, v
    cdef Py_ssize_t i
    for i in range(dim):
        v = psi[i ^ x] * psi[i]
        if __builtin_popcountll(<unsigned long long>(i & z)) & 1:
            acc -= v
        else:
            acc += v
    return acc


cdef void _observables(const double* psi, Py_ssize_t dim, const long long* xm,
                       const long long* zm, const double* w, const long long* offsets,
                       Py_ssize_t n_obs, double* out) noexcept nogil:
    cdef Py_ssize_t o, t
    cdef double total
    for o in range(n_obs):
        total = 0.0
        for t in range(offsets[o], offsets[o + 1]):
            if w[t] != 0.0:
                total += w[t] * _term(psi, dim, xm[t], zm[t])
        out[o] = total


def prepare_state(int n_qubits, int depth, const double[::1] params):
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n_qubits
    cdef cnp.ndarray[cnp.float64_t, ndim=1] psi = np.empty(dim, dtype=np.float64)
    _prepare(<double*>psi.data, n_qubits, depth, &params[0])
    return psi


def observable_values(const double[::1] psi, const long long[::1] xm, const long long[::1] zm,
                      const double[::1] w, const long long[::1] offsets):
    cdef Py_ssize_t n_obs = offsets.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n_obs, dtype=np.float64)
    if xm.shape[0] == 0:
        return out
    _observables(&psi[0], psi.shape[0], &xm[0], &zm[0], &w[0], &offsets[0], n_obs,
                 <double*>out.data)
    return out


def term_values(const double[::1] psi, const long long[::1] xm, const long long[::1] zm,
                const double[::1] signs):
    cdef Py_ssize_t n = xm.shape[0], t
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef double* o = <double*>out.data
    for t in range(n):
        if signs[t] != 0.0:
            o[t] = signs[t] * _term(&psi[0], psi.shape[0], xm[t], zm[t])
    return out


def shift_gradients(int n_qubits, int depth, const double[::1] params,
                    const long long[::1] xm, const long long[::1] zm,
                    const double[::1] w, const long long[::1] offsets):
    """Parameter-shift derivatives, shape ``(n_observables, n_params)``."""
    cdef Py_ssize_t n_par = params.shape[0]
    cdef Py_ssize_t n_obs = offsets.shape[0] - 1
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n_qubits
    cdef cnp.ndarray[cnp.float64_t, ndim=2] grad = np.zeros((n_obs, n_par), dtype=np.float64)
    if xm.shape[0] == 0 or n_par == 0:
        return grad
    cdef double[::1] shifted = np.empty(n_par, dtype=np.float64)
    cdef double[::1] psi = np.empty(dim, dtype=np.float64)
    cdef double[::1] plus = np.empty(n_obs, dtype=np.float64)
    cdef double[::1] minus = np.empty(n_obs, dtype=np.float64)
    cdef double[:, ::1] g = grad
    cdef Py_ssize_t k, o
    cdef double half_pi = 0.5 * M_PI
    with nogil:
        memcpy(&shifted[0], &params[0], n_par * sizeof(double))
        for k in range(n_par):
            shifted[k] = params[k] + half_pi
            _prepare(&psi[0], n_qubits, depth, &shifted[0])
            _observables(&psi[0], dim, &xm[0], &zm[0], &w[0], &offsets[0], n_obs, &plus[0])
            shifted[k] = params[k] - half_pi
            _prepare(&psi[0], n_qubits, depth, &shifted[0])
            _observables(&psi[0], dim, &xm[0], &zm[0], &w[0], &offsets[0], n_obs, &minus[0])
            shifted[k] = params[k]
            for o in range(n_obs):
                g[o, k] = 0.5 * (plus[o] - minus[o])
    return grad
