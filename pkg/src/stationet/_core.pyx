# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: elementwise activations and the fused hidden layer.

Same signatures and semantics as ``stationet._fallback``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, floor, M_PI, sqrt

cdef extern from "math.h" nogil:
    void sincos(double x, double *s, double *c)

cnp.import_array()

DEF SIN = 0
DEF SINCOS = 1
DEF TRIANGLE = 2
DEF PRELU = 3
DEF RELU = 4

cdef double SQRT2 = sqrt(2.0)
cdef double TRI_SCALE = M_PI / (2.0 * sqrt(2.0))
cdef double PRELU_SCALE = M_PI / 4.0


cdef inline double _parity_sign(double m) noexcept nogil:
    return 1.0 - 2.0 * (m - 2.0 * floor(0.5 * m))


cdef inline double _tri(double z) noexcept nogil:
    cdef double m = floor(z / M_PI + 0.5)
    return (z - M_PI * m) * _parity_sign(m)


cdef inline double _tri_slope(double z) noexcept nogil:
    cdef double t = z / M_PI + 0.5
    cdef double m = floor(t)
    if t == m:
        m -= 1.0
    return _parity_sign(m)


cdef inline double _act(int code, double z) noexcept nogil:
    if code == SIN:
        return SQRT2 * sin(z)
    elif code == SINCOS:
        return sin(z) + cos(z)
    elif code == TRIANGLE:
        return TRI_SCALE * _tri(z)
    elif code == PRELU:
        return PRELU_SCALE * (_tri(z + 0.5 * M_PI) + _tri(z))
    else:
        return z if z > 0.0 else 0.0


cdef inline double _act_grad(int code, double z) noexcept nogil:
    if code == SIN:
        return SQRT2 * cos(z)
    elif code == SINCOS:
        return cos(z) - sin(z)
    elif code == TRIANGLE:
        return TRI_SCALE * _tri_slope(z)
    elif code == PRELU:
        return PRELU_SCALE * (_tri_slope(z + 0.5 * M_PI) + _tri_slope(z))
    else:
        return 1.0 if z > 0.0 else 0.0


cdef _check_code(int code):
    if code < SIN or code > RELU:
        raise ValueError(f"unknown activation code {code}")


def activate(int code, z):
    _check_code(code)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = np.ascontiguousarray(z, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(flat)
    cdef Py_ssize_t i, n = flat.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _act(code, flat[i])
    return out.reshape(np.shape(z))


def activate_grad(int code, z):
    _check_code(code)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = np.ascontiguousarray(z, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(flat)
    cdef Py_ssize_t i, n = flat.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _act_grad(code, flat[i])
    return out.reshape(np.shape(z))


def hidden_layer(int code, X, W, b, double inv_ell, bint with_grad=True):
    _check_code(code)
    cdef double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[:, ::1] w = np.ascontiguousarray(W, dtype=np.float64)
    cdef double[::1] bias = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], K = w.shape[0]
    if w.shape[1] != d or bias.shape[0] != K:
        raise ValueError("shape mismatch in hidden_layer")
    Z = np.empty((n, K))
    A = np.empty((n, K))
    cdef double[:, ::1] zv = Z
    cdef double[:, ::1] av = A
    cdef double[:, ::1] gv
    dA = None
    if with_grad:
        dA = np.empty((n, K))
        gv = dA
    cdef Py_ssize_t i, k, j
    cdef double acc, sn, cs
    with nogil:
        for i in range(n):
            for k in range(K):
                acc = 0.0
                for j in range(d):
                    acc = acc + x[i, j] * w[k, j]
                acc = acc * inv_ell + bias[k]
                zv[i, k] = acc
                if with_grad and code <= SINCOS:
                    sincos(acc, &sn, &cs)
                    if code == SIN:
                        av[i, k] = SQRT2 * sn
                        gv[i, k] = SQRT2 * cs
                    else:
                        av[i, k] = sn + cs
                        gv[i, k] = cs - sn
                else:
                    av[i, k] = _act(code, acc)
                    if with_grad:
                        gv[i, k] = _act_grad(code, acc)
    return Z, A, dA
