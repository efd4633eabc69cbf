# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: fused activation jets and Crank-Nicolson sweeps.

Mirrors ``_kernels_py`` exactly; see that module for the array layout.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

TANH = 0
SILU = 1
LINEAR = 2


cdef inline void _derivs(int kind, double z, double t, double* s, double* d1,
                         double* d2, double* d3) noexcept nogil:
    # ``t`` is tanh(z) for kind 0 and tanh(z/2) for kind 1, precomputed in bulk.
    cdef double sig, q, r
    if kind == 0:
        s[0] = t
        d1[0] = 1.0 - t * t
        d2[0] = -2.0 * t * d1[0]
        d3[0] = -2.0 * (d1[0] * d1[0] + t * d2[0])
    elif kind == 2:
        s[0] = z
        d1[0] = 1.0
        d2[0] = 0.0
        d3[0] = 0.0
    else:
        sig = 0.5 * (1.0 + t)
        q = sig * (1.0 - sig)
        r = 1.0 - 2.0 * sig
        s[0] = z * sig
        d1[0] = sig + z * q
        d2[0] = q * (2.0 + z * r)
        d3[0] = q * (r * (2.0 + z * r) + r - 2.0 * z * q)


cdef _bulk_tanh(int kind, z):
    # NumPy's vectorised tanh is several times faster than scalar libm calls.
    if kind == 2:
        return z
    return np.tanh(z) if kind == 0 else np.tanh(0.5 * z)


def _check_kind(int kind):
    if kind not in (0, 1, 2):
        raise ValueError(f"unknown activation kind {kind}")


def activation_derivs(int kind, z):
    _check_kind(kind)
    arr = np.ascontiguousarray(z, dtype=np.float64)
    flat = arr.reshape(-1)
    cdef double[::1] zv = flat
    cdef double[::1] tv = _bulk_tanh(kind, flat)
    cdef Py_ssize_t n = zv.shape[0], i
    s = np.empty(n)
    d1 = np.empty(n)
    d2 = np.empty(n)
    d3 = np.empty(n)
    cdef double[::1] sv = s, v1 = d1, v2 = d2, v3 = d3
    with nogil:
        for i in range(n):
            _derivs(kind, zv[i], tv[i], &sv[i], &v1[i], &v2[i], &v3[i])
    shape = arr.shape
    return s.reshape(shape), d1.reshape(shape), d2.reshape(shape), d3.reshape(shape)


def jet_activation_forward(int kind, z):
    _check_kind(kind)
    z = np.ascontiguousarray(z, dtype=np.float64)
    shape = z.shape
    cdef Py_ssize_t c = shape[0]
    cdef double[:, ::1] zv = z.reshape(c, -1)
    cdef Py_ssize_t m = zv.shape[1], i
    cdef double[::1] tv = _bulk_tanh(kind, z[0].reshape(-1))
    a = np.empty((c, m))
    d1 = np.empty(m)
    d2 = np.empty(m)
    d3 = np.empty(m)
    cdef double[:, ::1] av = a
    cdef double[::1] v1 = d1, v2 = d2, v3 = d3
    cdef double zx
    with nogil:
        if c == 1:
            for i in range(m):
                _derivs(kind, zv[0, i], tv[i], &av[0, i], &v1[i], &v2[i], &v3[i])
        else:
            for i in range(m):
                _derivs(kind, zv[0, i], tv[i], &av[0, i], &v1[i], &v2[i], &v3[i])
                zx = zv[1, i]
                av[1, i] = v1[i] * zx
                av[2, i] = v2[i] * zx * zx + v1[i] * zv[2, i]
                av[3, i] = v1[i] * zv[3, i]
    inner = shape[1:]
    return a.reshape(shape), d1.reshape(inner), d2.reshape(inner), d3.reshape(inner)


def jet_activation_backward(ga, z, d1, d2, d3):
    ga = np.ascontiguousarray(ga, dtype=np.float64)
    shape = ga.shape
    cdef Py_ssize_t c = shape[0]
    cdef double[:, ::1] gv = ga.reshape(c, -1)
    cdef Py_ssize_t m = gv.shape[1], i
    cdef double[::1] v1 = np.ascontiguousarray(d1, dtype=np.float64).reshape(-1)
    cdef double[::1] v2 = np.ascontiguousarray(d2, dtype=np.float64).reshape(-1)
    cdef double[::1] v3 = np.ascontiguousarray(d3, dtype=np.float64).reshape(-1)
    gz = np.empty((c, m))
    cdef double[:, ::1] out = gz
    cdef double[:, ::1] zv
    cdef double zx, gax, gaxx, gat
    if c == 1:
        with nogil:
            for i in range(m):
                out[0, i] = gv[0, i] * v1[i]
        return gz.reshape(shape)
    zv = np.ascontiguousarray(z, dtype=np.float64).reshape(c, -1)
    with nogil:
        for i in range(m):
            zx = zv[1, i]
            gax = gv[1, i]
            gaxx = gv[2, i]
            gat = gv[3, i]
            out[0, i] = (gv[0, i] * v1[i] + v2[i] * (gax * zx + gat * zv[3, i])
                         + gaxx * (v3[i] * zx * zx + v2[i] * zv[2, i]))
            out[1, i] = gax * v1[i] + 2.0 * gaxx * v2[i] * zx
            out[2, i] = gaxx * v1[i]
            out[3, i] = gat * v1[i]
    return gz.reshape(shape)


def cn_propagate(psi0, hdiag, double hoff, double dt, Py_ssize_t nsteps):
    cdef double complex[::1] psi = np.array(psi0, dtype=np.complex128).reshape(-1)
    cdef double[::1] hd = np.ascontiguousarray(hdiag, dtype=np.float64)
    cdef Py_ssize_t m = psi.shape[0], j, k
    if hd.shape[0] != m:
        raise ValueError("hdiag and psi0 lengths differ")
    out = np.empty((nsteps + 1, m), dtype=np.complex128)
    cdef double complex[:, ::1] ov = out
    cdef double complex half = 0.5j * dt
    cdef double complex lo = half * hoff
    cdef double complex[::1] dr = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] cp = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] inv = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] rhs = np.empty(m, dtype=np.complex128)
    cdef double complex prev, nxt, y
    with nogil:
        for j in range(m):
            ov[0, j] = psi[j]
            dr[j] = 1.0 - half * hd[j]
        if m > 0:
            inv[0] = 1.0 / (1.0 + half * hd[0])
            cp[0] = lo * inv[0]
            for j in range(1, m):
                inv[j] = 1.0 / (1.0 + half * hd[j] - lo * cp[j - 1])
                cp[j] = lo * inv[j]
        for k in range(1, nsteps + 1):
            prev = 0
            for j in range(m):
                nxt = psi[j + 1] if j + 1 < m else 0
                rhs[j] = dr[j] * psi[j] - lo * (prev + nxt)
                prev = psi[j]
            y = rhs[0] * inv[0]
            rhs[0] = y
            for j in range(1, m):
                y = (rhs[j] - lo * y) * inv[j]
                rhs[j] = y
            psi[m - 1] = rhs[m - 1]
            for j in range(m - 2, -1, -1):
                psi[j] = rhs[j] - cp[j] * psi[j + 1]
            for j in range(m):
                ov[k, j] = psi[j]
    return out
