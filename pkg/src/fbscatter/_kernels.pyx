# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Bessel kernel: J0, J1, Y0, Y1 for real arguments.

Same algorithm as ``_kernels_py``: Miller backward recurrence with Neumann
series for Y below ``ASYMPTOTIC_THRESHOLD``, Hankel asymptotics above it.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, cos, sin, fabs, cbrt, INFINITY

cnp.import_array()

cdef double EULER_GAMMA = 0.57721566490153286061
cdef double ASYMPTOTIC_THRESHOLD = 25.0
cdef double RESCALE = 1.0e200
cdef double TWO_OVER_PI = 0.63661977236758134308
cdef double INV_SQRT2 = 0.70710678118654752440


cdef inline void _miller(double z, bint want_y, double* out) noexcept nogil:
    cdef int m = <int>(z + 12.0 * cbrt(z) + 30.0)
    cdef int n, k
    cdef double jp1 = 0.0, jn = 1e-300, jm1
    cdef double norm = 0.0, ysum0 = 0.0, ysum1 = 0.0
    cdef double inv_z = 1.0 / z, sgn, scale, lg
    if m % 2:
        m += 1
    n = m
    while n > 0:
        jm1 = 2.0 * n * inv_z * jn - jp1
        if n % 2 == 0:
            k = n // 2
            sgn = 1.0 if k % 2 == 0 else -1.0
            norm += 2.0 * jn
            if want_y:
                ysum0 += sgn * jn / k
                ysum1 += sgn * (jm1 - jp1) / k
        jp1 = jn
        jn = jm1
        if fabs(jn) > RESCALE:
            jp1 /= RESCALE
            jn /= RESCALE
            norm /= RESCALE
            ysum0 /= RESCALE
            ysum1 /= RESCALE
        n -= 1
    norm += jn
    scale = 1.0 / norm
    out[0] = jn * scale
    out[1] = jp1 * scale
    if want_y:
        lg = log(0.5 * z) + EULER_GAMMA
        out[2] = TWO_OVER_PI * lg * out[0] - 2.0 * TWO_OVER_PI * ysum0 * scale
        out[3] = TWO_OVER_PI * (lg * out[1] - out[0] * inv_z) + TWO_OVER_PI * ysum1 * scale


cdef inline void _hankel_pq(double nu, double z, double* p, double* q) noexcept nogil:
    cdef double mu = 4.0 * nu * nu, inv_z = 1.0 / z, term = 1.0
    cdef int k
    p[0] = 1.0
    q[0] = 0.0
    for k in range(1, 60):
        term = term * (mu - (2 * k - 1) * (2 * k - 1)) / (k * 8.0) * inv_z
        if k % 2 == 1:
            if (k // 2) % 2 == 0:
                q[0] += term
            else:
                q[0] -= term
        else:
            if (k // 2) % 2 == 1:
                p[0] -= term
            else:
                p[0] += term
        if fabs(term) < 1e-18:
            break


cdef inline void _asymptotic(double z, bint want_y, double* out) noexcept nogil:
    cdef double amp = sqrt(TWO_OVER_PI / z)
    cdef double c = cos(z), s = sin(z)
    cdef double c0 = (c + s) * INV_SQRT2, s0 = (s - c) * INV_SQRT2
    cdef double c1 = (s - c) * INV_SQRT2, s1 = -(s + c) * INV_SQRT2
    cdef double p0, q0, p1, q1
    _hankel_pq(0.0, z, &p0, &q0)
    _hankel_pq(1.0, z, &p1, &q1)
    out[0] = amp * (p0 * c0 - q0 * s0)
    out[1] = amp * (p1 * c1 - q1 * s1)
    if want_y:
        out[2] = amp * (p0 * s0 + q0 * c0)
        out[3] = amp * (p1 * s1 + q1 * c1)


def bessel01(z, bint want_y=True):
    """Return (J0, J1, Y0, Y1) evaluated elementwise on a real array ``z >= 0``."""
    arr = np.ascontiguousarray(z, dtype=np.float64)
    shape = arr.shape
    cdef double[::1] zv = arr.ravel()
    cdef Py_ssize_t n = zv.shape[0], i
    j0 = np.empty(n)
    j1 = np.empty(n)
    y0 = np.empty(n if want_y else 0)
    y1 = np.empty(n if want_y else 0)
    cdef double[::1] j0v = j0, j1v = j1, y0v = y0, y1v = y1
    cdef double buf[4]
    cdef double x
    with nogil:
        for i in range(n):
            x = zv[i]
            if x == 0.0:
                buf[0] = 1.0
                buf[1] = 0.0
                buf[2] = -INFINITY
                buf[3] = -INFINITY
            elif x < ASYMPTOTIC_THRESHOLD:
                _miller(x, want_y, buf)
            else:
                _asymptotic(x, want_y, buf)
            j0v[i] = buf[0]
            j1v[i] = buf[1]
            if want_y:
                y0v[i] = buf[2]
                y1v[i] = buf[3]
    if want_y:
        return (j0.reshape(shape), j1.reshape(shape),
                y0.reshape(shape), y1.reshape(shape))
    return j0.reshape(shape), j1.reshape(shape), None, None
