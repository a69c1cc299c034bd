"""Pure numpy implementation of the Bessel kernel.

Mirrors ``_kernels.pyx`` step for step. Used when the compiled extension is
unavailable or when ``FBSCATTER_PURE=1`` is set.
"""

import numpy as np

EULER_GAMMA = 0.57721566490153286061
ASYMPTOTIC_THRESHOLD = 25.0
_RESCALE = 1.0e200
_TWO_OVER_PI = 2.0 / np.pi
_INV_SQRT2 = 0.70710678118654752440


def _miller_start(zmax):
    m = int(zmax + 12.0 * zmax ** (1.0 / 3.0) + 30.0)
    return m + (m % 2)


def _miller(z, want_y):
    """J0, J1 (and Y0, Y1) by backward recurrence for 0 < z < threshold."""
    m = _miller_start(float(z.max()))
    jp1 = np.zeros_like(z)        # J_{n+1}
    jn = np.full_like(z, 1e-300)  # J_n, arbitrary seed
    norm = np.zeros_like(z)       # J0 + 2 sum J_{2k}
    ysum0 = np.zeros_like(z)      # sum (-1)^k J_{2k} / k
    ysum1 = np.zeros_like(z)      # sum (-1)^k (J_{2k-1} - J_{2k+1}) / k
    inv_z = 1.0 / z
    j1 = None
    n = m
    while n > 0:
        jm1 = 2.0 * n * inv_z * jn - jp1   # J_{n-1}
        if n % 2 == 0:
            k = n // 2
            sgn = 1.0 if k % 2 == 0 else -1.0
            norm += 2.0 * jn
            if want_y:
                ysum0 += sgn * jn / k
                # J_{2k-1} - J_{2k+1}
                ysum1 += sgn * (jm1 - jp1) / k
        jp1, jn = jn, jm1
        big = np.abs(jn) > _RESCALE
        if big.any():
            s = np.where(big, 1.0 / _RESCALE, 1.0)
            jp1 *= s
            jn *= s
            norm *= s
            ysum0 *= s
            ysum1 *= s
        n -= 1
    # jn holds J0, jp1 holds J1 (unnormalised)
    norm += jn
    scale = 1.0 / norm
    j0 = jn * scale
    j1 = jp1 * scale
    if not want_y:
        return j0, j1, None, None
    lg = np.log(0.5 * z) + EULER_GAMMA
    y0 = _TWO_OVER_PI * lg * j0 - 2.0 * _TWO_OVER_PI * ysum0 * scale
    y1 = _TWO_OVER_PI * (lg * j1 - j0 * inv_z) + _TWO_OVER_PI * ysum1 * scale
    return j0, j1, y0, y1


def _hankel_pq(nu, z):
    mu = 4.0 * nu * nu
    inv_z = 1.0 / z
    p = np.ones_like(z)
    q = np.zeros_like(z)
    term = np.ones_like(z)
    for k in range(1, 60):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0) * inv_z
        if k % 2 == 1:
            q += term if (k // 2) % 2 == 0 else -term
        else:
            p += -term if (k // 2) % 2 == 1 else term
        if np.all(np.abs(term) < 1e-18):
            break
    return p, q


def _asymptotic(z, want_y):
    amp = np.sqrt(_TWO_OVER_PI / z)
    c, s = np.cos(z), np.sin(z)
    # chi0 = z - pi/4, chi1 = z - 3pi/4
    c0, s0 = (c + s) * _INV_SQRT2, (s - c) * _INV_SQRT2
    c1, s1 = (s - c) * _INV_SQRT2, -(s + c) * _INV_SQRT2
    p0, q0 = _hankel_pq(0.0, z)
    p1, q1 = _hankel_pq(1.0, z)
    j0 = amp * (p0 * c0 - q0 * s0)
    j1 = amp * (p1 * c1 - q1 * s1)
    if not want_y:
        return j0, j1, None, None
    y0 = amp * (p0 * s0 + q0 * c0)
    y1 = amp * (p1 * s1 + q1 * c1)
    return j0, j1, y0, y1


def bessel01(z, want_y=True):
    """Return (J0, J1, Y0, Y1) evaluated elementwise on a real array ``z >= 0``.

    Y values at ``z == 0`` come back as ``-inf``; callers guard the domain.
    """
    z = np.ascontiguousarray(z, dtype=float)
    shape = z.shape
    z = z.ravel()
    j0 = np.empty_like(z)
    j1 = np.empty_like(z)
    y0 = np.empty_like(z) if want_y else None
    y1 = np.empty_like(z) if want_y else None

    zero = z == 0.0
    small = (~zero) & (z < ASYMPTOTIC_THRESHOLD)
    large = z >= ASYMPTOTIC_THRESHOLD
    for mask, fn in ((small, _miller), (large, _asymptotic)):
        if mask.any():
            a, b, c, d = fn(z[mask], want_y)
            j0[mask] = a
            j1[mask] = b
            if want_y:
                y0[mask] = c
                y1[mask] = d
    if zero.any():
        j0[zero] = 1.0
        j1[zero] = 0.0
        if want_y:
            y0[zero] = -np.inf
            y1[zero] = -np.inf
    out = (j0.reshape(shape), j1.reshape(shape))
    if want_y:
        return out + (y0.reshape(shape), y1.reshape(shape))
    return out + (None, None)
