"""Bessel functions, the Helmholtz fundamental solution, and quadrature weights."""

import numpy as np

from ._backend import bessel01

EULER_GAMMA = 0.57721566490153286061


class ParameterError(ValueError):
    """Invalid numerical parameter (mesh size, quadrature order, ...)."""


class SingularityError(ValueError):
    """Kernel evaluated at a coincident source/target pair."""


_KIND_INDEX = {"J0": 0, "J1": 1, "Y0": 2, "Y1": 3}


def bessel(kind, z):
    """Evaluate J0, J1, Y0 or Y1 at real ``z`` (scalar or array)."""
    try:
        idx = _KIND_INDEX[kind]
    except KeyError:
        raise ParameterError(f"unknown Bessel kind {kind!r}") from None
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0):
        raise ParameterError("Bessel argument must be non-negative")
    if idx >= 2 and np.any(z_arr == 0):
        raise SingularityError(f"{kind} is singular at z = 0")
    vals = bessel01(z_arr, idx >= 2)[idx]
    return float(vals.item()) if np.ndim(z) == 0 else vals


def hankel01(z):
    """H0^(1)(z) and H1^(1)(z) for positive real arrays."""
    j0, j1, y0, y1 = bessel01(z, True)
    return j0 + 1j * y0, j1 + 1j * y1


def _distance(x, y):
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.hypot(d[..., 0], d[..., 1])
    if np.any(r == 0):
        raise SingularityError("fundamental solution evaluated at x == y")
    return d, r


def fundamental_solution(x, y, k):
    """Phi(x, y) = (i/4) H0^(1)(k|x - y|); broadcasts over leading axes."""
    _, r = _distance(x, y)
    h0, _ = hankel01(k * r)
    return 0.25j * h0


def fundamental_gradient(x, y, k, wrt="x"):
    """Gradient of Phi in ``x`` (default) or ``y``; shape ``(..., 2)``."""
    d, r = _distance(x, y)
    _, h1 = hankel01(k * r)
    g = (-0.25j * k * h1 / r)[..., None] * d
    if wrt == "x":
        return g
    if wrt == "y":
        return -g
    raise ParameterError("wrt must be 'x' or 'y'")


def kress_log_weights(n):
    """Weights R_j, j = 0..n-1, for the product rule of ln(4 sin^2((t - tau)/2)).

    Uniform grid t_j = 2 pi j / n. The cosine sum runs up to m = n/2, which
    differs from the interpolatory rule only by an alternating term that is
    exponentially small on smooth integrands.
    """
    if n < 2 or n % 2:
        raise ParameterError("n must be an even integer >= 2")
    j = np.arange(n)
    m = np.arange(1, n // 2 + 1)
    r = -(4.0 * np.pi / n) * (np.cos(2.0 * np.pi * np.outer(j, m) / n) / m).sum(axis=1)
    r -= (4.0 * np.pi / n**2) * (-1.0) ** j
    return r


def gauss_legendre(m, tol=1e-15, maxiter=100):
    """Nodes and weights of the m-point Gauss-Legendre rule on (-1, 1)."""
    if m < 1:
        raise ParameterError("m must be a positive integer")
    i = np.arange(1, m + 1)
    # Chebyshev-angle initial guesses
    x = np.cos(np.pi * (i - 0.25) / (m + 0.5))
    for _ in range(maxiter):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for n in range(2, m + 1):
            p0, p1 = p1, ((2 * n - 1) * x * p1 - (n - 1) * p0) / n
        dp = m * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < tol:
            break
    p0 = np.ones_like(x)
    p1 = x.copy()
    for n in range(2, m + 1):
        p0, p1 = p1, ((2 * n - 1) * x * p1 - (n - 1) * p0) / n
    dp = m * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return x[order], w[order]
