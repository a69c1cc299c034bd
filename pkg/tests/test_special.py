import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbscatter import _kernels_py
from fbscatter._backend import BACKEND, bessel01
from fbscatter.special import (ParameterError, SingularityError, bessel, fundamental_gradient,
                               fundamental_solution, gauss_legendre, hankel01,
                               kress_log_weights)

mpmath.mp.dps = 80


def series_oracle(kind, z):
    """Power series in extended precision (independent of the library code)."""
    z = mpmath.mpf(z)
    half = z / 2
    gamma = mpmath.euler
    terms = int(3 * z) + 60
    if kind in ("J0", "J1"):
        n = int(kind[1])
        return sum((-1) ** m * half ** (2 * m + n) / (mpmath.factorial(m) * mpmath.factorial(m + n))
                   for m in range(terms))
    if kind == "Y0":
        j0 = series_oracle("J0", z)
        s, harm = mpmath.mpf(0), mpmath.mpf(0)
        for m in range(1, terms):
            harm += mpmath.mpf(1) / m
            s += (-1) ** (m + 1) * harm * half ** (2 * m) / mpmath.factorial(m) ** 2
        return 2 / mpmath.pi * ((mpmath.log(half) + gamma) * j0 + s)
    j1 = series_oracle("J1", z)
    s, harm = mpmath.mpf(0), mpmath.mpf(0)
    for m in range(terms):
        psi1 = -gamma + harm
        psi2 = psi1 + mpmath.mpf(1) / (m + 1)
        s += (-1) ** m * (psi1 + psi2) * half ** (2 * m + 1) / (
            mpmath.factorial(m) * mpmath.factorial(m + 1))
        harm += mpmath.mpf(1) / (m + 1)
    return -2 / (mpmath.pi * z) + 2 / mpmath.pi * mpmath.log(half) * j1 - s / mpmath.pi


KINDS = ["J0", "J1", "Y0", "Y1"]


@pytest.mark.parametrize("kind", KINDS)
def test_series_oracle_agrees_with_mpmath(kind):
    for z in (0.3, 4.0, 31.0):
        ref = (mpmath.besselj if kind[0] == "J" else mpmath.bessely)(int(kind[1]), z)
        assert abs(series_oracle(kind, z) - ref) < mpmath.mpf(10) ** -40


def test_bessel_spec_values():
    assert bessel("J0", 0.0) == 1.0
    assert abs(bessel("J0", 1.0) - 0.7651976865579666) <= 1e-15
    assert abs(bessel("Y0", 1.0) - 0.08825696421567696) <= 1e-15


@settings(max_examples=60, deadline=None)
@given(z=st.floats(min_value=1e-6, max_value=50.0), kind=st.sampled_from(KINDS))
def test_bessel_against_series(z, kind):
    ref = float(series_oracle(kind, z))
    assert abs(bessel(kind, z) - ref) <= 1e-15 * max(1.0, abs(ref))


@pytest.mark.parametrize("z", [1e-8, 0.5, 7.9, 8.1, 24.99, 25.0, 25.01, 49.0, 300.0])
def test_bessel_regimes_and_branch_switch(z):
    for kind in KINDS:
        ref = float((mpmath.besselj if kind[0] == "J" else mpmath.bessely)(int(kind[1]), z))
        assert abs(bessel(kind, z) - ref) <= 1e-15 * max(1.0, abs(ref))


def test_compiled_and_numpy_kernels_agree():
    z = np.concatenate([np.geomspace(1e-6, 1, 50), np.linspace(1, 80, 400)])
    fast = np.array(bessel01(z, True))
    slow = np.array(_kernels_py.bessel01(z, True))
    assert np.allclose(fast, slow, rtol=4e-16 * 8, atol=1e-16 * 8)


def test_backend_name():
    assert BACKEND in ("cython", "numpy")


def test_bessel_errors():
    with pytest.raises(ParameterError):
        bessel("J2", 1.0)
    with pytest.raises(ParameterError):
        bessel("J0", -1.0)
    with pytest.raises(SingularityError):
        bessel("Y1", 0.0)


def test_bessel_array_shape():
    z = np.linspace(0.1, 3, 12).reshape(3, 4)
    assert bessel("J1", z).shape == (3, 4)


def test_fundamental_solution_value():
    x, y = np.array([0.3, -0.2]), np.array([0.3, 0.8])
    val = fundamental_solution(x, y, 1.0)
    assert abs(val.real - (-0.02206424105392)) < 1e-13
    assert abs(val.imag - float(mpmath.besselj(0, 1)) / 4) < 1e-15


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4), st.floats(0.1, 10))
def test_fundamental_symmetry_and_gradients(c, k):
    x, y = np.array(c[:2]), np.array(c[2:])
    if np.hypot(*(x - y)) < 1e-3:
        return
    assert fundamental_solution(x, y, k) == fundamental_solution(y, x, k)
    gx = fundamental_gradient(x, y, k, "x")
    gy = fundamental_gradient(x, y, k, "y")
    assert np.allclose(gx + gy, 0, atol=1e-15)
    d = (x - y) / np.hypot(*(x - y))
    perp = np.array([-d[1], d[0]])
    assert abs(gx @ perp) <= 1e-14 * max(1.0, np.abs(gx).max())


def test_fundamental_gradient_finite_difference():
    x, y, k, h = np.array([1.1, 0.4]), np.array([-0.3, 0.2]), 1.25, 1e-5
    d = (x - y) / np.hypot(*(x - y))
    fd = (fundamental_solution(x + h * d, y, k) - fundamental_solution(x - h * d, y, k)) / (2 * h)
    assert abs(fundamental_gradient(x, y, k) @ d - fd) < 1e-8


def test_fundamental_errors():
    x = np.array([1.0, 2.0])
    with pytest.raises(SingularityError):
        fundamental_solution(x, x, 1.0)
    with pytest.raises(ParameterError):
        fundamental_gradient(x, x + 1, 1.0, wrt="z")


def test_hankel_combination():
    h0, h1 = hankel01(np.array([2.0]))
    assert abs(h0[0] - complex(mpmath.hankel1(0, 2))) < 1e-15
    assert abs(h1[0] - complex(mpmath.hankel1(1, 2))) < 1e-15


@pytest.mark.parametrize("n", [2, 8, 64, 300])
def test_kress_weights_properties(n):
    r = kress_log_weights(n)
    assert len(r) == n
    assert np.allclose(r[1:], r[1:][::-1], atol=1e-14)
    assert abs(r.sum()) < 1e-12


def test_kress_weights_n2():
    assert abs(kress_log_weights(2)[0] + 3 * np.pi) < 1e-14


def test_kress_weights_integrate_log_kernel():
    # int ln(4 sin^2((t - s)/2)) cos(m s) ds = -2 pi cos(m t) / m
    n = 64
    t = 2 * np.pi * np.arange(n) / n
    r = kress_log_weights(n)
    for m in (1, 5, 20):
        approx = np.array([r[np.abs(j - np.arange(n))] @ np.cos(m * t) for j in range(n)])
        assert np.allclose(approx, -2 * np.pi * np.cos(m * t) / m, atol=1e-12)


def test_kress_weights_errors():
    with pytest.raises(ParameterError):
        kress_log_weights(7)


def test_gauss_legendre_small():
    x, w = gauss_legendre(1)
    assert x[0] == 0 and w[0] == 2
    x, w = gauss_legendre(2)
    assert np.allclose(x, [-1 / np.sqrt(3), 1 / np.sqrt(3)], atol=1e-15)
    assert np.allclose(w, [1, 1], atol=1e-15)


@pytest.mark.parametrize("m", [3, 8, 17, 40])
def test_gauss_legendre_exactness(m):
    x, w = gauss_legendre(m)
    assert abs(w @ x ** (2 * m - 1)) < 1e-14
    assert abs(w @ x ** (2 * m - 2) - 2.0 / (2 * m - 1)) < 1e-14
    xr, wr = np.polynomial.legendre.leggauss(m)
    assert np.allclose(x, xr, atol=1e-14) and np.allclose(w, wr, atol=1e-14)


def test_gauss_legendre_errors():
    with pytest.raises(ParameterError):
        gauss_legendre(0)
