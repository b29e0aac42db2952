from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from fracspec.errors import DomainError
from fracspec.specialfns import (
    gamma,
    gauss_jacobi,
    gauss_legendre,
    kernel_primitive,
    kernel_primitive_many,
)

mpmath.mp.dps = 50


# {{{ gamma


def test_gamma_trivial_values():
    assert gamma(1.0) == pytest.approx(1.0, rel=1e-15)
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert gamma(0.5) == pytest.approx(1.7724538509, abs=1e-10)


@pytest.mark.parametrize("x", [1.4, 0.1, 0.75, 1.9, 2.5, 3.3, -0.5, -1.3, 0.01])
def test_gamma_against_mpmath(x):
    assert gamma(x) == pytest.approx(float(mpmath.gamma(mpmath.mpf(x))), rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -3.0])
def test_gamma_poles(x):
    with pytest.raises(DomainError):
        gamma(x)


# }}}


# {{{ Gauss-Jacobi


def test_jacobi_midpoint():
    rule = gauss_jacobi(0.0, 1)
    assert rule.nodes[0] == pytest.approx(0.5, abs=1e-15)
    assert rule.weights[0] == pytest.approx(1.0, abs=1e-15)


def test_jacobi_first_moment():
    rule = gauss_jacobi(0.4, 2)
    assert rule.integrate(lambda t: t) == pytest.approx(1 / 2.4, rel=1e-14)


@pytest.mark.parametrize("p", [-0.75, -0.25, 0.0, 0.4, 0.9, 1.5])
@pytest.mark.parametrize("n", [1, 3, 8, 32, 256])
def test_jacobi_monomial_exactness(p, n):
    rule = gauss_jacobi(p, n)
    assert np.all(rule.weights > 0)
    assert np.all((rule.nodes > 0) & (rule.nodes < 1))
    assert rule.weights.sum() == pytest.approx(1 / (p + 1), rel=1e-12)
    for k in range(2 * n):
        got = rule.integrate(lambda t: t**k)
        assert got == pytest.approx(1 / (p + k + 1), rel=1e-12), k


def test_jacobi_cos_against_mpmath():
    rule = gauss_jacobi(-0.25, 8)
    ref = mpmath.quad(lambda t: t ** mpmath.mpf(-0.25) * mpmath.cos(t), [0, 1])
    assert rule.integrate(np.cos) == pytest.approx(float(ref), rel=1e-13)


def test_jacobi_cached_and_readonly():
    r1, r2 = gauss_jacobi(0.3, 16), gauss_jacobi(0.3, 16)
    assert r1 is r2
    with pytest.raises(ValueError):
        r1.nodes[0] = 0.0
    x, _ = gauss_legendre(12)
    with pytest.raises(ValueError):
        x[0] = 0.0


@pytest.mark.parametrize("p, n", [(-1.0, 4), (-2.0, 4), (0.5, 0), (0.5, 2.5)])
def test_jacobi_domain(p, n):
    with pytest.raises(DomainError):
        gauss_jacobi(p, n)


def test_jacobi_cache_thread_safety():
    from concurrent.futures import ThreadPoolExecutor

    keys = [(0.1 * (k % 7), 4 + k % 5) for k in range(200)]
    with ThreadPoolExecutor(8) as pool:
        rules = list(pool.map(lambda pn: gauss_jacobi(*pn), keys))
    for (p, n), rule in zip(keys, rules):
        assert rule.n == n and rule.nodes.shape == (n,)
        assert rule.weights.sum() == pytest.approx(1 / (p + 1), rel=1e-12)


# }}}


# {{{ kernel primitive


def _mp_kernel(p, q, X, d):
    # closed form d^q X^(p+1)/(p+1) 2F1(-q, p+1; p+2; -X/d) in 50-digit arithmetic
    p, q, X, d = map(mpmath.mpf, (p, q, X, d))
    if d == 0:
        return float(X ** (p + q + 1) / (p + q + 1))
    return float(d**q * X ** (p + 1) / (p + 1) * mpmath.hyp2f1(-q, p + 1, p + 2, -X / d))


def test_kernel_trivial():
    assert kernel_primitive(0.0, 0.0, 0.7, 0.3) == pytest.approx(0.7, rel=1e-14)
    assert kernel_primitive(0.3, -0.6, 2.0, 0.0) == pytest.approx(2.0**0.7 / 0.7, rel=1e-15)
    assert kernel_primitive(0.3, 0.2, 0.0, 1.0) == 0.0


def test_kernel_reference_value():
    ref, _ = quad(lambda t: t**0.4 * (t + 0.5) ** 0.6, 0, 1, epsabs=0, epsrel=1e-13, limit=200)
    assert kernel_primitive(0.4, 0.6, 1.0, 0.5) == pytest.approx(ref, rel=1e-12)
    assert kernel_primitive(0.4, 0.6, 1.0, 0.5) == pytest.approx(_mp_kernel(0.4, 0.6, 1, 0.5), rel=1e-12)


@pytest.mark.parametrize(
    "p, q, X, d",
    [
        (-0.5, -0.5, 1.0, 1.0),
        (0.9, -0.9, 1.0, 1e-3),
        (-0.9, -0.9, 1.0, 1e-6),
        (1.0, 0.0, 3.0, 0.25),
        (0.1, 0.8, 1.0, 400.0),
        (-0.3, 1.5, 0.01, 0.99),
        (0.5, -0.75, 1.0, 1.0 / 400),
    ],
)
def test_kernel_against_mpmath(p, q, X, d):
    assert kernel_primitive(p, q, X, d) == pytest.approx(_mp_kernel(p, q, X, d), rel=1e-11)


def test_kernel_vectorized_matches_scalar():
    X = np.array([0.0, 0.1, 1.0, 2.0])
    d = np.array([0.5, 0.0, 1e-4, 3.0])
    many = kernel_primitive_many(0.2, -0.4, X, d)
    for i in range(4):
        assert many[i] == pytest.approx(kernel_primitive(0.2, -0.4, X[i], d[i]), rel=1e-15)


exponent = st.floats(-0.9, 1.9)
positive = st.floats(1e-3, 10.0)


@given(exponent, exponent, positive, positive, st.floats(0.05, 20.0))
def test_kernel_scaling(p, q, X, d, c):
    lhs = kernel_primitive(p, q, c * X, c * d)
    rhs = c ** (p + q + 1) * kernel_primitive(p, q, X, d)
    assert lhs == pytest.approx(rhs, rel=1e-10)


@given(exponent, exponent, positive, positive, st.floats(1e-3, 1.0))
def test_kernel_monotone_in_x(p, q, X, d, dx):
    assert kernel_primitive(p, q, X + dx, d) > kernel_primitive(p, q, X, d)


@pytest.mark.parametrize(
    "args",
    [(-1.0, 0.0, 1.0, 1.0), (0.0, -1.2, 1.0, 1.0), (0.0, 0.0, -1.0, 1.0), (0.0, 0.0, 1.0, -0.1), (-0.6, -0.6, 1.0, 0.0)],
)
def test_kernel_domain(args):
    with pytest.raises(DomainError):
        kernel_primitive(*args)


# }}}
