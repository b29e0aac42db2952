"""Scalar special functions and singular-weight quadrature.

The workhorse here is :func:`kernel_primitive`,

.. math::

    F(p, q, X, d) = \\int_0^X t^p (t + d)^q \\, dt,

which every stiffness entry and every ramp inner product reduces to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from fracspec.errors import AccuracyError, DomainError

__all__ = [
    "JacobiRule",
    "gamma",
    "gauss_jacobi",
    "gauss_legendre",
    "kernel_primitive",
    "kernel_primitive_many",
]

#: Orders tried by :func:`kernel_primitive` before giving up.
JACOBI_ORDERS = (4, 8, 16, 32, 64, 128, 256)
KERNEL_RTOL = 1.0e-12

# Above this ratio d / X the Jacobi rule alone converges quickly; below it
# the near-endpoint singularity at t = -d is peeled off into graded panels.
_SPLIT_RATIO = 4.0
_PANEL_ORDER = 24


def gamma(x: float) -> float:
    """Gamma function for real arguments away from the poles."""
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise DomainError(f"gamma has a pole at x = {x:g}")
    return math.gamma(x)


@dataclass(frozen=True)
class JacobiRule:
    """Gauss rule for the weight :math:`\\tau^p` on :math:`(0, 1)`."""

    p: float
    n: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=256)
def _jacobi_rule(p: float, n: int) -> JacobiRule:
    # Golub-Welsch on [-1, 1] for (1 - x)^0 (1 + x)^p, then x = 2 tau - 1.
    a, b = 0.0, p
    k = np.arange(n, dtype=float)
    ab = a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / ((2 * k + ab) * (2 * k + ab + 2))
    diag[0] = (b - a) / (ab + 2)

    k = np.arange(1, n, dtype=float)
    offd2 = (
        4 * k * (k + a) * (k + b) * (k + ab)
        / ((2 * k + ab) ** 2 * (2 * k + ab + 1) * (2 * k + ab - 1))
    )

    if n == 1:
        x = diag.copy()
        v0 = np.ones(1)
    else:
        x, vecs = eigh_tridiagonal(diag, np.sqrt(offd2))
        v0 = vecs[0, :]

    # total mass on (0, 1) is 1 / (p + 1)
    weights = v0**2 / (p + 1.0)
    nodes = 0.5 * (x + 1.0)
    return JacobiRule(p=p, n=n, nodes=_readonly(nodes), weights=_readonly(weights))


def gauss_jacobi(p: float, n: int) -> JacobiRule:
    """Return the ``n``-point Gauss rule for :math:`\\int_0^1 \\tau^p q(\\tau) d\\tau`.

    The rule is exact for polynomials ``q`` of degree up to ``2n - 1``. Rules
    are cached by ``(p, n)`` and their arrays are read-only.
    """
    p = float(p)
    if not p > -1.0:
        raise DomainError(f"Jacobi exponent must exceed -1: p = {p}")
    if int(n) != n or n < 1:
        raise DomainError(f"rule order must be a positive integer: n = {n}")
    return _jacobi_rule(p, int(n))


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on ``[-1, 1]`` (cached, read-only)."""
    x, w = np.polynomial.legendre.leggauss(n)
    return _readonly(x), _readonly(w)


def _jacobi_part(p: float, q: float, X: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Order-doubling Gauss-Jacobi estimate of F on arrays with d > 0."""
    result = np.empty_like(X)
    todo = np.arange(X.size)
    prev = None
    for n in JACOBI_ORDERS:
        rule = gauss_jacobi(p, n)
        Xt, dt = X[todo], d[todo]
        vals = (Xt[:, None] * rule.nodes[None, :] + dt[:, None]) ** q @ rule.weights
        vals *= Xt ** (p + 1.0)
        if prev is not None:
            ok = np.abs(vals - prev) <= KERNEL_RTOL * np.abs(vals)
            result[todo[ok]] = vals[ok]
            todo, vals, prev = todo[~ok], vals[~ok], prev[~ok]
            if todo.size == 0:
                return result
        last, prev = prev, vals

    i = todo[0]
    raise AccuracyError(
        f"kernel_primitive did not converge by n = {JACOBI_ORDERS[-1]} "
        f"for p={p}, q={q}, X={X[i]!r}, d={d[i]!r}",
        estimates=(float(last[0]), float(prev[0])),
    )


def _panel_part(
    p: float, q: float, lo0: np.ndarray, X: np.ndarray, d: np.ndarray
) -> np.ndarray:
    """Integral over ``(lo0, X)`` on dyadic panels; the integrand is smooth there."""
    xi, wi = gauss_legendre(_PANEL_ORDER)
    total = np.zeros_like(X)
    lo = lo0.copy()
    active = lo < X
    while np.any(active):
        a = lo[active]
        b = np.minimum(2.0 * a, X[active])
        half = 0.5 * (b - a)
        t = (0.5 * (a + b))[:, None] + half[:, None] * xi[None, :]
        f = t**p * (t + d[active][:, None]) ** q
        total[active] += half * (f @ wi)
        lo[active] = b
        active = lo < X
    return total


def kernel_primitive_many(p: float, q: float, X, d) -> np.ndarray:
    """Vectorized :func:`kernel_primitive` for scalar exponents and array ``X``, ``d``."""
    p, q = float(p), float(q)
    if not (p > -1.0 and q > -1.0):
        raise DomainError(f"exponents must exceed -1: p = {p}, q = {q}")

    X, d = np.broadcast_arrays(np.asarray(X, dtype=float), np.asarray(d, dtype=float))
    shape = X.shape
    X, d = X.ravel(), d.ravel()
    if np.any(X < 0) or np.any(d < 0):
        raise DomainError("kernel_primitive needs X >= 0 and d >= 0")

    out = np.zeros(X.shape)

    touching = (d == 0) & (X > 0)
    if np.any(touching):
        e = p + q + 1.0
        if not e > 0.0:
            raise DomainError(f"non-integrable kernel at d = 0: p + q = {p + q}")
        out[touching] = X[touching] ** e / e

    general = (d > 0) & (X > 0)
    if np.any(general):
        Xg, dg = X[general], d[general]
        X1 = np.minimum(Xg, _SPLIT_RATIO * dg)
        vals = _jacobi_part(p, q, X1, dg)
        if np.any(X1 < Xg):
            vals += _panel_part(p, q, X1, Xg, dg)
        out[general] = vals

    return out.reshape(shape)


def kernel_primitive(p: float, q: float, X: float, d: float) -> float:
    """Return :math:`\\int_0^X t^p (t + d)^q dt`.

    Computed as :math:`X^{p+1} \\sum_k w_k (X \\tau_k + d)^q` with the
    :func:`gauss_jacobi` rule for weight :math:`\\tau^p`, doubling the order
    from 4 to 256 until two successive estimates agree to 1e-12. When
    ``d`` is small compared to ``X`` only ``(0, 4d)`` is handled that way and
    the rest is integrated on dyadic Gauss-Legendre panels. ``d = 0`` uses the
    closed form.

    :raises DomainError: for exponents below -1, or ``p + q <= -1`` at ``d = 0``.
    :raises AccuracyError: if the order doubling stalls.
    """
    return float(kernel_primitive_many(p, q, X, d))
