"""Mass and stiffness matrices for linear elements.

The stiffness matrix realizes the sesquilinear form of the operator
``ld^alpha rd^beta`` on hat functions through the adjoint-reduced form

.. math::

    K_{kl} = (\\mathcal{D}_{b-}^\\beta \\phi_l, \\mathcal{D}_{b-}^\\alpha \\phi_k),

in which both factors are exact right-sided ramp sums. Every entry is then a
second difference (in both indices) of the node-pair integrals

.. math::

    G_{ij} = \\int_a^{\\min(x_i, x_j)} (x_i - x)^{1-\\beta} (x_j - x)^{1-\\alpha} dx.

:func:`oracle_stiffness` evaluates the three-case split form independently,
by quadrature, for validation.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.special import hyp2f1

from fracspec.errors import AccuracyError, DomainError
from fracspec.fracops import Mesh, RampSum, hat_ramps, rl_derivative
from fracspec.specialfns import gamma, gauss_legendre, kernel_primitive_many

log = logging.getLogger(__name__)

__all__ = [
    "FractionalOrders",
    "dump_matrix",
    "load_matrix",
    "load_vector",
    "mass_matrix",
    "mixed_derivative",
    "oracle_stiffness",
    "stiffness_matrix",
]


@dataclass(frozen=True)
class FractionalOrders:
    """Orders ``(alpha, beta)`` of the operator ``ld^alpha rd^beta``.

    Both orders lie in ``[0, 1]`` and ``1 <= alpha + beta <= 2``; the closed
    ends admit the Laplacian ``alpha = beta = 1`` and the diagonal point
    ``alpha = beta = 1/2``, both of which the discrete problem handles.
    """

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        a, b = float(self.alpha), float(self.beta)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
            raise DomainError(f"orders must lie in [0, 1]: alpha = {a}, beta = {b}")
        if not 1.0 <= a + b <= 2.0:
            raise DomainError(f"need 1 <= alpha + beta <= 2: alpha + beta = {a + b}")

    @property
    def s(self) -> float:
        return 0.5 * (self.alpha + self.beta)

    @property
    def theta(self) -> float:
        """Half-angle of the sector that contains the spectrum."""
        return abs(self.beta - self.alpha) * math.pi / 2

    @property
    def is_laplacian(self) -> bool:
        return self.alpha == 1.0 and self.beta == 1.0

    @property
    def is_symmetric(self) -> bool:
        return self.alpha == self.beta


def mass_matrix(mesh: Mesh) -> np.ndarray:
    """Tridiagonal mass matrix ``(phi_l, phi_k)`` of the interior hats."""
    if mesh.n < 2:
        raise DomainError(f"need at least two elements: n = {mesh.n}")
    n, h = mesh.n - 1, mesh.h
    M = np.zeros((n, n))
    i = np.arange(n)
    M[i, i] = 2.0 * h / 3.0
    M[i[:-1], i[:-1] + 1] = h / 6.0
    M[i[:-1] + 1, i[:-1]] = h / 6.0
    return M


def load_vector(mesh: Mesh, f: float = 1.0) -> np.ndarray:
    """Load vector ``(f, phi_k)`` for a constant source."""
    return np.full(mesh.n - 1, f * mesh.h)


def _laplacian_stiffness(mesh: Mesh) -> np.ndarray:
    n = mesh.n - 1
    K = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    return K / mesh.h


def _second_difference(n: int) -> np.ndarray:
    # row k - 1 holds (1, -2, 1) at columns k - 1, k, k + 1 (hat k)
    W = np.zeros((n - 1, n + 1))
    for k in range(1, n):
        W[k - 1, k - 1 : k + 2] = (1.0, -2.0, 1.0)
    return W


def stiffness_matrix(mesh: Mesh, orders: FractionalOrders) -> np.ndarray:
    """Dense stiffness matrix ``K[k, l] = B[phi_l, phi_k]``.

    ``alpha = beta = 1`` returns the classical ``tridiag(-1, 2, -1) / h``.
    All other orders go through exact ramp integrals, including ``alpha = 1``
    or ``beta = 1`` alone, where the order-one derivative of a hat is a sum
    of steps.
    """
    if mesh.n < 2:
        raise DomainError(f"need at least two elements: n = {mesh.n}")
    if orders.is_laplacian:
        return _laplacian_stiffness(mesh)

    alpha, beta = orders.alpha, orders.beta
    x = mesh.nodes
    Xi, Xj = np.meshgrid(x, x, indexing="ij")

    # G[i, j] pairs the beta-ramp at x_i with the alpha-ramp at x_j
    G = np.empty_like(Xi)
    upper = Xi <= Xj
    lower = ~upper
    try:
        G[upper] = kernel_primitive_many(
            1.0 - beta, 1.0 - alpha, Xi[upper] - mesh.a, Xj[upper] - Xi[upper]
        )
        G[lower] = kernel_primitive_many(
            1.0 - alpha, 1.0 - beta, Xj[lower] - mesh.a, Xi[lower] - Xj[lower]
        )
    except AccuracyError as exc:
        raise AccuracyError(
            f"stiffness assembly failed for alpha={alpha}, beta={beta}, "
            f"n={mesh.n}: {exc}",
            exc.estimates,
        ) from exc

    W = _second_difference(mesh.n)
    scale = 1.0 / (mesh.h**2 * gamma(2.0 - beta) * gamma(2.0 - alpha))
    # K[k, l] = sum_{i in l, j in k} w_i w_j G[i, j]
    return scale * (W @ G.T @ W.T)


# {{{ split-form oracle


def mixed_derivative(
    f: RampSum, inner: float, outer: float, x: np.ndarray, a: float
) -> np.ndarray:
    """Evaluate ``ld^outer rd^inner f`` on ``(a, b)`` for a right-sided ramp sum.

    Writing ``w = rd^inner f``, the outer left derivative is moved inside,

    .. math::

        \\mathcal{D}_{a+}^\\sigma w = w(a) \\frac{(x - a)^{-\\sigma}}{\\Gamma(1 - \\sigma)}
            + \\mathcal{I}_{a+}^{1-\\sigma} w',

    and each term of ``I^{1 - sigma} w'`` is a Gauss hypergeometric function.
    Needs ``0 <= outer < 1`` and ``f`` with exponents above ``inner + 1``
    so that ``w'`` is integrable.
    """
    if f.side.value != "right":
        raise DomainError("mixed_derivative expects a right-sided ramp sum")
    sigma = float(outer)
    if not 0.0 <= sigma < 1.0:
        raise DomainError(f"outer order must lie in [0, 1): {sigma}")

    w = rl_derivative(f, inner)
    if sigma == 0.0:
        return w(x)

    x = np.asarray(x, dtype=float)
    out = w(np.array([a]))[0] * (x - a) ** (-sigma) / gamma(1.0 - sigma)

    acc = np.zeros_like(x)
    for c, z, p in w.terms:
        if not p > 0.0:
            raise DomainError("mixed_derivative needs ramp exponents above zero")
        # w' carries -c p (z - tau)^(p - 1); integrate against (x - tau)^(-sigma)
        acc += -c * p * _pair_integral(x - a, z - x, 1.0 - p, sigma)
    return out + acc / gamma(1.0 - sigma)


def _pair_integral(X: np.ndarray, D: np.ndarray, mu: float, sigma: float) -> np.ndarray:
    """:math:`\\int_a^{\\min(x, z)} (x - \\tau)^{-\\sigma} (z - \\tau)^{-\\mu} d\\tau`.

    ``X = x - a`` and ``D = z - x``; closed forms through ``2F1``.
    """
    out = np.zeros_like(X)
    below = D > 0
    if np.any(below):
        Xb, Db = X[below], D[below]
        # tau -> x - u, u in (0, X): u^(-sigma) (u + D)^(-mu)
        out[below] = (
            Db ** (-mu) * Xb ** (1 - sigma) / (1 - sigma)
            * hyp2f1(mu, 1 - sigma, 2 - sigma, -Xb / Db)
        )
    above = D < 0
    if np.any(above):
        E = -D[above]
        Y = X[above] - E
        pos = Y > 0
        val = np.zeros_like(E)
        # tau -> z - u, u in (0, z - a): u^(-mu) (u + E)^(-sigma)
        Yp, Ep = Y[pos], E[pos]
        val[pos] = (
            Ep ** (-sigma) * Yp ** (1 - mu) / (1 - mu)
            * hyp2f1(sigma, 1 - mu, 2 - mu, -Yp / Ep)
        )
        out[above] = val
    on = D == 0
    if np.any(on):
        out[on] = X[on] ** (1 - sigma - mu) / (1 - sigma - mu)
    return out


def _graded_points(mesh: Mesh, levels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature on every element, graded geometrically toward both ends."""
    xi, wi = gauss_legendre(order)
    # breakpoints on [0, 1/2] in units of h: 0, r^L, ..., r, 1/2 with r = 1/2
    half = 0.5 * 0.5 ** np.arange(levels, -1, -1)
    brk = np.concatenate([[0.0], half])
    lo, hi = brk[:-1], brk[1:]
    ref_x = (0.5 * (lo + hi))[:, None] + (0.5 * (hi - lo))[:, None] * xi[None, :]
    ref_w = (0.5 * (hi - lo))[:, None] * wi[None, :]
    ref_x, ref_w = ref_x.ravel(), ref_w.ravel()
    ref_x = np.concatenate([ref_x, 1.0 - ref_x[::-1]])
    ref_w = np.concatenate([ref_w, ref_w[::-1]])

    h = mesh.h
    x = (mesh.nodes[:-1, None] + h * ref_x[None, :]).ravel()
    w = np.tile(h * ref_w, mesh.n)
    return x, w


def _oracle_matrix(
    mesh: Mesh, orders: FractionalOrders, levels: int, order: int
) -> np.ndarray:
    alpha, beta, s = orders.alpha, orders.beta, orders.s
    x, w = _graded_points(mesh, levels, order)
    n = mesh.n - 1
    hats = [hat_ramps(j, mesh) for j in range(1, mesh.n)]

    if beta > alpha:
        # (rd^s phi_l, ld^sigma rd^alpha phi_k)
        left = [rl_derivative(f, s)(x) for f in hats]
        right = [mixed_derivative(f, alpha, 0.5 * (beta - alpha), x, mesh.a) for f in hats]
    elif beta < alpha:
        # (ld^sigma rd^beta phi_l, rd^s phi_k)
        left = [mixed_derivative(f, beta, 0.5 * (alpha - beta), x, mesh.a) for f in hats]
        right = [rl_derivative(f, s)(x) for f in hats]
    else:
        left = right = [rl_derivative(f, alpha)(x) for f in hats]

    L = np.array(left)  # indexed by l
    R = np.array(right)  # indexed by k
    K = (R * w[None, :]) @ L.T
    assert K.shape == (n, n)
    return K


def oracle_stiffness(
    mesh: Mesh, orders: FractionalOrders, *, levels: int = 30, order: int = 12
) -> np.ndarray:
    """Stiffness matrix from the three-case split form, by quadrature.

    The mixed factor ``ld^sigma rd^alpha phi`` is evaluated pointwise by
    :func:`mixed_derivative`; the products are integrated on panels graded
    geometrically (ratio 1/2) toward every mesh node. Validation only.

    :raises AccuracyError: if refining the Gauss order changes any entry by
        more than 1e-8 relative to the largest entry.
    """
    if mesh.n > 32:
        raise DomainError(f"oracle_stiffness is for small meshes (n <= 32): {mesh.n}")
    if mesh.n < 2:
        raise DomainError(f"need at least two elements: n = {mesh.n}")
    if orders.alpha >= 1.0 or orders.beta >= 1.0:
        if orders.is_laplacian:
            return _laplacian_stiffness(mesh)
        raise DomainError("oracle_stiffness needs alpha, beta < 1 unless both are 1")

    coarse = _oracle_matrix(mesh, orders, levels, order)
    fine = _oracle_matrix(mesh, orders, levels + 8, order + 8)

    err = np.max(np.abs(fine - coarse)) / np.max(np.abs(fine))
    if err > 1.0e-8:
        raise AccuracyError(
            f"graded quadrature stalled: relative change {err:.3e}",
            (float(np.max(np.abs(coarse))), float(np.max(np.abs(fine)))),
        )
    return fine


# }}}


# {{{ text dump


def dump_matrix(A: np.ndarray, path: str | os.PathLike) -> None:
    """Write one row per line, space-separated, 17 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in np.atleast_2d(A):
            fh.write(" ".join(format(float(v), ".17g") for v in row))
            fh.write("\n")


def load_matrix(path: str | os.PathLike) -> np.ndarray:
    return np.loadtxt(path, ndmin=2)


# }}}
