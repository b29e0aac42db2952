"""Direct solution of ``ld^alpha rd^beta u = f`` with ``u(a) = u(b) = 0``.

The solution has the closed form

.. math::

    u = \\mathcal{I}_{b-}^\\beta \\left(\\mathcal{I}_{a+}^\\alpha f
        + c \\, \\frac{(x - a)^{\\alpha - 1}}{\\Gamma(\\alpha)}\\right),
    \\qquad
    c = -\\frac{\\Gamma(\\alpha)\\Gamma(\\beta)(\\alpha + \\beta - 1)}{(b - a)^{\\alpha + \\beta - 1}}
        \\left(\\mathcal{I}_{b-}^\\beta \\mathcal{I}_{a+}^\\alpha f\\right)(a),

which gives an FEM-independent route to the inverse operator.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from fracspec.assembly import FractionalOrders
from fracspec.errors import ConvergenceError, DomainError
from fracspec.fracops import GridFunction, Mesh, Side, rl_integral_grid
from fracspec.specialfns import gamma, kernel_primitive_many

log = logging.getLogger(__name__)

__all__ = [
    "DirectSolution",
    "PowerResult",
    "apply_inverse",
    "hopf_slope_probe",
    "principal_eigen_power",
]


@dataclass(frozen=True)
class DirectSolution:
    u: GridFunction
    c: complex
    f: GridFunction


def _singular_part(mesh: Mesh, orders: FractionalOrders) -> np.ndarray:
    """Nodal values of ``I_{b-}^beta [(x - a)^(alpha - 1) / Gamma(alpha)]``.

    Integrated exactly; the weakly singular factor is never sampled at ``a``.
    """
    alpha, beta = orders.alpha, orders.beta
    x = mesh.nodes
    vals = kernel_primitive_many(beta - 1.0, alpha - 1.0, mesh.b - x, x - mesh.a)
    return vals / (gamma(alpha) * gamma(beta))


def apply_inverse(
    f: GridFunction, orders: FractionalOrders, mesh: Mesh | None = None
) -> DirectSolution:
    """Solve ``A u = f`` through the closed-form inverse.

    Fractional integrals of grid data use the product rule of
    :func:`~fracspec.fracops.rl_integral_grid`, so the result is exact for
    piecewise-linear ``I^alpha f``.
    """
    mesh = f.mesh if mesh is None else mesh
    if mesh != f.mesh:
        raise DomainError("source lives on a different mesh")
    alpha, beta = orders.alpha, orders.beta
    e = alpha + beta - 1.0
    if e == 0.0:
        raise DomainError("alpha + beta = 1: the closed-form inverse degenerates")

    g = rl_integral_grid(f, alpha, Side.LEFT)
    regular = rl_integral_grid(g, beta, Side.RIGHT).values
    singular = _singular_part(mesh, orders)

    c = -gamma(alpha) * gamma(beta) * e / (mesh.b - mesh.a) ** e * regular[0]
    u = regular + c * singular
    u[-1] = 0.0
    return DirectSolution(GridFunction(mesh, u), complex(c), f)


@dataclass(frozen=True)
class PowerResult:
    value: float
    u: GridFunction
    iterations: int


def principal_eigen_power(
    orders: FractionalOrders,
    mesh: Mesh,
    tol: float = 1.0e-10,
    max_iter: int = 500,
) -> PowerResult:
    """Inverse power iteration with :func:`apply_inverse`.

    Starts from ``sin(pi (x - a) / (b - a))`` and estimates the eigenvalue by
    ``<u, u> / <A^{-1} u, u>`` with trapezoidal inner products, stopping once
    two successive estimates agree to ``tol`` (relative).
    """
    if not tol > 0.0:
        raise DomainError(f"tolerance must be positive: {tol}")
    u = GridFunction.from_function(
        mesh, lambda x: np.sin(np.pi * (x - mesh.a) / (mesh.b - mesh.a))
    )
    u = u * (1.0 / u.norm())
    prev = math.nan
    for k in range(1, max_iter + 1):
        v = apply_inverse(u, orders, mesh).u
        lam = (u.inner(u) / v.inner(u)).real
        u = v * (1.0 / v.norm())
        if abs(lam - prev) <= tol * abs(lam):
            return PowerResult(float(lam), u, k)
        prev = lam
    raise ConvergenceError(
        f"inverse power iteration did not converge in {max_iter} iterations",
        (prev, lam),
    )


def hopf_slope_probe(
    f: Callable[[np.ndarray], np.ndarray],
    orders: FractionalOrders,
    refinements: Sequence[int],
    a: float = 0.0,
    b: float = 1.0,
) -> list[float]:
    """Boundary difference quotients ``(u(x_1) - u(a)) / h``, one per mesh size.

    ``u`` solves ``A u = f`` afresh on each mesh.
    """
    slopes = []
    for n in refinements:
        mesh = Mesh(a, b, n)
        u = apply_inverse(GridFunction.from_function(mesh, f), orders).u.values
        slopes.append(float((u[1].real - u[0].real) / mesh.h))
    return slopes
