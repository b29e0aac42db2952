"""Riemann-Liouville calculus on power-ramp sums and on grid data.

A :class:`RampSum` is a finite sum of truncated powers, either right-sided
``c * (node - x)_+^p`` or left-sided ``c * (x - node)_+^p``. Right-sided sums
are closed under the right Riemann-Liouville integral and derivative (and
left-sided under the left ones), which makes hat functions and all their
fractional derivatives exact objects.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable

import numpy as np

from fracspec.errors import DomainError
from fracspec.specialfns import gamma, kernel_primitive_many

__all__ = [
    "GridFunction",
    "Mesh",
    "RampSum",
    "Side",
    "hat_ramps",
    "l2_inner_ramps",
    "rl_derivative",
    "rl_integral",
    "rl_integral_grid",
]


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


def _side(side: Side | str) -> Side:
    return side if isinstance(side, Side) else Side(side)


# {{{ mesh and grid functions


@dataclass(frozen=True)
class Mesh:
    """Uniform mesh of ``n`` elements on ``[a, b]``."""

    a: float
    b: float
    n: int

    def __post_init__(self) -> None:
        if not self.a < self.b:
            raise DomainError(f"need a < b: a = {self.a}, b = {self.b}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"number of elements must be a positive integer: {self.n}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        x = self.a + self.h * np.arange(self.n + 1)
        x[-1] = self.b
        x.setflags(write=False)
        return x

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]


@dataclass(frozen=True)
class GridFunction:
    """Complex nodal values on a mesh, endpoints included."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.mesh.n + 1,):
            raise DomainError(
                f"expected {self.mesh.n + 1} nodal values, got shape {values.shape}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, mesh: Mesh, f: Callable[[np.ndarray], np.ndarray]) -> GridFunction:
        return cls(mesh, np.broadcast_to(f(mesh.nodes), mesh.nodes.shape))

    @classmethod
    def from_interior(cls, mesh: Mesh, interior: np.ndarray) -> GridFunction:
        values = np.zeros(mesh.n + 1, dtype=complex)
        values[1:-1] = interior
        return cls(mesh, values)

    def inner(self, other: GridFunction) -> complex:
        """Trapezoidal approximation of :math:`\\int f \\bar{g} dx`."""
        w = np.full(self.mesh.n + 1, self.mesh.h)
        w[0] = w[-1] = 0.5 * self.mesh.h
        return complex(np.sum(w * self.values * np.conj(other.values)))

    def norm(self) -> float:
        return float(np.sqrt(self.inner(self).real))

    def __add__(self, other: GridFunction) -> GridFunction:
        return GridFunction(self.mesh, self.values + other.values)

    def __mul__(self, c: complex) -> GridFunction:
        return GridFunction(self.mesh, c * self.values)

    __rmul__ = __mul__


# }}}


# {{{ ramp sums


@dataclass(frozen=True)
class RampSum:
    """Finite sum of truncated powers sharing one side.

    ``terms`` holds ``(coefficient, node, exponent)`` triples.
    """

    side: Side
    terms: tuple[tuple[float, float, float], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "side", _side(self.side))
        terms = tuple((float(c), float(z), float(p)) for c, z, p in self.terms)
        for _, _, p in terms:
            if not p > -1.0:
                raise DomainError(f"ramp exponent must exceed -1: {p}")
        object.__setattr__(self, "terms", terms)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([t[0] for t in self.terms])

    @property
    def nodes(self) -> np.ndarray:
        return np.array([t[1] for t in self.terms])

    @property
    def exponents(self) -> np.ndarray:
        return np.array([t[2] for t in self.terms])

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for c, z, p in self.terms:
            r = (z - x) if self.side is Side.RIGHT else (x - z)
            pos = r > 0
            out[pos] += c * r[pos] ** p
        return out

    def __add__(self, other: RampSum) -> RampSum:
        if other.side is not self.side:
            raise DomainError("cannot add ramp sums of different sides")
        return RampSum(self.side, self.terms + other.terms)

    def scale(self, c: float) -> RampSum:
        return RampSum(self.side, tuple((c * k, z, p) for k, z, p in self.terms))

    @classmethod
    def combine(cls, parts: Iterable[tuple[float, RampSum]]) -> RampSum:
        """Linear combination ``sum(c * f)`` of same-sided ramp sums."""
        parts = list(parts)
        side = parts[0][1].side
        terms: tuple = ()
        for c, f in parts:
            if f.side is not side:
                raise DomainError("cannot combine ramp sums of different sides")
            terms += f.scale(c).terms
        return cls(side, terms)


def hat_ramps(j: int, mesh: Mesh, side: Side | str = Side.RIGHT) -> RampSum:
    """Hat function of interior node ``j`` as a ramp sum.

    The right-sided form is ``((x_{j+1} - x)_+ - 2 (x_j - x)_+ + (x_{j-1} - x)_+) / h``;
    ``side="left"`` gives the mirrored representation.
    """
    if not 1 <= j <= mesh.n - 1:
        raise DomainError(f"hat index must be interior (1..{mesh.n - 1}): {j}")
    x, h = mesh.nodes, mesh.h
    w = (1.0 / h, -2.0 / h, 1.0 / h)
    if _side(side) is Side.RIGHT:
        nodes = (x[j + 1], x[j], x[j - 1])
    else:
        nodes = (x[j - 1], x[j], x[j + 1])
    return RampSum(side, tuple((c, z, 1.0) for c, z in zip(w, nodes)))


def rl_derivative(f: RampSum, order: float) -> RampSum:
    """Riemann-Liouville derivative of ``order`` on the side of ``f``.

    Term-wise ``(c, z, p) -> (c * G(p + 1) / G(p + 1 - t), z, p - t)``.
    """
    t = float(order)
    if t < 0.0:
        raise DomainError(f"derivative order must be nonnegative: {t}")
    if t == 0.0:
        return f
    terms = []
    for c, z, p in f.terms:
        if not p - t > -1.0:
            raise DomainError(
                f"derivative of order {t} of a power {p} is not integrable"
            )
        terms.append((c * gamma(p + 1.0) / gamma(p + 1.0 - t), z, p - t))
    return RampSum(f.side, tuple(terms))


def rl_integral(f: RampSum, order: float) -> RampSum:
    """Riemann-Liouville integral of ``order`` on the side of ``f``."""
    t = float(order)
    if not t > 0.0:
        raise DomainError(f"integral order must be positive: {t}")
    return RampSum(
        f.side,
        tuple(
            (c * gamma(p + 1.0) / gamma(p + 1.0 + t), z, p + t) for c, z, p in f.terms
        ),
    )


def l2_inner_ramps(f: RampSum, g: RampSum, mesh: Mesh) -> float:
    """Exact :math:`\\int_a^b f g \\, dx` for two same-sided ramp sums.

    Each term pair reduces to :func:`~fracspec.specialfns.kernel_primitive`
    after shifting the variable to the nearer node.
    """
    if f.side is not g.side:
        raise DomainError("l2_inner_ramps needs ramp sums of the same side")
    if not f.terms or not g.terms:
        return 0.0

    cf, zf, pf = f.coefficients, f.nodes, f.exponents
    cg, zg, pg = g.coefficients, g.nodes, g.exponents
    C = np.multiply.outer(cf, cg)
    ZF, ZG = np.meshgrid(zf, zg, indexing="ij")
    PF, PG = np.meshgrid(pf, pg, indexing="ij")

    if f.side is Side.RIGHT:
        f_near = ZF <= ZG
        X = np.minimum(ZF, ZG) - mesh.a
    else:
        f_near = ZF >= ZG
        X = mesh.b - np.maximum(ZF, ZG)
    X = np.maximum(X, 0.0)
    d = np.abs(ZF - ZG)

    # exponent attached to the nearer node goes on t, the other on (t + d)
    P = np.where(f_near, PF, PG)
    Q = np.where(f_near, PG, PF)
    if np.any((d == 0) & (X > 0) & (P + Q <= -1.0)):
        raise DomainError("ramp product is not integrable")

    total = 0.0
    for p, q in set(zip(P.ravel(), Q.ravel())):
        mask = (P == p) & (Q == q)
        total += float(np.sum(C[mask] * kernel_primitive_many(p, q, X[mask], d[mask])))
    return total


# }}}


# {{{ grid integrals


def rl_integral_grid(f: GridFunction, order: float, side: Side | str) -> GridFunction:
    """Riemann-Liouville integral of grid data by product integration.

    ``f`` is interpolated piecewise linearly and the kernel moments
    :math:`\\int (x - \\tau)^{t-1} \\{1, \\tau\\} d\\tau` are integrated exactly
    on every element, so the rule is exact for piecewise-linear data.
    """
    t = float(order)
    if not t > 0.0:
        raise DomainError(f"integral order must be positive: {t}")
    side = _side(side)

    v = f.values
    if side is Side.RIGHT:
        # reflect x -> a + b - x, which turns the right integral into a left one
        v = v[::-1]

    n, h = f.mesh.n, f.mesh.h
    # the weights depend on m - k only; j = m - k, A = j, B = j - 1 in units of h
    A = np.arange(n + 1, dtype=float)
    B = np.maximum(A - 1.0, 0.0)
    # on an element, f = f_k (s - B) + f_{k+1} (A - s) with s = (x_m - tau) / h
    m0 = (A**t - B**t) / t
    m1 = (A ** (t + 1) - B ** (t + 1)) / (t + 1)
    w_lo = m1 - B * m0
    w_hi = A * m0 - m1
    w_lo[0] = w_hi[0] = 0.0

    scale = h**t / gamma(t)
    out = scale * (np.convolve(w_lo, v[:-1]) + np.convolve(w_hi, v[1:]))[: n + 1]
    if side is Side.RIGHT:
        out = out[::-1]
    return GridFunction(f.mesh, out)


# }}}
