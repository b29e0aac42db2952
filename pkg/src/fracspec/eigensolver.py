"""Dense generalized eigensolver for the pencil ``K U = lambda M U``.

``M`` is the tridiagonal mass matrix, so the pencil is reduced to a standard
problem with its bidiagonal Cholesky factor, the eigenvalues come from a
Hessenberg reduction followed by Francis double-shift QR, and eigenvectors
are recovered by inverse iteration on the original pencil.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from fracspec.assembly import FractionalOrders, mass_matrix, stiffness_matrix
from fracspec.errors import AccuracyError, ConvergenceError, NotSPDError
from fracspec.fracops import Mesh

log = logging.getLogger(__name__)

__all__ = [
    "Eigenpair",
    "Spectrum",
    "SpectrumReport",
    "cholesky_band",
    "classify",
    "compute_spectrum",
    "eig_nonsymmetric",
    "eigenvector_inverse_iteration",
    "hessenberg",
    "reduce_standard",
    "solve_gevp",
]

RESIDUAL_TOL = 1.0e-8
REAL_TOL = 1.0e-6
CONE_TOL = 0.02

_EPS = np.finfo(float).eps


# {{{ reduction


def cholesky_band(M: np.ndarray) -> np.ndarray:
    """Lower bidiagonal ``L`` with ``L @ L.T == M`` for tridiagonal SPD ``M``."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    diag = np.diag(M).copy()
    sub = np.diag(M, -1).copy()
    if n > 1 and not np.allclose(sub, np.diag(M, 1), rtol=1e-14, atol=0.0):
        raise NotSPDError("mass matrix is not symmetric")

    ld = np.empty(n)
    ls = np.empty(max(n - 1, 0))
    for i in range(n):
        pivot = diag[i] - (ls[i - 1] ** 2 if i > 0 else 0.0)
        if not pivot > 0.0:
            raise NotSPDError(f"non-positive pivot {pivot:.3e} at row {i}")
        ld[i] = math.sqrt(pivot)
        if i < n - 1:
            ls[i] = sub[i] / ld[i]

    L = np.diag(ld)
    if n > 1:
        L += np.diag(ls, -1)
    return L


def _bidiagonal_solve(L: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve ``L X = B`` for lower bidiagonal ``L``, all columns at once."""
    d, s = np.diag(L), np.diag(L, -1)
    X = np.empty_like(B, dtype=np.result_type(L, B))
    X[0] = B[0] / d[0]
    for i in range(1, B.shape[0]):
        X[i] = (B[i] - s[i - 1] * X[i - 1]) / d[i]
    return X


def reduce_standard(K: np.ndarray, L: np.ndarray) -> np.ndarray:
    """Return ``C = L^{-1} K L^{-T}``, similar to the pencil ``(K, L L^T)``."""
    Y = _bidiagonal_solve(L, np.asarray(K))
    return _bidiagonal_solve(L, Y.T).T


# }}}


# {{{ Hessenberg QR


def _householder(x: np.ndarray) -> tuple[np.ndarray, float]:
    v = x.astype(float).copy()
    alpha = np.linalg.norm(v)
    if alpha == 0.0:
        return v, 0.0
    v[0] += math.copysign(alpha, v[0])
    return v, 2.0 / float(v @ v)


def hessenberg(A: np.ndarray) -> np.ndarray:
    """Upper Hessenberg form of ``A`` by Householder similarity transforms."""
    H = np.array(A, dtype=float)
    n = H.shape[0]
    for k in range(n - 2):
        v, beta = _householder(H[k + 1 :, k])
        if beta == 0.0:
            continue
        H[k + 1 :, k:] -= beta * np.outer(v, v @ H[k + 1 :, k:])
        H[:, k + 1 :] -= beta * np.outer(H[:, k + 1 :] @ v, v)
        H[k + 2 :, k] = 0.0
    return H


def _eig2(a: float, b: float, c: float, d: float) -> tuple[complex, complex]:
    p = 0.5 * (a - d)
    disc = p * p + b * c
    mean = 0.5 * (a + d)
    if disc >= 0.0:
        r = math.sqrt(disc)
        big = mean + math.copysign(r, mean) if mean != 0.0 else r
        det = a * d - b * c
        small = det / big if big != 0.0 else mean - r
        return complex(big), complex(small)
    r = math.sqrt(-disc)
    return complex(mean, -r), complex(mean, r)


def _francis_step(B: np.ndarray, shift_sum: float, shift_prod: float) -> None:
    """One implicit double-shift sweep on the Hessenberg block ``B`` (in place)."""
    m = B.shape[0]
    x = B[0, 0] ** 2 + B[0, 1] * B[1, 0] - shift_sum * B[0, 0] + shift_prod
    y = B[1, 0] * (B[0, 0] + B[1, 1] - shift_sum)
    z = B[1, 0] * B[2, 1]
    for k in range(m - 2):
        v, beta = _householder(np.array([x, y, z]))
        if beta != 0.0:
            q = max(0, k - 1)
            rows = B[k : k + 3, q:]
            rows -= beta * np.outer(v, v @ rows)
            r = min(k + 4, m)
            cols = B[:r, k : k + 3]
            cols -= beta * np.outer(cols @ v, v)
        x = B[k + 1, k]
        y = B[k + 2, k]
        if k < m - 3:
            z = B[k + 3, k]
    v, beta = _householder(np.array([x, y]))
    if beta != 0.0:
        rows = B[m - 2 :, m - 3 :]
        rows -= beta * np.outer(v, v @ rows)
        cols = B[:, m - 2 :]
        cols -= beta * np.outer(cols @ v, v)


def eig_nonsymmetric(C: np.ndarray, *, max_sweeps_per_dim: int = 30) -> np.ndarray:
    """Eigenvalues of a real square matrix.

    Householder reduction to Hessenberg form, then implicit double-shift QR
    with deflation on negligible subdiagonal entries. Complex pairs come from
    2x2 diagonal blocks and are exact conjugates.

    :raises ConvergenceError: after ``30 n`` sweeps, naming the unconverged block.
    """
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    if C.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {C.shape}")
    if n == 0:
        return np.zeros(0, dtype=complex)

    H = hessenberg(C)
    eigs = np.empty(n, dtype=complex)
    hi = n - 1
    its = 0
    sweeps = 0
    cap = max_sweeps_per_dim * n
    anorm = np.max(np.abs(H))

    while hi >= 0:
        # locate the start of the trailing unreduced block
        lo = hi
        while lo > 0:
            scale = abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])
            if scale == 0.0:
                scale = anorm
            if abs(H[lo, lo - 1]) <= _EPS * scale:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1

        if lo == hi:
            eigs[hi] = H[hi, hi]
            hi -= 1
            its = 0
            continue
        if lo == hi - 1:
            eigs[hi - 1], eigs[hi] = _eig2(
                H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi]
            )
            hi -= 2
            its = 0
            continue

        if sweeps >= cap:
            raise ConvergenceError(
                f"QR iteration did not converge after {sweeps} sweeps; "
                f"unconverged block rows {lo}..{hi}",
                tuple(range(lo, hi + 1)),
            )
        sweeps += 1
        its += 1

        B = H[lo : hi + 1, lo : hi + 1]
        if its % 10 == 0:
            # exceptional shift
            t = abs(B[-1, -2]) + abs(B[-2, -3])
            shift_sum, shift_prod = 1.5 * t, t * t
        else:
            a, b, c, d = B[-2, -2], B[-2, -1], B[-1, -2], B[-1, -1]
            shift_sum, shift_prod = a + d, a * d - b * c
        _francis_step(B, shift_sum, shift_prod)

    return eigs


# }}}


# {{{ eigenvectors


def _phase_fix(U: np.ndarray, M: np.ndarray) -> np.ndarray:
    U = U / math.sqrt(float(np.real(np.conj(U) @ (M @ U))))
    k = int(np.argmax(np.abs(U)))
    U = U * (abs(U[k]) / U[k])
    U[k] = abs(U[k])
    return U


def residual(K: np.ndarray, M: np.ndarray, lam: complex, U: np.ndarray) -> float:
    """``||K U - lam M U|| / (||K||_F ||U||)``."""
    r = K @ U - lam * (M @ U)
    return float(np.linalg.norm(r) / (np.linalg.norm(K) * np.linalg.norm(U)))


def eigenvector_inverse_iteration(
    K: np.ndarray,
    M: np.ndarray,
    lam: complex,
    *,
    seed: int = 0,
    max_iter: int = 5,
    tol: float = RESIDUAL_TOL,
) -> np.ndarray:
    """Eigenvector of the pencil for the eigenvalue estimate ``lam``.

    Solves with ``K - lam M`` (dense LU with partial pivoting) from a seeded
    random start. The result is normalized to unit ``M``-norm with its
    largest entry real and positive.

    :raises AccuracyError: if the residual is above ``tol`` after ``max_iter``
        iterations; the best vector is attached as ``exc.vector``.
    """
    n = K.shape[0]
    A = K.astype(complex) - lam * M
    with warnings.catch_warnings():
        # an exactly singular factor is expected when lam is exact
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    tiny = _EPS * max(np.linalg.norm(K, 1), abs(lam) * np.linalg.norm(M, 1), _EPS)
    d = np.diagonal(lu).copy()
    small = np.abs(d) < tiny
    if np.any(small):
        # exact eigenvalue: nudge zero pivots so the solve amplifies the eigenvector
        lu[np.diag_indices(n)] = np.where(small, tiny, d)

    rng = np.random.default_rng(seed)
    y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y /= np.linalg.norm(y)
    best, best_res = y, math.inf
    for _ in range(max_iter):
        x = sla.lu_solve((lu, piv), M @ y, check_finite=False)
        y = x / np.linalg.norm(x)
        res = residual(K, M, lam, y)
        if res < best_res:
            best, best_res = y, res
        if res <= tol:
            break

    U = _phase_fix(best, M)
    if best_res > tol:
        exc = AccuracyError(
            f"inverse iteration residual {best_res:.3e} above {tol:.1e} at "
            f"lambda = {lam:.12g} (defective or clustered eigenvalue?)",
            (best_res,),
        )
        exc.vector = U
        raise exc
    return U


# }}}


# {{{ spectrum


@dataclass(frozen=True)
class Eigenpair:
    value: complex
    vector: np.ndarray
    residual: float


@dataclass(frozen=True)
class Spectrum:
    """Eigenpairs sorted by ``|lambda|``, ties broken by ascending ``Arg``."""

    eigenpairs: tuple[Eigenpair, ...]
    orders: FractionalOrders | None = None
    mesh: Mesh | None = None
    #: 1-based indices whose eigenvector missed the residual target
    failures: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.eigenpairs)

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.eigenpairs], dtype=complex)

    @property
    def residuals(self) -> np.ndarray:
        return np.array([p.residual for p in self.eigenpairs])

    def vector(self, j: int) -> np.ndarray:
        """Eigenvector of the ``j``-th eigenpair (1-based), interior nodes only."""
        if not 1 <= j <= len(self):
            raise IndexError(f"eigenpair index {j} outside 1..{len(self)}")
        return self.eigenpairs[j - 1].vector

    def summary(self) -> dict:
        out = {"size": len(self)}
        if self.mesh is not None:
            out.update(a=self.mesh.a, b=self.mesh.b, n=self.mesh.n)
        if self.orders is not None:
            out.update(alpha=self.orders.alpha, beta=self.orders.beta)
        return out


def sort_order(values: np.ndarray) -> np.ndarray:
    """Indices sorting by modulus, then by argument."""
    return np.lexsort((np.angle(values), np.abs(values)))


def solve_gevp(
    K: np.ndarray,
    M: np.ndarray,
    *,
    orders: FractionalOrders | None = None,
    mesh: Mesh | None = None,
    seed: int = 0,
) -> Spectrum:
    """Solve ``K U = lambda M U`` for all eigenpairs."""
    K = np.asarray(K, dtype=float)
    M = np.asarray(M, dtype=float)
    L = cholesky_band(M)
    C = reduce_standard(K, L)
    values = eig_nonsymmetric(C)
    values = values[sort_order(values)]

    pairs = []
    failures = []
    for j, lam in enumerate(values):
        try:
            U = eigenvector_inverse_iteration(K, M, lam, seed=seed)
        except AccuracyError as exc:
            log.warning("eigenpair %d: %s", j + 1, exc)
            U = exc.vector
            failures.append(j + 1)
        pairs.append(Eigenpair(complex(lam), U, residual(K, M, lam, U)))

    return Spectrum(tuple(pairs), orders=orders, mesh=mesh, failures=tuple(failures))


def compute_spectrum(mesh: Mesh, orders: FractionalOrders, *, seed: int = 0) -> Spectrum:
    """Assemble and solve the discrete eigenproblem on ``mesh``."""
    K = stiffness_matrix(mesh, orders)
    M = mass_matrix(mesh)
    return solve_gevp(K, M, orders=orders, mesh=mesh, seed=seed)


# }}}


# {{{ classification


REGIONS = ("accurate", "transitional", "inaccurate")


@dataclass(frozen=True)
class SpectrumReport:
    real_count: int
    pair_count: int
    #: max over the accurate third of ``|Arg lambda| - theta`` (radians)
    cone_margin: float
    is_real: tuple[bool, ...]
    regions: tuple[str, ...]
    principal_value: complex
    principal_positive: bool
    extra: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return len(self.is_real)

    def as_dict(self) -> dict:
        return {
            "real_count": self.real_count,
            "pair_count": self.pair_count,
            "cone_margin": self.cone_margin,
            "principal_re": self.principal_value.real,
            "principal_im": self.principal_value.imag,
            "principal_positive": self.principal_positive,
        }


def region_labels(n: int) -> tuple[str, ...]:
    """Split indices into thirds; the remainder goes to the last region."""
    third = n // 3
    return tuple(REGIONS[min(i // third, 2)] if third else REGIONS[2] for i in range(n))


def is_real(values: np.ndarray) -> np.ndarray:
    return np.abs(values.imag) <= REAL_TOL * np.maximum(1.0, np.abs(values))


def classify(spectrum: Spectrum, orders: FractionalOrders) -> SpectrumReport:
    if len(spectrum) == 0:
        raise ValueError("cannot classify an empty spectrum")
    values = spectrum.values
    real = is_real(values)
    upper = int(np.sum(~real & (values.imag > 0)))
    lower = int(np.sum(~real & (values.imag < 0)))
    if upper != lower:
        log.warning("unpaired complex eigenvalues: %d above, %d below", upper, lower)

    regions = region_labels(len(values))
    accurate = np.array([r == "accurate" for r in regions])
    if not np.any(accurate):
        accurate[:] = True
    margin = float(np.max(np.abs(np.angle(values[accurate])) - orders.theta))

    U = spectrum.vector(1)
    positive = bool(
        np.all(U.real > 0.0)
        and np.max(np.abs(U.imag)) <= REAL_TOL * np.max(np.abs(U))
    )
    return SpectrumReport(
        real_count=int(np.sum(real)),
        pair_count=upper,
        cone_margin=margin,
        is_real=tuple(bool(r) for r in real),
        regions=regions,
        principal_value=complex(values[0]),
        principal_positive=positive,
    )


# }}}
