from __future__ import annotations

import numpy as np
import pytest

from fracspec.assembly import FractionalOrders, load_vector, stiffness_matrix
from fracspec.directsolver import apply_inverse, hopf_slope_probe, principal_eigen_power
from fracspec.eigensolver import compute_spectrum
from fracspec.errors import ConvergenceError, DomainError
from fracspec.fracops import GridFunction, Mesh

ORDERS = FractionalOrders(0.6, 0.9)


def _ones(mesh):
    return GridFunction.from_function(mesh, np.ones_like)


def test_classical_case():
    mesh = Mesh(0.0, 1.0, 16)
    sol = apply_inverse(_ones(mesh), FractionalOrders(1, 1))
    x = mesh.nodes
    np.testing.assert_allclose(sol.u.values, x * (1 - x) / 2, atol=1e-14)
    assert sol.c == pytest.approx(-0.5)


@pytest.mark.parametrize("alpha, beta", [(0.6, 0.9), (0.2, 0.9), (0.9, 0.2), (0.5, 0.6), (1.0, 0.4)])
def test_boundary_values_and_positivity(alpha, beta):
    mesh = Mesh(0.0, 1.0, 100)
    u = apply_inverse(_ones(mesh), FractionalOrders(alpha, beta)).u.values
    scale = np.max(np.abs(u))
    assert abs(u[0]) <= 1e-10 * scale and abs(u[-1]) <= 1e-10 * scale
    assert np.all(u.real[1:-1] > 0)


def test_endpoint_on_shifted_interval():
    mesh = Mesh(-2.0, 1.0, 60)
    u = apply_inverse(GridFunction.from_function(mesh, lambda x: 1 + x**2), ORDERS).u.values
    assert abs(u[0]) <= 1e-10 * np.max(np.abs(u))
    assert np.all(u.real[1:-1] > 0)


def test_degenerate_sum_rejected():
    mesh = Mesh(0.0, 1.0, 10)
    with pytest.raises(DomainError):
        apply_inverse(_ones(mesh), FractionalOrders(0.4, 0.6))
    with pytest.raises(DomainError):
        apply_inverse(_ones(mesh), ORDERS, Mesh(0.0, 1.0, 11))


def test_linearity():
    mesh = Mesh(0.0, 1.0, 64)
    f1 = GridFunction.from_function(mesh, np.cos)
    f2 = GridFunction.from_function(mesh, lambda x: x**3)
    c1, c2 = 2.0 - 1.0j, -0.5
    lhs = apply_inverse(c1 * f1 + c2 * f2, ORDERS).u.values
    rhs = c1 * apply_inverse(f1, ORDERS).u.values + c2 * apply_inverse(f2, ORDERS).u.values
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(rhs))


def test_consistency_with_fem():
    mesh = Mesh(0.0, 1.0, 200)
    U = np.linalg.solve(stiffness_matrix(mesh, ORDERS), load_vector(mesh))
    u = apply_inverse(_ones(mesh), ORDERS).u.values[1:-1].real
    assert np.max(np.abs(U - u)) <= 0.02 * np.max(np.abs(u))


def test_power_laplacian():
    res = principal_eigen_power(FractionalOrders(1, 1), Mesh(0.0, 1.0, 400))
    assert res.value == pytest.approx(np.pi**2, rel=1e-3)


def test_power_matches_fem():
    mesh = Mesh(0.0, 1.0, 200)
    res = principal_eigen_power(ORDERS, mesh)
    lam1 = compute_spectrum(mesh, ORDERS).values[0]
    assert abs(res.value - lam1) <= 1e-2 * abs(lam1)
    assert np.all(res.u.values.real[1:-1] > 0)


def test_power_iterates_stay_positive():
    mesh = Mesh(0.0, 1.0, 100)
    u = GridFunction.from_function(mesh, lambda x: np.sin(np.pi * x))
    for _ in range(10):
        u = apply_inverse(u, ORDERS).u
        assert np.all(u.values.real[1:-1] > 0)


def test_power_convergence_error():
    with pytest.raises(ConvergenceError) as info:
        principal_eigen_power(ORDERS, Mesh(0.0, 1.0, 50), tol=1e-15, max_iter=3)
    assert len(info.value.estimates) == 2
    with pytest.raises(DomainError):
        principal_eigen_power(ORDERS, Mesh(0.0, 1.0, 50), tol=0.0)


def test_hopf_slopes():
    n = [50, 100, 200, 400]
    classical = hopf_slope_probe(np.ones_like, FractionalOrders(1, 1), n)
    np.testing.assert_allclose(classical, [0.5 - 0.5 / k for k in n], rtol=1e-10)
    slopes = hopf_slope_probe(np.ones_like, ORDERS, n)
    assert all(s > 0 for s in slopes)
    assert all(b > a for a, b in zip(slopes, slopes[1:]))
