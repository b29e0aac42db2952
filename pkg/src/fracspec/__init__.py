"""Finite-element spectra of nonsymmetric two-sided fractional operators.

The operator ``ld^alpha rd^beta`` on ``(a, b)`` with homogeneous Dirichlet
conditions is discretized with linear hat functions; the resulting pencil
``K U = lambda M U`` is solved by a dense Hessenberg-QR eigensolver.
"""

from __future__ import annotations

from fracspec.assembly import (
    FractionalOrders,
    load_vector,
    mass_matrix,
    oracle_stiffness,
    stiffness_matrix,
)
from fracspec.directsolver import (
    DirectSolution,
    apply_inverse,
    hopf_slope_probe,
    principal_eigen_power,
)
from fracspec.eigensolver import Spectrum, SpectrumReport, classify, compute_spectrum, solve_gevp
from fracspec.errors import (
    AccuracyError,
    ConvergenceError,
    DomainError,
    FracspecError,
    NotSPDError,
)
from fracspec.fracops import GridFunction, Mesh, RampSum, Side
from fracspec.specialfns import gamma, gauss_jacobi, kernel_primitive

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "ConvergenceError",
    "DirectSolution",
    "DomainError",
    "FracspecError",
    "FractionalOrders",
    "GridFunction",
    "Mesh",
    "NotSPDError",
    "RampSum",
    "Side",
    "Spectrum",
    "SpectrumReport",
    "apply_inverse",
    "classify",
    "compute_spectrum",
    "gamma",
    "gauss_jacobi",
    "hopf_slope_probe",
    "kernel_primitive",
    "load_vector",
    "mass_matrix",
    "oracle_stiffness",
    "principal_eigen_power",
    "solve_gevp",
    "stiffness_matrix",
]
