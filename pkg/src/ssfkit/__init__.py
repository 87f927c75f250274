"""Finite-interval Schrodinger operators with coupled boundary conditions.

Builds the operators, evaluates the Krein resolvent identity and its
coefficient matrix, computes spectra and spectral shift functions on the
interval and on the line, and provides trace-ideal diagnostics plus a
config-driven CLI (``ssfkit``) for the convergence experiments.
"""

from ._backend import backend_name
from .model import (
    BoundaryData,
    CouplingConstants,
    Potential,
    bc_constants,
    factorize,
    gaussian,
    negative_part_mass,
    piecewise_constant,
    poschl_teller,
    square_well,
    zero_potential,
)

__all__ = [
    "BoundaryData",
    "CouplingConstants",
    "Potential",
    "backend_name",
    "bc_constants",
    "factorize",
    "gaussian",
    "negative_part_mass",
    "piecewise_constant",
    "poschl_teller",
    "square_well",
    "zero_potential",
]

__version__ = "0.1.0"
