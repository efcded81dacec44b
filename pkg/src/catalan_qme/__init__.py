"""Catalan generating functions of matrices and solvers for ``T Y^2 - Y + I = 0``."""

__version__ = "0.1.0"

from .catalan import catalan_gf, catalan_numbers
from .opcalc import catalan_of_matrix_quadrature, catalan_of_matrix_series, sqrt_one_minus_4T
from .qme import SolverConfig, qbd_example, solve_qme

__all__ = [
    "catalan_gf", "catalan_numbers", "catalan_of_matrix_quadrature",
    "catalan_of_matrix_series", "sqrt_one_minus_4T", "SolverConfig",
    "qbd_example", "solve_qme",
]
