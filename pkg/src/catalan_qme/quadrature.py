"""Adaptive quadrature over the half line ``[a, inf)``.

The substitution ``t = u^2 / (1 - u)^2`` maps ``[0, 1)`` onto ``[0, inf)``.
It removes the ``sqrt(t)`` endpoint behaviour of the integrands used here
and turns their algebraic decay into a bounded integrand at ``u = 1``.
The refinement itself is scipy's vector-valued Gauss-Kronrod scheme: one
node set serves every component and is refined against the worst one.
"""

import numpy as np
from scipy.integrate import quad_vec

from .errors import IntegrationError


def halfline_quad(f, shift=0.0, tol=1e-10, limit=2000):
    """Integrate ``f(shift + t)`` for ``t`` in ``[0, inf)``.

    `f` may return a scalar or an array; complex values are fine.  Returns
    ``(value, abserr)``.

    Raises
    ------
    IntegrationError
        If the error estimate stays above `tol` after `limit` subintervals.
    """

    def g(u):
        w = 1.0 - u
        t = (u / w) ** 2
        return np.asarray(f(shift + t)) * (2.0 * u / w ** 3)

    value, err, _ = quad_vec(g, 0.0, 1.0, epsabs=tol, epsrel=0.0, norm="max",
                                limit=limit, full_output=True)
    # status 2 (rounding floor reached) is fine as long as the estimate meets tol
    if err > tol:
        raise IntegrationError(f"quadrature error estimate {err:.3e} above target {tol:.1e}")
    return value, err
