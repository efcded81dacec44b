"""Catalan functional calculus on square matrices.

``C(T) = sum C_n T^n`` by power accumulation and by the resolvent integral
``(1/pi) int_{1/4}^inf sqrt(lam - 1/4)/lam (lam - T)^-1 dlam``, the binomial
square root ``sqrt(I - 4T)``, the resolvent formulas for a solution `Y` of
``T Y^2 - Y + I = 0``, and closed-form solutions for three 2x2 families.
"""

import cmath
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla

from .catalan import (catalan_gf, catalan_gf_even, catalan_gf_odd,
                      scaled_ratios, tail_bound)
from .errors import ConvergenceError, DomainError, SpectrumHitError
from .linalg import _lu_factor, _square, eigenvalues, lu_solve, multiset_distance, norm_inf
from .quadrature import halfline_quad

MAX_TERMS = 10 ** 5


@dataclass(frozen=True)
class PowerBoundReport:
    M: float
    N_probe: int
    spectral_radius_est: float

    @property
    def radius_4T(self):
        return 4.0 * self.spectral_radius_est


def spectral_radius(T):
    return float(np.max(np.abs(eigenvalues(T))))


def power_bound_probe(T, N_probe=64):
    """``M = max_{n <= N_probe} ||(4T)^n||_inf`` and the spectral radius of `T`.

    A finite probe cannot prove power-boundedness; a warning is issued when
    the spectral radius of ``4T`` is within ``1e-10`` of 1 or above it.
    """
    T = _square(T, "T")
    if N_probe < 8:
        raise DomainError("N_probe must be >= 8")
    P = np.eye(T.shape[0], dtype=np.complex128)
    M = 1.0
    for _ in range(N_probe):
        P = 4.0 * (P @ T)
        M = max(M, norm_inf(P))
    rho = spectral_radius(T)
    if 4.0 * rho > 1.0 - 1e-10:
        warnings.warn(f"spectral radius of 4T is {4 * rho:.6g}; the Catalan series may not converge",
                      RuntimeWarning, stacklevel=2)
    return PowerBoundReport(M=M, N_probe=N_probe, spectral_radius_est=rho)


def catalan_of_matrix_series(T, tol=1e-15, N_probe=64):
    """``C(T) = sum_n C_n T^n`` accumulated term by term.

    Terms are ``(C_n/4^n) (4T)^n``.  Writing
    ``(4T)^n = (4T)^N (4T)^(n-N)`` bounds the remainder after `N` terms by
    ``M ||(4T)^N|| tail_bound(N)`` with `M` the (probed) power bound, and the
    sum stops once that is below `tol`.

    Raises
    ------
    ConvergenceError
        If ``10^5`` terms do not reach the bound.
    """
    T = _square(T, "T")
    n = T.shape[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        M = power_bound_probe(T, N_probe).M
    P = np.eye(n, dtype=np.complex128)
    S = np.zeros_like(P)
    w = 1.0
    for N in range(MAX_TERMS):
        S += w * P
        P = 4.0 * (P @ T)
        w *= (2.0 * N + 1.0) / (2.0 * N + 4.0)
        normP = norm_inf(P)
        M = max(M, normP)
        if M * normP * tail_bound(N + 1) <= tol:
            return S
    raise ConvergenceError(f"series did not reach tolerance {tol:.1e} within {MAX_TERMS} terms")


def catalan_of_matrix_quadrature(T, tol=1e-12):
    """``C(T)`` from the resolvent integral over ``[1/4, inf)``.

    One adaptive Gauss-Kronrod node set serves all entries.

    Raises
    ------
    DomainError
        If the spectral radius of `T` is not below ``1/4 - 1e-8``.
    """
    T = _square(T, "T")
    n = T.shape[0]
    if spectral_radius(T) >= 0.25 - 1e-8:
        raise DomainError("spectral radius of T too close to 1/4: near-singular integrand")
    I = np.eye(n)

    def integrand(lam):
        t = lam - 0.25
        return np.sqrt(t) / lam * lu_solve(lam * I - T, I)

    value, _ = halfline_quad(integrand, shift=0.25, tol=tol * np.pi)
    return value / np.pi


def sqrt_one_minus_4T(T, tol=1e-15, N_probe=64):
    """``sqrt(I - 4T) = sum_n (-4)^n binom(1/2, n) T^n``.

    The binomial coefficients come from ``binom(a, n+1) = binom(a, n)(a-n)/(n+1)``
    rather than from Catalan numbers, so the identity
    ``T C(T) = I/2 - sqrt(I/4 - T)`` is a genuine cross-check.  The tail
    ``sum_{k>=n} |binom(1/2,k)| 4^k`` is ``1 - sum_{1<=k<n} |binom(1/2,k)| 4^k``.
    """
    T = _square(T, "T")
    d = T.shape[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        M = power_bound_probe(T, N_probe).M
    P = np.eye(d, dtype=np.complex128)
    S = P.copy()
    b = 1.0  # binom(1/2, n) * (-4)^n
    used = 0.0
    for n in range(MAX_TERMS):
        b *= (0.5 - n) / (n + 1) * -1.0
        P = 4.0 * (P @ T)
        S += b * P
        used += abs(b)
        normP = norm_inf(P)
        M = max(M, normP)
        tail = max(1.0 - used, 0.0)
        if M * normP * tail <= tol or tail == 0.0:
            return S
    raise ConvergenceError(f"binomial series did not reach tolerance {tol:.1e}")


def quadratic_residual(T, Y):
    """``||T Y^2 - Y + I||_inf``."""
    T = _square(T, "T")
    Y = _square(Y, "Y")
    return float(norm_inf(T @ Y @ Y - Y + np.eye(Y.shape[0])))


def left_inverse_check(T, Y):
    """``||(I - T Y) Y - I||_inf``; zero when `Y` solves the quadratic."""
    T = _square(T, "T")
    Y = _square(Y, "Y")
    I = np.eye(Y.shape[0])
    return float(norm_inf((I - T @ Y) @ Y - I))


@dataclass(frozen=True)
class InveReport:
    invertible: bool
    t_formula: bool
    commute: bool
    tyy: bool

    @property
    def conditions(self):
        return (self.invertible, self.t_formula, self.commute, self.tyy)

    @property
    def consistent(self):
        return len(set(self.conditions)) == 1

    @property
    def all_true(self):
        return all(self.conditions)


def inve_equivalences(T, Y, tol=1e-9):
    """Evaluate the four equivalent conditions for a solution `Y`.

    (i) `Y` invertible (condition number below ``1/tol``),
    (ii) ``T = Y^-1 - Y^-2``, (iii) ``TY = YT``, (iv) ``T Y^2 = Y T Y``.
    Residuals are compared with `tol` times the natural scale of each
    expression.  In finite dimension all four hold for every solution.
    """
    T = _square(T, "T")
    Y = _square(Y, "Y")
    I = np.eye(Y.shape[0])
    cond = np.linalg.cond(Y, p=np.inf)
    invertible = bool(np.isfinite(cond) and cond < 1.0 / tol)
    nT, nY = norm_inf(T), norm_inf(Y)
    if invertible:
        Yi = lu_solve(Y, I)
        nYi = norm_inf(Yi)
        t_formula = norm_inf(T - (Yi - Yi @ Yi)) <= tol * (1.0 + nT + nYi + nYi ** 2)
    else:
        t_formula = False
    commute = norm_inf(T @ Y - Y @ T) <= tol * (1.0 + 2.0 * nT * nY)
    tyy = norm_inf(T @ Y @ Y - Y @ T @ Y) <= tol * (1.0 + 2.0 * nT * nY * nY)
    return InveReport(invertible, bool(t_formula), bool(commute), bool(tyy))


def _inverse_or_hit(A, what, scale):
    """``A^-1``; a pivot below ``1e-13 * scale`` means the point is on the spectrum."""
    lu, piv = _lu_factor(A, SpectrumHitError)
    if np.abs(np.diag(lu)).min() <= 1e-13 * scale:
        raise SpectrumHitError(f"{what} is singular to working precision")
    return spla.lu_solve((lu, piv), np.eye(A.shape[0]), check_finite=False)


def resolvent_of_Y(lam, T, Y):
    """``(lam - Y)^-1`` expressed through ``R = ((lam-1)/lam^2 - T)^-1``.

    ``1/lam + R/lam^3 + Y/lam^2 - (lam-1)/lam^4 Y R``.  At ``lam = 1`` this
    needs ``T`` itself to be invertible.
    """
    lam = complex(lam)
    if lam == 0:
        raise DomainError("lambda must be non-zero")
    T = _square(T, "T")
    Y = _square(Y, "Y")
    I = np.eye(T.shape[0])
    mu = (lam - 1.0) / lam ** 2
    R = _inverse_or_hit(mu * I - T, "((lam-1)/lam^2) I - T", abs(mu) + norm_inf(T))
    return I / lam + R / lam ** 3 + Y / lam ** 2 - (lam - 1.0) / lam ** 4 * (Y @ R)


def resolvent_of_T_from_Y(lam, Y):
    """``((lam-1)/lam^2 - T)^-1`` from resolvents of `Y`.

    ``lam^4/(lam-1) (lam/(lam-1) - Y)^-1 ((lam - Y)^-1 - (lam + Y)/lam^2)``;
    both ``lam`` and ``lam/(lam-1)`` must be in the resolvent set of `Y`.
    """
    lam = complex(lam)
    if lam == 0 or lam == 1:
        raise DomainError("lambda must avoid 0 and 1")
    Y = _square(Y, "Y")
    I = np.eye(Y.shape[0])
    nY = norm_inf(Y)
    A = _inverse_or_hit(lam / (lam - 1.0) * I - Y, "lam/(lam-1) I - Y", abs(lam / (lam - 1.0)) + nY)
    B = _inverse_or_hit(lam * I - Y, "lam I - Y", abs(lam) + nY)
    return lam ** 4 / (lam - 1.0) * (A @ (B - (lam * I + Y) / lam ** 2))


def multiply_back_residual(A, X):
    """``||A X - I||_inf``."""
    return float(norm_inf(A @ X - np.eye(A.shape[0])))


def spectral_map_check(T, tol=1e-8, max_cond=1e6):
    """Compare the spectrum of ``C(T)`` with ``C`` applied to the spectrum of `T`.

    Returns ``None`` when `T` is not safely diagonalizable (eigenvector
    condition number above `max_cond`), otherwise whether the multisets
    agree within `tol`.
    """
    T = _square(T, "T")
    if 4.0 * spectral_radius(T) > 1.0 + 1e-12:
        raise DomainError("spectral radius of 4T exceeds 1")
    _, V = np.linalg.eig(T)
    if not np.isfinite(np.linalg.cond(V)) or np.linalg.cond(V) > max_cond:
        return None
    mapped = [catalan_gf(mu) for mu in eigenvalues(T)]
    return bool(multiset_distance(eigenvalues(catalan_of_matrix_series(T)), mapped) <= tol)


# Closed-form 2x2 solutions

def scalar_family_solution(lam, b, c, upper_sign=-1):
    """Solution of ``T Y^2 - Y + I = 0`` for ``T = lam I_2`` with off-diagonal ``b, c``.

    Diagonal ``(1 +/- s)/(2 lam)`` and ``(1 -/+ s)/(2 lam)`` with
    ``s = sqrt(1 - 4 lam (1 + lam b c))``; `upper_sign` picks the sign in
    the (0, 0) entry.  For ``b = c = 0`` all four sign pairs are solutions.
    """
    lam = complex(lam)
    if lam == 0:
        raise DomainError("lambda must be non-zero")
    s = cmath.sqrt(1.0 - 4.0 * lam * (1.0 + lam * b * c))
    return np.array([[(1.0 + upper_sign * s) / (2 * lam), b],
                     [c, (1.0 - upper_sign * s) / (2 * lam)]], dtype=np.complex128)


def swap_family_roots(lam):
    """The four roots ``a`` of ``4 lam^2 a^4 - a^2 + 1 = 0``."""
    lam = complex(lam)
    d = cmath.sqrt(1.0 - 16.0 * lam * lam)
    out = []
    for sq in ((1.0 + d) / (8.0 * lam * lam), (1.0 - d) / (8.0 * lam * lam)):
        r = cmath.sqrt(sq)
        out += [r, -r]
    return out


def swap_family_solution(lam, a):
    """``Y = [[a, (a-1)/(2 lam a)], [(a-1)/(2 lam a), a]]`` for ``T = lam [[0,1],[1,0]]``."""
    lam = complex(lam)
    off = (a - 1.0) / (2.0 * lam * a)
    return np.array([[a, off], [off, a]], dtype=np.complex128)


def nilpotent_family_solution(lam):
    """The only solution ``I + T`` for ``T = [[0, lam], [0, 0]]``."""
    return np.array([[1.0, lam], [0.0, 1.0]], dtype=np.complex128)


def catalan_2x2_closed_form(kind, lam):
    """``C(T)`` for ``kind`` in ``{"scalar", "swap", "nilpotent"}``, ``|lam| <= 1/4``."""
    if kind == "scalar":
        return catalan_gf(lam) * np.eye(2, dtype=np.complex128)
    if kind == "swap":
        e, o = catalan_gf_even(lam), catalan_gf_odd(lam)
        return np.array([[e, o], [o, e]], dtype=np.complex128)
    if kind == "nilpotent":
        return nilpotent_family_solution(lam)
    raise ValueError(f"unknown family {kind!r}")


def family_matrix(kind, lam):
    if kind == "scalar":
        return lam * np.eye(2, dtype=np.complex128)
    if kind == "swap":
        return lam * np.array([[0, 1], [1, 0]], dtype=np.complex128)
    if kind == "nilpotent":
        return np.array([[0, lam], [0, 0]], dtype=np.complex128)
    raise ValueError(f"unknown family {kind!r}")
