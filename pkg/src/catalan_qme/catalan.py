"""Scalar Catalan machinery.

Coefficients, the generating function ``C(z) = sum C_n z^n`` with its even
and odd parts, the biquadratic-mean identity, and the integral identities
relating ``int_0^inf sqrt(t) / ((t+1)(t+z)^(j+1)) dt`` to Taylor tails of
``C``.  These are the scalar oracles the operator-level modules are tested
against.

Large Catalan numbers are kept in the scaled form ``C_n / 4^n`` (the
"mantissa" paired with the implicit exponent ``n`` of 4), which stays in
``[n^-1.5 / 4, 1]`` while ``C_n`` itself overflows a double near ``n = 518``.
"""

import cmath
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import mpmath
import numpy as np

from .errors import DomainError
from .quadrature import halfline_quad

MAX_N = 10 ** 5
TAYLOR_RADIUS = 1e-8
# C_0..C_8, used for the Taylor guard at the origin
_TAYLOR = (1, 1, 2, 5, 14, 42, 132, 429, 1430)
_QUARTER = 0.25 * (1.0 + 8 * np.finfo(float).eps)


def scaled_ratios(n):
    """``(C_{k+1}/4^{k+1}) / (C_k/4^k) = (2k+1)/(2k+4)`` for ``k < n``."""
    k = np.arange(n, dtype=float)
    return (2.0 * k + 1.0) / (2.0 * k + 4.0)


def catalan_scaled(n):
    """``C_n / 4^n`` for a single index, accurate for large `n`."""
    if n < 0:
        raise DomainError("index must be non-negative")
    # Gamma(n + 1/2) / (sqrt(pi) Gamma(n + 2)); double-precision beta drifts
    # to ~1e-10 relative error near n = 1e5, so evaluate with extra digits
    with mpmath.workdps(30):
        return float(mpmath.gammaprod([n + 0.5], [n + 2]) / mpmath.sqrt(mpmath.pi))


def tail_bound(N):
    """Upper bound on ``sum_{n >= N} C_n 4^-n``.

    The bound is attained: partial sums satisfy
    ``sum_{n<N} C_n 4^-n = 2 - 2 binom(2N, N) 4^-N`` and
    ``binom(2N, N) = (N+1) C_N``.  A relative margin of ``1e-12`` absorbs
    rounding.
    """
    if N < 0:
        raise DomainError("N must be non-negative")
    if N == 0:
        return 2.0
    return 2.0 * (N + 1) * catalan_scaled(N) * (1.0 + 1e-12)


@dataclass(frozen=True)
class CatalanCoefficients:
    """``C_0 .. C_{N-1}`` as scaled doubles, with exact integers on demand."""

    N: int
    scaled: np.ndarray

    @cached_property
    def exact(self):
        values = [1]
        c = 1
        for n in range(self.N - 1):
            c = c * 2 * (2 * n + 1) // (n + 2)
            values.append(c)
        for n in range(min(self.N, 64)):
            assert values[n] == math.comb(2 * n, n) // (n + 1)
        return tuple(values)

    def float_pair(self, n):
        """``(mantissa, exponent)`` with ``C_n = mantissa * 4**exponent``."""
        return float(self.scaled[n]), n

    def as_float(self, n):
        """``C_n`` as a double; ``inf`` once it overflows (``n >= 518``)."""
        try:
            return math.ldexp(float(self.scaled[n]), 2 * n)
        except OverflowError:
            return math.inf

    def tail_bound(self, N=None):
        return tail_bound(self.N if N is None else N)


def catalan_numbers(N):
    """First `N` Catalan numbers.

    The exact integers follow ``C_{n+1} = 2(2n+1) C_n / (n+2)``, which is
    equivalent to the convolution recursion and linear rather than
    quadratic in `N`; the closed form ``binom(2n, n)/(n+1)`` is asserted
    for ``n < 64``.
    """
    if not 1 <= N <= MAX_N:
        raise DomainError(f"N must be in [1, {MAX_N}], got {N}")
    scaled = np.concatenate(([1.0], np.cumprod(scaled_ratios(N - 1))))
    return CatalanCoefficients(N=N, scaled=scaled)


def _check_disc(z):
    if abs(z) > _QUARTER:
        raise DomainError(f"|z| = {abs(z)!r} exceeds 1/4")


def _taylor(z, coeffs):
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def catalan_gf(z):
    """``C(z) = (1 - sqrt(1 - 4z)) / (2z)`` on the closed disc ``|z| <= 1/4``.

    Evaluated as ``2 / (1 + sqrt(1 - 4z))`` to avoid the cancellation in the
    numerator; principal square root.
    """
    z = complex(z)
    _check_disc(z)
    if abs(z) < TAYLOR_RADIUS:
        return _taylor(z, _TAYLOR)
    return 2.0 / (1.0 + cmath.sqrt(1.0 - 4.0 * z))


def catalan_gf_second_root(z):
    """The other root ``1 / (z C(z)) = (1 + sqrt(1-4z)) / (2z)`` of ``z y^2 - y + 1 = 0``."""
    z = complex(z)
    if z == 0:
        raise DomainError("second root is undefined at z = 0")
    return (1.0 + cmath.sqrt(1.0 - 4.0 * z)) / (2.0 * z)


def catalan_gf_even(z):
    """``sum C_{2n} z^{2n} = (sqrt(1+4z) - sqrt(1-4z)) / (4z)``."""
    z = complex(z)
    _check_disc(z)
    if abs(z) < TAYLOR_RADIUS:
        return _taylor(z, [c if i % 2 == 0 else 0 for i, c in enumerate(_TAYLOR)])
    return 2.0 / (cmath.sqrt(1.0 + 4.0 * z) + cmath.sqrt(1.0 - 4.0 * z))


def catalan_gf_odd(z):
    """``sum C_{2n+1} z^{2n+1} = (2 - sqrt(1+4z) - sqrt(1-4z)) / (4z)``."""
    z = complex(z)
    _check_disc(z)
    if abs(z) < TAYLOR_RADIUS:
        return _taylor(z, [c if i % 2 == 1 else 0 for i, c in enumerate(_TAYLOR)])
    a = cmath.sqrt(1.0 + 4.0 * z)
    b = cmath.sqrt(1.0 - 4.0 * z)
    # 2 - a - b rewritten without cancellation
    return 8.0 * z / ((a + b) * (1.0 + a) * (1.0 + b))


def biquadratic_mean_residual(x):
    """``|4x^2 w^4 - w^2 + 1|`` for ``w = (y + z)/2``.

    `y` solves ``x y^2 - y + 1 = 0`` (the Catalan root) and `z` solves
    ``-x z^2 - z + 1 = 0``, i.e. ``z = (-1 + sqrt(1+4x)) / (2x) = C(-x)``.
    """
    x = complex(x)
    _check_disc(x)
    if x == 0:
        raise DomainError("x must be non-zero")
    y = catalan_gf(x)
    z = catalan_gf(-x)
    w = 0.5 * (y + z)
    return abs(4.0 * x * x * w ** 4 - w * w + 1.0)


def biquadratic_mean_check(x, tol):
    return biquadratic_mean_residual(x) <= tol


class IntegralIdentity(NamedTuple):
    lhs: complex
    rhs: complex
    abserr: float


def _check_slit(z):
    if z.imag == 0.0 and z.real <= 0.0:
        raise DomainError("z must not lie on (-inf, 0]")


def integral_closed_form(z, j):
    """Closed form of ``int_0^inf sqrt(t) / ((t+1)(t+z)^(j+1)) dt``.

    Near ``z = 1`` the Taylor-tail form
    ``pi / (2 sqrt(z) (z-1)^j) * sum_{k>=j} C_k ((z-1)/(4z))^k`` is used
    instead of the difference formula, which cancels catastrophically there;
    at ``z = 1`` it reduces to ``pi C_j / 2^(2j+1)``.
    """
    z = complex(z)
    _check_slit(z)
    sz = cmath.sqrt(z)
    if j == 0:
        return math.pi / (sz + 1.0)
    if abs(z - 1.0) <= 0.25:
        rho = (z - 1.0) / z
        total, term_scale, k = 0j, 1.0, j
        s = catalan_scaled(j)
        while True:
            term = s * term_scale
            total += term
            if abs(term) < 1e-18 * max(abs(total), 1e-300) or k > j + 2000:
                break
            s *= (2.0 * k + 1.0) / (2.0 * k + 4.0)
            term_scale *= rho
            k += 1
        return math.pi / (2.0 * sz) * total / z ** j
    w = (z - 1.0) / (4.0 * z)
    cat = catalan_numbers(j).exact
    partial = sum(c * w ** k for k, c in enumerate(cat))
    return math.pi / (z - 1.0) ** (j + 1) * (sz - 1.0 - (z - 1.0) / (2.0 * sz) * partial)


def integral_identity(z, j, tol=1e-10):
    """Quadrature and closed form of ``int_0^inf sqrt(t)/((t+1)(t+z)^(j+1)) dt``."""
    z = complex(z)
    _check_slit(z)
    if not 0 <= j <= 40:
        raise DomainError("j must be in [0, 40]")

    def f(t):
        return cmath.sqrt(t) / ((t + 1.0) * (t + z) ** (j + 1))

    lhs, err = halfline_quad(lambda t: np.array([f(t)]), tol=tol)
    return IntegralIdentity(lhs=complex(lhs[0]), rhs=integral_closed_form(z, j), abserr=float(err))


class TailSum(NamedTuple):
    value: complex
    err: float


def catalan_tail_series(z, j, N):
    """``sum_{k=j}^{N} C_k w^k`` with ``w = (z-1)/(4z)`` and a bound on the rest.

    The discarded part is at most ``|4w|^(N+1) * tail_bound(N+1)``.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("z must be non-zero")
    if N < j:
        raise DomainError("N must be >= j")
    w = (z - 1.0) / (4.0 * z)
    _check_disc(w)
    q = 4.0 * w
    s = catalan_numbers(N + 1).scaled
    powers = q ** np.arange(j, N + 1)
    value = complex(np.sum(s[j:] * powers))
    err = abs(q) ** (N + 1) * tail_bound(N + 1)
    return TailSum(value=value, err=err)


def partial_sum_scaled(N, step=1, offset=0):
    """``sum C_n 4^-n`` over ``n = offset, offset+step, ... < step*N + offset``.

    ``step=2, offset=0`` gives the even-index sum truncated after `N` terms.
    """
    s = catalan_numbers(step * N + offset).scaled
    return float(np.sum(s[offset::step][:N]))


def richardson(values, exponents, ratio=2.0):
    """Richardson extrapolation of ``values[i] = L + sum_k a_k h_i^{p_k}``.

    `values` are taken at ``N_i = N_0 ratio^i``; ``h = 1/N`` so each level
    eliminates ``N^-p`` for the next exponent in `exponents`.
    """
    row = list(values)
    for p in exponents:
        if len(row) < 2:
            break
        f = ratio ** p
        row = [(f * row[i + 1] - row[i]) / (f - 1.0) for i in range(len(row) - 1)]
    return row[-1]


def catalan_moment(n, tol=1e-12):
    """``C_n`` as the moment ``(1/pi) int_{1/4}^inf sqrt(lam - 1/4) lam^-(n+2) dlam``.

    The integrand is scaled by ``4^-n`` so `tol` applies to ``C_n / 4^n``;
    returns ``(C_n, abserr)`` with the error scaled back.
    """
    if not 0 <= n <= 60:
        raise DomainError("n must be in [0, 60]")

    def f(lam):
        return np.array([math.sqrt(lam - 0.25) / (lam * lam) * (0.25 / lam) ** n])

    value, err = halfline_quad(f, shift=0.25, tol=tol)
    return float(value[0]) / math.pi * 4.0 ** n, float(err) / math.pi * 4.0 ** n
