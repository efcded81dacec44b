"""The weighted convolution algebra ``l1(N0, 4^-n)``.

A :class:`WeightedSeq` is a finite coefficient vector together with an
upper bound ``trunc_err`` on the weighted norm of everything that was cut
off.  Sums and convolutions propagate that bound, so every comparison can
be made against "analytic tolerance + accumulated truncation error".
Coefficient ``n`` of a convolution depends only on input coefficients with
index ``<= n``, which means the leading coefficients of a product of
truncated sequences are exact.
"""

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .catalan import catalan_gf, catalan_numbers, catalan_scaled, tail_bound
from .errors import DomainError

DEFAULT_LENGTH = 256
# C_n is a finite double only up to n = 517
MAX_CATALAN_LENGTH = 512


class NotInAlgebraError(DomainError):
    pass


class OutsideOmegaError(DomainError):
    pass


def _weights(L):
    return np.ldexp(1.0, -2 * np.arange(L))


@dataclass(frozen=True)
class WeightedSeq:
    """Truncated element of ``l1(N0, 4^-n)``."""

    coeffs: np.ndarray
    trunc_err: float = 0.0

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=np.complex128))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-D sequence")
        if self.trunc_err < 0:
            raise ValueError("trunc_err must be non-negative")
        object.__setattr__(self, "coeffs", c)

    @property
    def L(self):
        return self.coeffs.size

    @property
    def exact(self):
        return self.trunc_err == 0.0

    def padded(self, L):
        if L <= self.L:
            return self.coeffs[:L]
        return np.concatenate((self.coeffs, np.zeros(L - self.L, dtype=np.complex128)))

    def __add__(self, other):
        if not isinstance(other, WeightedSeq):
            return NotImplemented
        L = max(self.L, other.L)
        return WeightedSeq(self.padded(L) + other.padded(L), self.trunc_err + other.trunc_err)

    def __neg__(self):
        return WeightedSeq(-self.coeffs, self.trunc_err)

    def __sub__(self, other):
        if not isinstance(other, WeightedSeq):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, WeightedSeq):
            return NotImplemented
        scalar = complex(scalar)
        return WeightedSeq(scalar * self.coeffs, abs(scalar) * self.trunc_err)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / complex(scalar))

    def truncate(self, L):
        """Keep ``L`` coefficients; the dropped weighted mass moves into ``trunc_err``."""
        if L >= self.L:
            return self
        dropped = float(np.sum(np.abs(self.coeffs[L:]) * _weights(self.L)[L:]))
        return WeightedSeq(self.coeffs[:L], self.trunc_err + dropped)


def delta(j, L=None):
    """Kronecker sequence ``delta_j`` (exact)."""
    L = j + 1 if L is None else L
    if not 0 <= j < L:
        raise ValueError("need 0 <= j < L")
    c = np.zeros(L, dtype=np.complex128)
    c[j] = 1.0
    return WeightedSeq(c)


def norm_w(a):
    """Weighted norm of the stored coefficients, ``sum |a_n| 4^-n``.

    The norm of the full sequence lies within ``a.trunc_err`` of this value.
    """
    return float(np.sum(np.abs(a.coeffs) * _weights(a.L)))


def convolve(a, b, length=None):
    """Convolution product.

    The result keeps ``length`` coefficients, by default the shortest length
    among inexact operands (the full product when both are exact).
    The error bound is
    ``|a| b.err + |b| a.err + a.err b.err`` plus the weighted mass cut off.
    """
    full = np.convolve(a.coeffs, b.coeffs)
    err = norm_w(a) * b.trunc_err + norm_w(b) * a.trunc_err + a.trunc_err * b.trunc_err
    out = WeightedSeq(full, err)
    if length is None:
        inexact = [s.L for s in (a, b) if not s.exact]
        length = min(inexact) if inexact else out.L
    return out.truncate(length)


def z_transform(a, z):
    """``sum a_n z^n`` for ``|z| <= 1/4`` (Horner)."""
    z = complex(z)
    if abs(z) > 0.25 * (1 + 1e-15):
        raise DomainError(f"|z| = {abs(z)!r} exceeds 1/4")
    acc = 0j
    for c in a.coeffs[::-1]:
        acc = acc * z + c
    return acc


def catalan_seq(L=DEFAULT_LENGTH):
    """The Catalan sequence ``c`` truncated to ``L`` terms."""
    if not 1 <= L <= MAX_CATALAN_LENGTH:
        raise DomainError(f"L must be in [1, {MAX_CATALAN_LENGTH}]")
    cat = catalan_numbers(L).exact
    return WeightedSeq(np.array([float(c) for c in cat], dtype=np.complex128), tail_bound(L))


def geometric_seq(lam, L=DEFAULT_LENGTH):
    """``p_lam = (lam^-n)_n``; it lies in the algebra iff ``|lam| > 1/4``."""
    lam = complex(lam)
    if abs(lam) <= 0.25:
        raise NotInAlgebraError(f"|lambda| = {abs(lam)!r} <= 1/4")
    r = 1.0 / (4.0 * abs(lam))
    # (1/lam)^n: numpy's complex power overflows internally for lam^-n with large |lam|
    with np.errstate(under="ignore"):
        coeffs = (1.0 / lam) ** np.arange(L, dtype=float)
    return WeightedSeq(coeffs, r ** L / (1.0 - r))


def in_omega(lam):
    """Membership in ``Omega = {|lam - 1| / |lam|^2 > 1/4}``."""
    lam = complex(lam)
    if lam == 0:
        raise DomainError("lambda = 0 is excluded")
    return abs(lam - 1.0) > 0.25 * abs(lam) ** 2


def resolvent_catalan(lam, L=DEFAULT_LENGTH):
    """``(lam delta_0 - c)^-1`` for ``lam`` in ``Omega``.

    ``delta_0/lam + p_mu/(lam(lam-1)) + c/lam^2 - (c * p_mu)/lam^2`` with
    ``mu = (lam-1)/lam^2``; ``|mu| > 1/4`` is exactly the ``Omega`` condition.
    ``Omega`` excludes a neighbourhood of 1 (and ``1 = C(0)`` is in the
    spectrum), so no limit at ``lam = 1`` is needed.
    """
    lam = complex(lam)
    if lam == 0 or not in_omega(lam):
        raise OutsideOmegaError(f"lambda = {lam} is not in Omega")
    mu = (lam - 1.0) / lam ** 2
    c = catalan_seq(L)
    p = geometric_seq(mu, L)
    return (delta(0, L) / lam + p / (lam * (lam - 1.0)) + c / lam ** 2
            - convolve(c, p, L) / lam ** 2)


def catalan_inverse(L=DEFAULT_LENGTH):
    """``c^-1 = delta_0 - delta_1 * c``."""
    return delta(0) - convolve(delta(1), catalan_seq(L), L)


def sigma_boundary(theta):
    """Point of the boundary of ``sigma(c) = C(closed disc of radius 1/4)``.

    ``2 e^{-i theta} (1 - sqrt(2|sin(theta/2)|) e^{i(theta - pi sgn(theta))/4})``,
    which is ``C(e^{i theta}/4)`` written in polar form; ``theta`` in
    ``[-pi, pi]``.
    """
    theta = float(theta)
    if abs(theta) > math.pi:
        raise DomainError("theta must lie in [-pi, pi]")
    sgn = math.copysign(1.0, theta) if theta != 0 else 0.0
    root = math.sqrt(2.0 * abs(math.sin(0.5 * theta))) * cmath.exp(0.25j * (theta - math.pi * sgn))
    return 2.0 * cmath.exp(-1j * theta) * (1.0 - root)


def sigma_boundary_angles(M):
    """`M` angles in ``[-pi, pi)``, denser near 0 where the curve has a square-root cusp.

    ``theta = pi s |s|`` for ``s`` uniform on ``[-1, 1)``; 0 is included for even M.
    """
    s = -1.0 + 2.0 * np.arange(M) / M
    return math.pi * s * np.abs(s)


def _omega_level(r, phi):
    # |r e^{i phi} - 1|^2 - r^4/16, positive inside Omega
    return r * r - 2.0 * r * math.cos(phi) + 1.0 - r ** 4 / 16.0


def omega_boundary_point(phi):
    """Outer point of ``{|lam-1| = |lam|^2/4}`` on the ray of angle `phi`.

    On the ray ``lam = r e^{i phi}`` the level set is the quartic
    ``r^4 - 16 r^2 + 32 r cos(phi) - 16 = 0``.  Its largest real root is
    bracketed from the companion-matrix roots and refined by bisection; at
    ``phi = 0`` it is the double root ``r = 2`` where the outer component
    touches the boundary of ``sigma(c)`` (the inner component).
    """
    roots = np.roots([1.0, 0.0, -16.0, 32.0 * math.cos(phi), -16.0])
    real = roots[np.abs(roots.imag) <= 1e-6 * np.abs(roots)].real
    r = float(real.max()) if real.size else float(np.abs(roots).max())
    lo, hi = r * (1 - 1e-9), r * (1 + 1e-9)
    if _omega_level(lo, phi) > 0 >= _omega_level(hi, phi):
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if _omega_level(mid, phi) > 0:
                lo = mid
            else:
                hi = mid
        r = 0.5 * (lo + hi)
    return r * cmath.exp(1j * phi)


def omega_boundary_angles(M, angle_weight=0.2):
    """`M` ray angles spaced evenly in ``|dr| + angle_weight |dphi|``.

    The radius varies fastest near ``phi = 0``; spacing by this pseudo arc
    length keeps successive moduli within about ``7/M`` of each other.
    """
    fine = -math.pi + 2.0 * math.pi * np.arange(16 * M + 1) / (16 * M)
    r = np.array([abs(omega_boundary_point(phi)) for phi in fine])
    arc = np.concatenate(([0.0], np.cumsum(np.abs(np.diff(r)) + angle_weight * np.diff(fine))))
    targets = arc[-1] * np.arange(M) / M
    return np.interp(targets, arc, fine)


def omega_boundary_samples(M):
    """``(phi, lam)`` pairs on the outer boundary of ``Omega`` for `M` angles."""
    return [(float(phi), omega_boundary_point(phi)) for phi in omega_boundary_angles(M)]


def sigma_boundary_samples(M):
    return [(float(t), sigma_boundary(t)) for t in sigma_boundary_angles(M)]


def boundary_rows(M, curves=("sigma", "omega")):
    """Rows ``(theta, re, im, curve)`` of the boundary CSV."""
    rows = []
    for name in curves:
        if name == "sigma":
            pts, label = sigma_boundary_samples(M), "sigma_c"
        elif name == "omega":
            pts, label = omega_boundary_samples(M), "omega"
        else:
            raise ValueError(f"unknown curve {name!r}")
        rows += [(t, lam.real, lam.imag, label) for t, lam in pts]
    return rows


class BackwardDifferenceCatalan(NamedTuple):
    closed_form: np.ndarray
    direct_series: np.ndarray
    max_discrepancy: float


def _tail_c12(j, terms=80):
    # sum_{k>=j} C_k 12^-k = sum s_k 3^-k; the remainder after `terms` is < 3^-terms
    s = catalan_scaled(j)
    total = 0.0
    for k in range(j, j + terms):
        total += s * 3.0 ** -k
        s *= (2.0 * k + 1.0) / (2.0 * k + 4.0)
    return total


def backward_difference_catalan(J):
    """First `J` coefficients of ``C(a/8)`` for the backward difference ``a = delta_1 - delta_0``.

    Two independent routes: the closed form
    ``coef_j = (sqrt(6)/3) sum_{k>=j} C_k / 12^k`` (``coef_0 = 2 sqrt(6) - 4``),
    and the series ``sum_n C_n (a/8)^{*n}`` evaluated in the algebra with
    coefficients truncated to length `J` (which keeps them exact).
    """
    if J < 1:
        raise DomainError("J must be >= 1")
    closed = np.array([math.sqrt(6.0) / 3.0 * _tail_c12(j) for j in range(J)])
    closed[0] = 2.0 * math.sqrt(6.0) - 4.0

    x = WeightedSeq(np.array([-1.0, 1.0])[:J] / 8.0 if J > 1 else np.array([-1.0 / 8.0]))
    power = delta(0, J)
    acc = np.zeros(J, dtype=np.complex128)
    # ||(a/8)^n||_l1(Z) <= 4^-n, so the term bound C_n 4^-n ... decays like
    # binom(n, j) C_n 8^-n; stop once it is negligible for every j < J
    n = 0
    c = 1
    while True:
        acc += c * power.padded(J)
        bound = c * 8.0 ** -n * math.comb(n, J - 1) if n >= J - 1 else 1.0
        if n > 4 * J and bound < 1e-18:
            break
        power = convolve(power, x, J)
        c = c * 2 * (2 * n + 1) // (n + 2)
        n += 1
    direct = acc.real
    return BackwardDifferenceCatalan(closed, direct, float(np.max(np.abs(closed - direct))))


def prefix_residual(a, b, target):
    """Weighted norm of ``(a * b - target)`` over the first ``min(a.L, b.L)`` terms.

    Coefficients below the shorter length only involve stored coefficients,
    so truncation does not enter and the result measures rounding alone.
    """
    L = min(a.L, b.L)
    prod = np.convolve(a.coeffs[:L], b.coeffs[:L])[:L]
    return float(np.sum(np.abs(prod - target.padded(L)) * _weights(L)))
