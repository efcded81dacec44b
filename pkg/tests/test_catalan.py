import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catalan_qme import catalan as cat
from catalan_qme.errors import DomainError, IntegrationError
from catalan_qme.suites import richardson_limit


def convolution_catalan(N):
    c = [1]
    for n in range(N - 1):
        c.append(sum(c[i] * c[n - i] for i in range(n + 1)))
    return c


disc = st.builds(lambda r, t: 0.25 * math.sqrt(r) * cmath.exp(1j * t),
                 st.floats(0, 1), st.floats(-math.pi, math.pi))


def test_first_catalan_numbers():
    assert cat.catalan_numbers(10).exact == (1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862)


def test_exact_matches_convolution_recursion():
    assert cat.catalan_numbers(120).exact == tuple(convolution_catalan(120))


def test_scaled_matches_exact():
    C = cat.catalan_numbers(600)
    for n in (0, 1, 10, 100, 517, 599):
        m, e = C.float_pair(n)
        assert e == n
        assert abs(m - C.exact[n] / 4 ** n) <= 1e-13 * m
        assert abs(cat.catalan_scaled(n) - m) <= 1e-13 * m
    assert math.isinf(C.as_float(599)) or C.as_float(599) > 1e300


def test_catalan_numbers_limits():
    with pytest.raises(DomainError):
        cat.catalan_numbers(0)
    with pytest.raises(DomainError):
        cat.catalan_numbers(10 ** 5 + 1)
    C = cat.catalan_numbers(10 ** 5)
    assert C.scaled[-1] > 0


@pytest.mark.parametrize("N", [1, 2, 5, 50, 256, 1000])
def test_tail_bound_is_the_tail(N):
    # partial sums with exact rationals
    exact = sum(mpmath.mpf(c) / mpmath.mpf(4) ** n for n, c in enumerate(cat.catalan_numbers(N).exact))
    tail = 2 - exact
    assert tail <= cat.tail_bound(N) <= tail * (1 + 1e-11)


def test_tail_bound_zero():
    assert cat.tail_bound(0) == 2.0
    with pytest.raises(DomainError):
        cat.tail_bound(-1)


@given(disc)
def test_gf_solves_quadratic(z):
    y = cat.catalan_gf(z)
    assert abs(z * y * y - y + 1) <= 1e-14 * max(1, abs(y)) ** 2


@given(disc)
@settings(max_examples=50)
def test_gf_against_mpmath(z):
    with mpmath.workdps(40):
        zm = mpmath.mpc(z)
        ref = 2 / (1 + mpmath.sqrt(1 - 4 * zm)) if zm != 0 else 1
        assert abs(cat.catalan_gf(z) - complex(ref)) <= 1e-14


def test_gf_special_values():
    assert cat.catalan_gf(0) == 1
    assert cat.catalan_gf(0.25) == 2
    assert abs(cat.catalan_gf(0.1) - (1 - math.sqrt(0.6)) / 0.2) <= 1e-15
    assert abs(cat.catalan_gf(1e-10) - (1 + 1e-10)) <= 1e-16
    assert abs(cat.catalan_gf(1e-9j) - (1 + 1e-9j - 2e-18)) <= 1e-20
    with pytest.raises(DomainError):
        cat.catalan_gf(0.3)


def test_second_root():
    z = 0.1 + 0.05j
    y = cat.catalan_gf_second_root(z)
    assert abs(z * y * y - y + 1) <= 1e-13
    assert abs(y * z * cat.catalan_gf(z) - 1) <= 1e-14
    with pytest.raises(DomainError):
        cat.catalan_gf_second_root(0)


@given(disc)
def test_even_odd_parts(z):
    e, o = cat.catalan_gf_even(z), cat.catalan_gf_odd(z)
    assert abs(e + o - cat.catalan_gf(z)) <= 1e-14
    assert abs(e - cat.catalan_gf_even(-z)) <= 1e-14
    assert abs(o + cat.catalan_gf_odd(-z)) <= 1e-14


def test_even_odd_series():
    z = 0.2 - 0.1j
    cs = cat.catalan_numbers(200).exact
    even = sum(c * z ** n for n, c in enumerate(cs) if n % 2 == 0)
    odd = sum(c * z ** n for n, c in enumerate(cs) if n % 2 == 1)
    assert abs(cat.catalan_gf_even(z) - even) <= 1e-13
    assert abs(cat.catalan_gf_odd(z) - odd) <= 1e-13


@given(disc.filter(lambda z: abs(z) > 1e-6))
def test_biquadratic_mean(x):
    assert cat.biquadratic_mean_check(x, 1e-12)


def test_biquadratic_mean_rejects_zero():
    with pytest.raises(DomainError):
        cat.biquadratic_mean_residual(0)


@pytest.mark.parametrize("z", [1, 1.5, 2 + 1j, 0.3, 1 + 0.1j, 10j])
@pytest.mark.parametrize("j", [0, 1, 2, 5])
def test_integral_identity(z, j):
    r = cat.integral_identity(z, j)
    assert abs(r.lhs - r.rhs) <= 1e-8
    assert r.abserr <= 1e-10


def test_integral_at_one_is_catalan():
    for j in range(6):
        expected = math.pi * cat.catalan_numbers(j + 1).exact[j] / 2 ** (2 * j + 1)
        assert abs(cat.integral_closed_form(1, j) - expected) <= 1e-14


def test_integral_identity_domain():
    with pytest.raises(DomainError):
        cat.integral_identity(-1, 1)
    with pytest.raises(DomainError):
        cat.integral_identity(2, 41)


def test_moments():
    for n in range(8):
        value, err = cat.catalan_moment(n)
        assert abs(value - cat.catalan_numbers(n + 1).exact[n]) <= 1e-8
        assert err <= 1e-12 * 4 ** n


@pytest.mark.parametrize("z", [1.2, 0.9 + 0.2j, 2.0])
def test_tail_series(z):
    w = (z - 1) / (4 * z)
    head = sum(c * w ** k for k, c in enumerate(cat.catalan_numbers(3).exact))
    t = cat.catalan_tail_series(z, 3, 60)
    assert abs(head + t.value - cat.catalan_gf(w)) <= t.err + 1e-14


def test_tail_series_domain():
    with pytest.raises(DomainError):
        cat.catalan_tail_series(0.1, 0, 10)
    with pytest.raises(DomainError):
        cat.catalan_tail_series(2, 5, 3)


def test_partial_sums_converge_slowly():
    s = cat.partial_sum_scaled(256)
    assert abs(2 - s - cat.tail_bound(256)) <= 1e-12
    assert 0.07 < 2 - s < 0.071


def test_richardson_limits():
    assert abs(richardson_limit() - 2) <= 1e-10
    assert abs(richardson_limit(step=2) - math.sqrt(2)) <= 1e-10


def test_richardson_exact_on_model():
    p = [0.5, 1.5]
    vals = [3 + 2 * N ** -0.5 - N ** -1.5 for N in (100, 200, 400)]
    assert abs(cat.richardson(vals, p) - 3) <= 1e-13


def test_quadrature_failure_reported():
    from catalan_qme.quadrature import halfline_quad
    with pytest.raises(IntegrationError):
        halfline_quad(lambda t: np.array([1 / np.sqrt(t + 1e-300)]) * 0 + np.sin(1e6 * t), tol=1e-14, limit=5)
