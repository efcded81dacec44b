import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from catalan_qme import seqalg as sa
from catalan_qme.catalan import catalan_gf, catalan_numbers
from catalan_qme.errors import DomainError

omega_points = st.builds(complex, st.floats(-5, 5), st.floats(-5, 5)).filter(
    lambda z: abs(z) >= 0.05 and sa.in_omega(z))
small_seqs = st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                      min_size=1, max_size=12).map(sa.WeightedSeq)
disc = st.builds(lambda r, t: 0.25 * math.sqrt(r) * cmath.exp(1j * t),
                 st.floats(0, 1), st.floats(-math.pi, math.pi))


def test_weighted_seq_validation():
    with pytest.raises(ValueError):
        sa.WeightedSeq([])
    with pytest.raises(ValueError):
        sa.WeightedSeq([1.0], -1.0)
    a = sa.WeightedSeq([1, 2, 3])
    assert a.exact and a.L == 3
    b = a.truncate(1)
    assert b.L == 1 and b.trunc_err == 2 / 4 + 3 / 16


def test_arithmetic():
    a = sa.WeightedSeq([1, 2], 0.1)
    b = sa.WeightedSeq([1, 0, 4])
    np.testing.assert_array_equal((a + b).coeffs, [2, 2, 4])
    np.testing.assert_array_equal((a - b).coeffs, [0, 2, -4])
    assert (2 * a).trunc_err == 0.2
    assert (a / 2).coeffs[1] == 1


def test_delta_and_norm():
    assert sa.norm_w(sa.delta(3)) == 4.0 ** -3
    with pytest.raises(ValueError):
        sa.delta(3, 2)


@given(small_seqs, small_seqs)
def test_submultiplicative(a, b):
    assert sa.norm_w(sa.convolve(a, b)) <= sa.norm_w(a) * sa.norm_w(b) * (1 + 1e-12) + 1e-300


@given(small_seqs, small_seqs, disc)
def test_gelfand_morphism(a, b, z):
    lhs = sa.z_transform(sa.convolve(a, b), z)
    rhs = sa.z_transform(a, z) * sa.z_transform(b, z)
    scale = max(1.0, sa.norm_w(a) * sa.norm_w(b))
    assert abs(lhs - rhs) <= 1e-11 * scale


def test_z_transform_domain():
    with pytest.raises(DomainError):
        sa.z_transform(sa.delta(0), 0.3)


def test_convolution_error_budget():
    c = sa.catalan_seq(64)
    p = sa.convolve(c, c)
    assert p.L == 64
    assert p.trunc_err >= 2 * sa.norm_w(c) * c.trunc_err


def test_catalan_seq_norm():
    c = sa.catalan_seq(256)
    assert abs(sa.norm_w(c) + c.trunc_err - 2) <= 1e-12
    with pytest.raises(DomainError):
        sa.catalan_seq(sa.MAX_CATALAN_LENGTH + 1)


def test_catalan_quadratic_exact_integers():
    cs = list(catalan_numbers(200).exact)
    sq = np.convolve(np.array(cs, dtype=object), np.array(cs, dtype=object))
    # delta_1 * c^2 - c + delta_0 with integer arithmetic
    assert all(sq[n - 1] - cs[n] == 0 for n in range(1, 200))
    assert cs[0] == 1


def test_catalan_quadratic_weighted():
    L = 256
    c = sa.catalan_seq(L)
    r = sa.convolve(sa.convolve(sa.delta(1, L), c, L), c, L) - c + sa.delta(0, L)
    assert sa.norm_w(r) <= 1e-15


def test_catalan_inverse():
    c = sa.catalan_seq()
    assert sa.prefix_residual(c, sa.catalan_inverse(), sa.delta(0)) <= 1e-14


def test_geometric_seq():
    p = sa.geometric_seq(2.0, 10)
    np.testing.assert_allclose(p.coeffs, 2.0 ** -np.arange(10))
    assert abs(sa.z_transform(p.truncate(10), 0.25) - sum(0.125 ** n for n in range(10))) < 1e-15
    with pytest.raises(sa.NotInAlgebraError):
        sa.geometric_seq(0.25)


def test_in_omega():
    assert not sa.in_omega(3)
    assert not sa.in_omega(1)
    assert sa.in_omega(-1)
    assert sa.in_omega(0.5)
    with pytest.raises(DomainError):
        sa.in_omega(0)


@pytest.mark.parametrize("lam", [-1, 0.5 + 0.5j, 0.3j, -2 + 1j])
def test_resolvent_examples(lam):
    c = sa.catalan_seq()
    R = sa.resolvent_catalan(lam)
    assert sa.prefix_residual(lam * sa.delta(0, c.L) - c, R, sa.delta(0)) <= 1e-10
    # Gelfand transform of the resolvent
    z = 0.1
    assert abs(sa.z_transform(R, z) - 1 / (lam - catalan_gf(z))) <= R.trunc_err * 0.4 ** R.L + 1e-12


def test_resolvent_outside_omega():
    for lam in (3, 1, 2):
        with pytest.raises(sa.OutsideOmegaError):
            sa.resolvent_catalan(lam)


@given(omega_points)
@settings(max_examples=40, deadline=None)
def test_resolvent_multiply_back(lam):
    c = sa.catalan_seq(128)
    R = sa.resolvent_catalan(lam, 128)
    scale = max(1.0, sa.norm_w(R))
    assert sa.prefix_residual(lam * sa.delta(0, 128) - c, R, sa.delta(0)) <= 1e-12 * scale * (1 + abs(lam))


@given(omega_points, omega_points)
@settings(max_examples=30, deadline=None)
def test_first_resolvent_equation(lam, mu):
    assume(abs(lam - mu) > 1e-3)
    L = 128
    Rl, Rm = sa.resolvent_catalan(lam, L), sa.resolvent_catalan(mu, L)
    lhs = Rl - Rm
    rhs = (mu - lam) * sa.convolve(Rl, Rm, L)
    diff = np.abs(lhs.coeffs - rhs.coeffs) * sa._weights(L)
    scale = max(1.0, sa.norm_w(Rl) * sa.norm_w(Rm) * (1 + abs(mu - lam)))
    assert diff.sum() <= 1e-11 * scale


def test_sigma_boundary_matches_gf():
    for theta in np.linspace(-math.pi, math.pi, 101):
        assert abs(sa.sigma_boundary(theta) - catalan_gf(cmath.exp(1j * theta) / 4)) <= 1e-12
    assert sa.sigma_boundary(0.0) == 2
    assert abs(sa.sigma_boundary(0.5) - catalan_gf(cmath.exp(0.5j) / 4)) <= 1e-12


@pytest.mark.parametrize("M", [8, 100, 2048])
def test_boundary_rows(M):
    rows = sa.boundary_rows(M)
    assert sum(r[3] == "sigma_c" for r in rows) == M
    assert sum(r[3] == "omega" for r in rows) == M
    for curve in ("sigma_c", "omega"):
        pts = np.array([complex(r[1], r[2]) for r in rows if r[3] == curve])
        ratio = np.abs(pts - 1) / np.abs(pts) ** 2
        assert np.max(np.abs(ratio - 0.25)) <= 1e-9
        if M >= 100:
            steps = np.abs(np.diff(np.abs(np.append(pts, pts[0]))))
            assert steps.max() < 10 / M


def test_omega_boundary_points():
    assert abs(sa.omega_boundary_point(0.0) - 2) <= 1e-12
    assert abs(sa.omega_boundary_point(math.pi) - (-2 - 2 * math.sqrt(2))) <= 1e-12


def test_backward_difference():
    bd = sa.backward_difference_catalan(12)
    assert abs(bd.closed_form[0] - (2 * math.sqrt(6) - 4)) <= 1e-15
    assert abs(bd.direct_series[0] - (2 * math.sqrt(6) - 4)) <= 1e-12
    assert bd.max_discrepancy <= 1e-10
    assert np.all(np.diff(bd.closed_form[1:]) < 0)
    assert np.all(bd.closed_form > 0)
    with pytest.raises(DomainError):
        sa.backward_difference_catalan(0)
