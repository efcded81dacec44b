import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catalan_qme import qme
from catalan_qme.catalan import catalan_gf
from catalan_qme.errors import (ConvergenceError, DimensionError, DomainError, IllPosedError,
                                StrategyError)
from catalan_qme.linalg import norm_inf
from catalan_qme.opcalc import catalan_of_matrix_series, family_matrix
from catalan_qme.suites import random_admissible_T

seeds = st.integers(0, 2 ** 32 - 1)


def scalar_newton(t, y):
    return (t * y * y - 1) / (2 * t * y - 1)


def scalar_corrections(t, y, k):
    """Corrections of the Catalan step for a scalar equation."""
    q = t * y * y - y + 1
    dq = 2 * t * y - 1
    h = [-q / dq]
    c_prev = 1
    for j in range(1, k + 1):
        c = c_prev * 2 * (2 * j - 1) // (j + 1)
        h.append(-(c / (2 * c_prev)) * t * 2 * h[0] * h[-1] / dq)
        c_prev = c
    return h


def random_pair(seed, n=4):
    rng = np.random.default_rng(seed)
    T = random_admissible_T(rng, dims=(n, n))
    Y = np.eye(n) + 0.05 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return T, Y


def test_config_validation():
    with pytest.raises(StrategyError):
        qme.SolverConfig(method="secant")
    with pytest.raises(StrategyError):
        qme.SolverConfig(form="other")
    with pytest.raises(DomainError):
        qme.SolverConfig(method="catalan", k=0)
    with pytest.raises(StrategyError):
        qme.SolverConfig(method="catalan", form="literal")
    with pytest.raises(StrategyError):
        qme.SolverConfig(method="catalan", k=3, assembly="paper")
    with pytest.raises(DomainError):
        qme.SolverConfig(max_iters=0)
    with pytest.raises(DomainError):
        qme.SolverConfig(res_tol=0.0)
    with pytest.raises(DomainError):
        qme.SolverConfig(precision=8)
    assert qme.SolverConfig().tol == 1e-13
    assert qme.SolverConfig(precision=40).tol == 1e-20
    assert qme.SolverConfig(method="catalan", k=2, assembly="paper").label == "catalan2-paper"


def test_parse_precision():
    assert qme.parse_precision("double") == "double"
    assert qme.parse_precision("extended") == 40
    assert qme.parse_precision("extended:60") == 60
    with pytest.raises(ValueError):
        qme.parse_precision("quad")


def test_qbd_example():
    T = qme.qbd_example(10)
    np.testing.assert_array_equal(np.diag(T), [0.1] * 9 + [1e-10])
    T = qme.qbd_example(100)
    assert np.count_nonzero(np.diag(T) == 0.1) == 99 and T[9, 9] == 1e-10
    assert not np.any(T - np.diag(np.diag(T)))
    with pytest.raises(DimensionError):
        qme.qbd_example(9)
    assert abs(catalan_gf(0.1) - (1 - math.sqrt(0.6)) / 0.2) <= 1e-15
    assert abs(catalan_gf(1e-10) - (1 + 1e-10)) <= 1e-16


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_frechet_derivative_finite_difference(seed):
    T, Y = random_pair(seed)
    E = np.random.default_rng(seed + 1).standard_normal(Y.shape) + 0j
    h = 1e-5
    fd = (qme.q_of(T, Y + h * E) - qme.q_of(T, Y - h * E)) / (2 * h)
    assert norm_inf(fd - qme.q_prime_apply(T, Y, E)) <= 1e-8 * max(1, norm_inf(E))
    # Q' is affine in Y with slope Q''
    E2 = np.random.default_rng(seed + 2).standard_normal(Y.shape) + 0j
    lhs = qme.q_prime_apply(T, Y + E2, E) - qme.q_prime_apply(T, Y, E)
    assert norm_inf(lhs - qme.q_second_apply(T, E2, E)) <= 1e-13


@given(seeds)
def test_second_derivative_symmetric(seed):
    T, Y = random_pair(seed)
    rng = np.random.default_rng(seed)
    E1, E2 = rng.standard_normal((2, 4, 4))
    np.testing.assert_array_equal(qme.q_second_apply(T, E1, E2), qme.q_second_apply(T, E2, E1))


def test_residual_of_series_solution():
    T = random_admissible_T(np.random.default_rng(0))
    assert norm_inf(qme.q_of(T, catalan_of_matrix_series(T))) <= 1e-13


@pytest.mark.parametrize("form", ["paper", "derived"])
def test_newton_matches_scalar_newton(form):
    T = qme.qbd_example(10)
    Y = T.copy()
    y = np.diag(T).copy()
    for _ in range(4):
        Y = qme.newton_step(T, Y, form)
        y = scalar_newton(np.diag(T), y)
        np.testing.assert_allclose(np.diag(Y), y, rtol=1e-13)
        assert not np.any(Y - np.diag(np.diag(Y)))


def test_newton_fixed_point_and_zero():
    T = random_admissible_T(np.random.default_rng(3))
    C = catalan_of_matrix_series(T)
    assert norm_inf(qme.newton_step(T, C, "derived") - C) <= 1e-11
    Z = np.zeros((3, 3), dtype=complex)
    Y0 = np.random.default_rng(0).standard_normal((3, 3)) + 0j
    np.testing.assert_allclose(qme.newton_step(Z, Y0, "derived"), np.eye(3), atol=1e-15)


def test_newton_ill_posed():
    # 2 t y - 1 = 0 for t = 0.5, y = 1
    with pytest.raises(IllPosedError):
        qme.newton_step(np.array([[0.5]]), np.array([[1.0 + 0j]]), "paper")


def test_literal_form_stalls():
    tr = qme.solve_qme(qme.qbd_example(10), cfg=qme.SolverConfig(form="literal", max_iters=6))
    assert not tr.converged
    assert all(abs(r - 1) < 1e-2 for r in tr.residuals[1:])


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_catalan_corrections_scalar(k):
    T = qme.qbd_example(10)
    Y = 1.05 * T
    H = qme.catalan_corrections(T, Y, k)
    h = scalar_corrections(np.diag(T), np.diag(Y), k)
    for Hj, hj in zip(H, h):
        np.testing.assert_allclose(np.diag(Hj), hj, rtol=1e-12, atol=1e-300)


def test_catalan_weight():
    assert qme._weight(1, False) == 0.5


@pytest.mark.parametrize("form", ["paper", "derived"])
@given(seed=seeds)
@settings(max_examples=10, deadline=None)
def test_closed_corrections_match_recursion(form, seed):
    T, Y = random_pair(seed)
    op = qme.linear_operator(T, Y, form)
    for a, b in zip(qme.catalan_corrections(T, Y, 4, form, op), qme.catalan_corrections_closed(T, Y, 4, form, op)):
        assert norm_inf(a - b) <= 1e-12 * max(1.0, norm_inf(a))


def test_catalan_step_scalar_order4():
    T = qme.qbd_example(10)
    Y = qme.catalan_step(T, T, 2)
    h = scalar_corrections(np.diag(T), np.diag(T), 2)
    np.testing.assert_allclose(np.diag(Y), np.diag(T) + sum(h), rtol=1e-13)
    Yp = qme.catalan_step(T, T, 2, assembly="paper")
    np.testing.assert_allclose(np.diag(Yp), np.diag(T) + h[0] + h[1] + h[2] / 2, rtol=1e-13)
    with pytest.raises(StrategyError):
        qme.catalan_step(T, T, 3, assembly="paper")


def test_one_step_residual_decreases_with_k():
    T = qme.qbd_example(10)
    res = [norm_inf(qme.q_of(T, qme.catalan_step(T, T, k))) for k in (1, 2, 3, 4)]
    assert all(a > b for a, b in zip(res, res[1:]))
    T, Y = random_pair(11)
    res = [norm_inf(qme.q_of(T, qme.catalan_step(T, Y, k, "derived"))) for k in (1, 2, 3, 4)]
    assert all(a > b for a, b in zip(res, res[1:]))


def test_newton_table_double():
    tr = qme.solve_qme(qme.qbd_example(100))
    assert tr.converged and len(tr.steps) == 4
    expected = (8.45274e-2, 1.12729e-3, 2.11638e-7)
    for r, e in zip(tr.residuals, expected):
        assert abs(r / e - 1) <= 5e-3
    assert tr.residuals[3] < 1e-14
    assert tr.series_distance <= 1e-13


def test_catalan4_table_double():
    cfg = qme.SolverConfig(method="catalan", k=2, assembly="paper")
    tr = qme.solve_qme(qme.qbd_example(100), cfg=cfg)
    assert tr.converged
    for r, e in zip(tr.residuals, (1.03079e-2, 3.01635e-8)):
        assert abs(r / e - 1) <= 5e-3


def test_monotone_after_first_step():
    T = qme.qbd_example(100)
    for cfg in (qme.SolverConfig(precision=40),
                qme.SolverConfig(method="catalan", k=2, precision=60, res_tol=1e-50),
                qme.SolverConfig(method="catalan", k=2, assembly="paper", precision=40)):
        r = qme.solve_qme(T, cfg=cfg).residuals
        assert all(a > b for a, b in zip(r, r[1:]))


def test_fast_path_agrees_with_general_path():
    T = qme.qbd_example(12)
    for cfg in (qme.SolverConfig(), qme.SolverConfig(method="catalan", k=2)):
        a = qme.solve_qme(T, cfg=cfg)
        b = qme.solve_qme(T, cfg=qme.SolverConfig(**{**cfg.__dict__, "diagonal_fast_path": False}))
        np.testing.assert_allclose(a.residuals[:2], b.residuals[:2], rtol=1e-10)
        assert norm_inf(a.Y - b.Y) <= 1e-13


def test_extended_general_path_matches_diagonal():
    T = np.diag([0.1, 0.1, 1e-10]).astype(complex)
    a = qme.solve_qme(T, cfg=qme.SolverConfig(precision=30))
    b = qme.solve_qme(T, cfg=qme.SolverConfig(precision=30, diagonal_fast_path=False))
    np.testing.assert_allclose(a.residuals, b.residuals, rtol=1e-10)
    with pytest.raises(StrategyError):
        qme.solve_qme(qme.qbd_example(13) + 1e-3 * np.eye(13, k=1), cfg=qme.SolverConfig(precision=30))


def test_paper_and_derived_agree_on_diagonal():
    T = qme.qbd_example(10)
    a = qme.solve_qme(T, cfg=qme.SolverConfig(form="paper", diagonal_fast_path=False))
    b = qme.solve_qme(T, cfg=qme.SolverConfig(form="derived", diagonal_fast_path=False))
    assert norm_inf(a.Y - b.Y) <= 1e-12
    np.testing.assert_allclose(a.residuals, b.residuals, rtol=1e-9)


def test_swap_converges_to_series():
    T = family_matrix("swap", 0.1)
    tr = qme.solve_qme(T, np.eye(2), qme.SolverConfig())
    assert tr.converged and tr.series_distance <= 1e-12
    tr = qme.solve_qme(T, np.eye(2), qme.SolverConfig(method="catalan", k=2))
    assert tr.converged and tr.series_distance <= 1e-12


def test_orders_on_qbd():
    T = qme.qbd_example(100)
    r = qme.solve_qme(T).residuals
    assert abs(qme.estimate_order(r, qme.precision_floor(T)) - 2) <= 0.3
    cfg = qme.SolverConfig(method="catalan", k=2, precision=120, res_tol=1e-100)
    r = qme.solve_qme(T, cfg=cfg).residuals
    assert abs(qme.estimate_order(r, qme.precision_floor(T, 120)) - 4) <= 0.6
    cfg = qme.SolverConfig(method="catalan", k=2, assembly="paper", precision=120, res_tol=1e-100)
    r = qme.solve_qme(T, cfg=cfg).residuals
    assert abs(qme.estimate_order(r, qme.precision_floor(T, 120)) - 3) <= 0.3


def test_orders_non_commuting_derived():
    T, Y = random_pair(5)
    floor = qme.precision_floor(T, 150)
    for method, k, order in (("newton", 2, 2), ("catalan", 1, 3), ("catalan", 2, 4)):
        cfg = qme.SolverConfig(method=method, k=k, form="derived", precision=150, res_tol=1e-140)
        r = qme.solve_qme(T, Y, cfg).residuals
        assert abs(qme.estimate_order(r, floor) - order) <= 0.3


def test_estimate_order_needs_data():
    with pytest.raises(ConvergenceError):
        qme.estimate_order([1e-2, 1e-20], 1e-16)
    assert abs(qme.estimate_order([1e-1, 1e-2, 1e-4, 1e-8], 1e-30) - 2) < 1e-12


def test_non_convergence_is_reported():
    T = qme.qbd_example(10)
    tr = qme.solve_qme(T, cfg=qme.SolverConfig(max_iters=2))
    assert not tr.converged and len(tr.steps) == 2 and tr.failure is None
    tr = qme.solve_qme(np.array([[0.5]]), np.array([[1.0]]), qme.SolverConfig())
    assert not tr.converged and "step 1" in tr.failure


def test_converged_iff_last_residual_below_tol():
    for max_iters in range(1, 6):
        tr = qme.solve_qme(qme.qbd_example(10), cfg=qme.SolverConfig(max_iters=max_iters))
        assert tr.converged == (tr.residuals[-1] < 1e-13)


def test_trace_json():
    tr = qme.solve_qme(qme.qbd_example(10))
    doc = json.loads(tr.to_json())
    assert set(doc) == {"method", "form", "precision", "steps", "converged", "n"}
    assert doc["steps"][0]["k"] == 1
    assert abs(doc["steps"][0]["res"] - tr.residuals[0]) == 0
    assert "e-02" in tr.to_json()
    assert json.loads(tr.to_json(timing=False))["steps"][0]["seconds"] is None
    assert qme.dumps_sci({"x": qme._Sci(float("inf"))}).endswith("null\n}")


def test_dimension_checks():
    with pytest.raises(DimensionError):
        qme.solve_qme(np.eye(2), np.eye(3))
