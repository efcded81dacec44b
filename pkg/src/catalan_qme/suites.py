"""Seeded property suites behind ``catalan-qme verify``.

Each suite draws from its own random stream derived from the seed and the
suite name, and returns a list of `PropertyResult`.
"""

import cmath
import math
import zlib
from typing import NamedTuple

import numpy as np

from . import catalan as cat
from . import opcalc as oc
from . import qme
from . import seqalg as sa

SUITES = ("scalar", "sequence", "operator", "solver")
TABLE_NEWTON = (8.45274e-2, 1.12729e-3, 2.11638e-7, 7.46507e-15, 9.28789e-30)
TABLE_CATALAN4 = (1.03079e-2, 3.01635e-8, 7.62333e-25)


class PropertyResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def suite_rng(seed, name):
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def _check(out, name, value, bound):
    out.append(PropertyResult(name, bool(value <= bound), f"{value:.3e} <= {bound:.1e}"))


def random_disc_point(rng, radius=0.25):
    r = radius * math.sqrt(rng.uniform())
    return r * cmath.exp(1j * rng.uniform(-math.pi, math.pi))


def random_omega_point(rng):
    while True:
        lam = complex(*rng.uniform(-4.0, 4.0, size=2))
        if lam != 0 and sa.in_omega(lam):
            return lam


def random_admissible_T(rng, rho=0.2, dims=(2, 8)):
    n = int(rng.integers(dims[0], dims[1] + 1))
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    r = np.max(np.abs(np.linalg.eigvals(A)))
    return rho * rng.uniform(0.2, 1.0) * A / r


def richardson_limit(step=1, levels=6, N0=256):
    """Extrapolated ``sum C_n 4^-n`` over every `step`-th index."""
    values = [cat.partial_sum_scaled(N0 * 2 ** i, step=step) for i in range(levels)]
    return cat.richardson(values, [k + 0.5 for k in range(levels - 1)])


def scalar_suite(seed):
    rng = suite_rng(seed, "scalar")
    out = []
    _check(out, "sum C_n/4^n = 2 (extrapolated)", abs(richardson_limit() - 2.0), 1e-10)
    _check(out, "sum C_2n/4^2n = sqrt 2 (extrapolated)", abs(richardson_limit(step=2) - math.sqrt(2)), 1e-10)
    exact = cat.catalan_numbers(200).exact
    conv = [1]
    for n in range(59):
        conv.append(sum(conv[i] * conv[n - i] for i in range(n + 1)))
    out.append(PropertyResult("Catalan recurrence = convolution recursion", exact[:60] == tuple(conv), "n < 60"))
    out.append(PropertyResult("Catalan closed form", all(exact[n] == math.comb(2 * n, n) // (n + 1)
                                                        for n in range(200)), "n < 200"))
    worst_root = worst_parts = worst_mean = 0.0
    for _ in range(50):
        z = random_disc_point(rng)
        y = cat.catalan_gf(z)
        worst_root = max(worst_root, abs(z * y * y - y + 1))
        worst_parts = max(worst_parts, abs(cat.catalan_gf_even(z) + cat.catalan_gf_odd(z) - y))
        if z != 0:
            worst_mean = max(worst_mean, cat.biquadratic_mean_residual(z))
    _check(out, "z C(z)^2 - C(z) + 1 = 0", worst_root, 1e-14)
    _check(out, "even + odd parts = C", worst_parts, 1e-14)
    _check(out, "biquadratic mean", worst_mean, 1e-12)
    worst = 0.0
    for z in (1.0, 1.5, 2 + 1j):
        for j in (0, 1, 2, 5):
            r = cat.integral_identity(z, j)
            worst = max(worst, abs(r.lhs - r.rhs))
    _check(out, "integral identities", worst, 1e-8)
    worst = max(abs(cat.catalan_moment(n)[0] - exact[n]) for n in range(6))
    _check(out, "moment integrals give C_0..C_5", worst, 1e-8)
    worst = 0.0
    for _ in range(10):
        z = 1.0 + random_disc_point(rng, 0.5)
        w = (z - 1) / (4 * z)
        t = cat.catalan_tail_series(z, 0, 200)
        worst = max(worst, abs(t.value - cat.catalan_gf(w)) - t.err)
    _check(out, "tail series brackets C", worst, 1e-13)
    return out


def sequence_suite(seed):
    rng = suite_rng(seed, "sequence")
    out = []
    L = sa.DEFAULT_LENGTH
    c = sa.catalan_seq(L)
    lhs = sa.convolve(sa.convolve(sa.delta(1, L), c, L), c, L) - c + sa.delta(0, L)
    _check(out, "delta_1 * c^2 - c + delta_0 = 0", sa.norm_w(lhs), 1e-15)
    _check(out, "||c|| = 2 within truncation", abs(sa.norm_w(c) - 2.0) - c.trunc_err, 1e-12)
    _check(out, "c * c^-1 = delta_0", sa.prefix_residual(c, sa.catalan_inverse(L), sa.delta(0)), 1e-14)
    worst = 0.0
    for _ in range(20):
        lam = random_omega_point(rng)
        R = sa.resolvent_catalan(lam, L)
        worst = max(worst, sa.prefix_residual(lam * sa.delta(0, L) - c, R, sa.delta(0)))
    _check(out, "resolvent multiply-back on Omega", worst, 1e-10)
    worst = 0.0
    for _ in range(20):
        a = sa.WeightedSeq(rng.standard_normal(12) + 1j * rng.standard_normal(12))
        b = sa.WeightedSeq(rng.standard_normal(12))
        z = random_disc_point(rng)
        worst = max(worst, abs(sa.z_transform(sa.convolve(a, b), z) - sa.z_transform(a, z) * sa.z_transform(b, z)))
    _check(out, "Z-transform is multiplicative", worst, 1e-12)
    bd = sa.backward_difference_catalan(12)
    _check(out, "backward difference coef_0 = 2 sqrt 6 - 4", abs(bd.direct_series[0] - (2 * math.sqrt(6) - 4)), 1e-12)
    _check(out, "backward difference series = closed form", bd.max_discrepancy, 1e-10)
    theta = sa.sigma_boundary_angles(256)
    pts = np.array([sa.sigma_boundary(t) for t in theta])
    gf = np.array([cat.catalan_gf(cmath.exp(1j * t) / 4) for t in theta])
    _check(out, "sigma boundary = C(|z| = 1/4)", float(np.max(np.abs(pts - gf))), 1e-12)
    ratio = np.abs(pts - 1) / np.abs(pts) ** 2
    _check(out, "sigma boundary on boundary of Omega", float(np.max(np.abs(ratio - 0.25))), 1e-9)
    return out


def operator_suite(seed, count=50):
    rng = suite_rng(seed, "operator")
    out = []
    wq = ws = wd = wl = 0.0
    for _ in range(count):
        T = random_admissible_T(rng)
        I = np.eye(T.shape[0])
        S = oc.catalan_of_matrix_series(T)
        wq = max(wq, oc.quadratic_residual(T, S))
        ws = max(ws, float(np.abs(T @ S - I / 2 + oc.sqrt_one_minus_4T(T) / 2).sum(axis=1).max()))
        wd = max(wd, float(np.abs(S - oc.catalan_of_matrix_quadrature(T)).sum(axis=1).max()))
        wl = max(wl, oc.left_inverse_check(T, S))
    _check(out, "Q(C(T)) = 0", wq, 1e-10)
    _check(out, "T C(T) = I/2 - sqrt(I/4 - T)", ws, 1e-9)
    _check(out, "series = resolvent integral", wd, 1e-7)
    _check(out, "(I - T C(T)) C(T) = I", wl, 1e-10)
    wy = wt = 0.0
    inve_ok = spec_ok = True
    for _ in range(20):
        T = random_admissible_T(rng)
        S = oc.catalan_of_matrix_series(T)
        lam = random_omega_point(rng)
        while abs(lam) < 0.5 or abs(lam - 1) < 0.5:
            lam = random_omega_point(rng)
        I = np.eye(T.shape[0])
        wy = max(wy, oc.multiply_back_residual(lam * I - S, oc.resolvent_of_Y(lam, T, S)))
        mu = (lam - 1) / lam ** 2
        wt = max(wt, oc.multiply_back_residual(mu * I - T, oc.resolvent_of_T_from_Y(lam, S)))
        inve_ok &= oc.inve_equivalences(T, S).all_true
        spec_ok &= oc.spectral_map_check(T) in (True, None)
    _check(out, "resolvent of Y multiply-back", wy, 1e-9)
    _check(out, "resolvent of T from Y multiply-back", wt, 1e-9)
    out.append(PropertyResult("four equivalent conditions hold", inve_ok, "20 solutions"))
    out.append(PropertyResult("spectral mapping", spec_ok, "20 matrices"))
    worst = 0.0
    for lam in (0.1, -0.2, 0.15 + 0.1j):
        for kind in ("scalar", "swap", "nilpotent"):
            T = oc.family_matrix(kind, lam)
            worst = max(worst, float(np.abs(oc.catalan_of_matrix_series(T)
                                            - oc.catalan_2x2_closed_form(kind, lam)).max()))
        T = oc.family_matrix("swap", lam)
        for a in oc.swap_family_roots(lam):
            worst = max(worst, oc.quadratic_residual(T, oc.swap_family_solution(lam, a)))
        T = oc.family_matrix("scalar", lam)
        for s in (1, -1):
            worst = max(worst, oc.quadratic_residual(T, oc.scalar_family_solution(lam, 0.3, -0.7, s)))
    _check(out, "2x2 closed forms", worst, 1e-11)
    T = oc.family_matrix("nilpotent", 0.2)
    nil = float(np.abs(oc.catalan_of_matrix_series(T) - (np.eye(2) + T)).max())
    _check(out, "nilpotent C(T) = I + T", nil, 1e-15)
    return out


def solver_suite(seed):
    rng = suite_rng(seed, "solver")
    out = []
    T = qme.qbd_example(100)
    tr = qme.solve_qme(T, cfg=qme.SolverConfig())
    rel = max(abs(r / t - 1) for r, t in zip(tr.residuals[:3], TABLE_NEWTON))
    _check(out, "Newton residuals, double, k = 1..3", rel, 5e-3)
    tr = qme.solve_qme(T, cfg=qme.SolverConfig(precision=40))
    rel = max(abs(r / t - 1) for r, t in zip(tr.residuals, TABLE_NEWTON))
    ok = len(tr.residuals) == len(TABLE_NEWTON)
    out.append(PropertyResult("Newton residuals, 40 digits", ok and rel <= 5e-2, f"rel {rel:.2e}"))
    tr = qme.solve_qme(T, cfg=qme.SolverConfig(method="catalan", k=2, assembly="paper", precision=40))
    rel = max(abs(r / t - 1) for r, t in zip(tr.residuals, TABLE_CATALAN4))
    ok = len(tr.residuals) == len(TABLE_CATALAN4)
    out.append(PropertyResult("Catalan4 residuals, 40 digits", ok and rel <= 5e-2, f"rel {rel:.2e}"))
    tr = qme.solve_qme(T, cfg=qme.SolverConfig())
    order = qme.estimate_order(tr.residuals, qme.precision_floor(T))
    out.append(PropertyResult("Newton order 2", abs(order - 2) <= 0.3, f"{order:.3f}"))
    cfg = qme.SolverConfig(method="catalan", k=2, precision=120, res_tol=1e-100)
    order = qme.estimate_order(qme.solve_qme(T, cfg=cfg).residuals, qme.precision_floor(T, 120))
    out.append(PropertyResult("CatalanK(2) order 4", abs(order - 4) <= 0.6, f"{order:.3f}"))
    T10 = qme.qbd_example(10)
    a = qme.solve_qme(T10, cfg=qme.SolverConfig(form="paper", diagonal_fast_path=False))
    b = qme.solve_qme(T10, cfg=qme.SolverConfig(form="derived", diagonal_fast_path=False))
    _check(out, "paper and derived Newton agree on diagonal T", float(np.abs(a.Y - b.Y).max()), 1e-12)
    worst = 0.0
    for _ in range(5):
        T = random_admissible_T(rng, rho=0.2, dims=(2, 5))
        tr = qme.solve_qme(T, np.eye(T.shape[0]), qme.SolverConfig(method="catalan", k=2, form="derived"))
        worst = max(worst, tr.series_distance if tr.converged else math.inf)
    _check(out, "Catalan iteration reaches C(T)", worst, 1e-11)
    return out


def run_suite(name, seed):
    fn = {"scalar": scalar_suite, "sequence": sequence_suite,
          "operator": operator_suite, "solver": solver_suite}[name]
    return fn(seed)
