"""Iterative solvers for ``Q(Y) = T Y^2 - Y + I = 0``.

Newton's method and the Catalan family: at each outer step the corrections
``H_0, H_1, ..., H_k`` all solve linear problems with the same operator
``L``, so one factorization of ``L`` serves the whole step.  Two choices of
``L`` are available:

``paper``
    ``L X = (T Y - I) X + X (T Y)``, a standard Sylvester operator.  It is
    the Frechet derivative ``Q'(Y)`` whenever `T` commutes with `Y`.
``derived``
    ``L X = T X Y + (T Y - I) X = Q'(Y) X``, a generalized Sylvester
    operator solved through its Kronecker form.

Newton also has a ``literal`` variant whose right-hand side drops the ``-I``;
it does not converge and is kept only so it can be demonstrated.

Double precision uses complex128 arrays.  Extended precision uses object
arrays of mpmath numbers under a fixed working precision; linear solves then
go through the Kronecker system (``n <= 12``) unless `T` and `Y0` are both
diagonal, in which case every problem splits into ``n`` scalar ones stored
as an ``(n, 1, 1)`` stack.
"""

import json
import re
import time
from dataclasses import dataclass, field
from typing import Optional

import mpmath
import numpy as np
from mpmath import mp

from .errors import (ConvergenceError, DimensionError, DomainError,
                     IllPosedError, SingularMatrixError, StrategyError)
from .linalg import (GeneralizedSylvesterSolver, SylvesterSolver, _square,
                     norm_inf)
from .opcalc import catalan_of_matrix_series, spectral_radius

NEWTON = "newton"
CATALAN = "catalan"
FORMS = ("paper", "derived", "literal")
ASSEMBLIES = ("sum", "paper")
DEFAULT_DIGITS = 40
EXTENDED_KRON_MAX_DIM = 12
QBD_SMALL = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    `precision` is ``"double"`` or a number of decimal digits for extended
    mode.  `assembly` selects how Catalan corrections are combined:
    ``"sum"`` gives ``Y + H_0 + ... + H_k``; ``"paper"`` (``k = 2`` only)
    gives ``Y + H_0 + H_1 + H_2/2``, a third-order variant.
    """

    method: str = NEWTON
    k: int = 2
    max_iters: int = 50
    res_tol: Optional[float] = None
    form: str = "paper"
    assembly: str = "sum"
    precision: object = "double"
    diagonal_fast_path: bool = True
    check_series: bool = True

    def __post_init__(self):
        if self.method not in (NEWTON, CATALAN):
            raise StrategyError(f"unknown method {self.method!r}")
        if self.form not in FORMS:
            raise StrategyError(f"unknown form {self.form!r}")
        if self.assembly not in ASSEMBLIES:
            raise StrategyError(f"unknown assembly {self.assembly!r}")
        if self.method == CATALAN:
            if int(self.k) != self.k or self.k < 1:
                raise DomainError("k must be an integer >= 1")
            if self.form == "literal":
                raise StrategyError("the literal form exists only for Newton")
            if self.assembly == "paper" and self.k != 2:
                raise StrategyError("the paper assembly is defined for k = 2 only")
        if self.max_iters < 1:
            raise DomainError("max_iters must be >= 1")
        if self.precision != "double":
            if isinstance(self.precision, bool) or not isinstance(self.precision, int) or self.precision < 16:
                raise DomainError("extended precision needs an integer number of digits >= 16")
        if self.res_tol is not None and not self.res_tol > 0:
            raise DomainError("res_tol must be positive")

    @property
    def extended(self):
        return self.precision != "double"

    @property
    def digits(self):
        return self.precision if self.extended else 16

    @property
    def tol(self):
        if self.res_tol is not None:
            return self.res_tol
        return 1e-20 if self.extended else 1e-13

    @property
    def label(self):
        if self.method == NEWTON:
            return NEWTON
        suffix = "" if self.assembly == "sum" else "-paper"
        return f"catalan{self.k}{suffix}"

    @property
    def precision_label(self):
        return "double" if not self.extended else f"extended:{self.precision}"


def parse_precision(text):
    """``"double"`` or ``"extended:<digits>"`` (``"extended"`` alone gives 40)."""
    if text == "double":
        return "double"
    if text == "extended":
        return DEFAULT_DIGITS
    m = re.fullmatch(r"extended:(\d+)", text)
    if not m:
        raise ValueError(f"precision must be 'double' or 'extended:<digits>', got {text!r}")
    return int(m.group(1))


@dataclass(frozen=True)
class StepRecord:
    k: int
    res: float
    seconds: float


@dataclass
class IterationTrace:
    method: str
    form: str
    precision: str
    n: int
    steps: list = field(default_factory=list)
    converged: bool = False
    Y: Optional[np.ndarray] = None
    initial_residual: float = float("nan")
    final_residual: float = float("nan")
    series_distance: Optional[float] = None
    failure: Optional[str] = None

    @property
    def residuals(self):
        return [s.res for s in self.steps]

    def to_dict(self, timing=True):
        return {
            "method": self.method,
            "form": self.form,
            "precision": self.precision,
            "steps": [{"k": s.k, "res": _Sci(s.res), "seconds": s.seconds if timing else None}
                      for s in self.steps],
            "converged": self.converged,
            "n": self.n,
        }

    def to_json(self, timing=True):
        return dumps_sci(self.to_dict(timing))


class _Sci:
    """Marker for floats written in scientific notation."""

    def __init__(self, x):
        self.x = float(x)


def dumps_sci(obj, indent=2):
    """``json.dumps`` that writes `_Sci` values as ``1.2345678901234567e-02``."""

    def default(o):
        if isinstance(o, _Sci):
            # non-finite values become null
            return f"@@sci:{o.x:.16e}" if np.isfinite(o.x) else None
        raise TypeError(f"not serializable: {type(o).__name__}")

    text = json.dumps(obj, indent=indent, default=default)
    return re.sub(r'"@@sci:([^"]*)"', r"\1", text)


# Residual and derivatives

def _eye_like(Y):
    if Y.ndim == 3:
        one = mp.mpf(1) if Y.dtype == object else 1.0
        return np.full(Y.shape, one, dtype=Y.dtype)
    if Y.dtype == object:
        return np.array(mpmath.eye(Y.shape[0]).tolist(), dtype=object)
    return np.eye(Y.shape[0], dtype=Y.dtype)


def q_of(T, Y):
    """``Q(Y) = T Y^2 - Y + I``."""
    return T @ Y @ Y - Y + _eye_like(Y)


def q_prime_apply(T, Y, E):
    """``Q'(Y) E = T E Y + (T Y - I) E``."""
    return T @ E @ Y + (T @ Y - _eye_like(Y)) @ E


def q_second_apply(T, E1, E2):
    """``Q''(Y)(E1, E2) = T (E1 E2 + E2 E1)``; independent of `Y`."""
    return T @ (E1 @ E2 + E2 @ E1)


# Linear solves sharing one factorization

class _DiagonalOperator:
    def __init__(self, T, Y, form):
        d = 2 * (T * Y) - _eye_like(Y)
        if any(x == 0 for x in d.ravel()):
            raise SingularMatrixError("2 t y - 1 vanishes for some diagonal entry")
        self.d = d

    def solve(self, D):
        return D / self.d


class _ExtendedKronOperator:
    """``L`` assembled as an ``n^2 x n^2`` mpmath matrix and LU-factorized once."""

    def __init__(self, T, Y, form):
        n = T.shape[0]
        if n > EXTENDED_KRON_MAX_DIM:
            raise StrategyError(f"extended precision without the diagonal path needs n <= {EXTENDED_KRON_MAX_DIM}")
        I = _eye_like(Y)
        TY = T @ Y
        if form == "derived":
            K = np.kron(Y.T, T) + np.kron(I, TY - I)
        else:
            K = np.kron(I, TY - I) + np.kron(TY.T, I)
        self.n = n
        try:
            self._lu = mp.LU_decomp(mp.matrix(K.tolist()))
        except ZeroDivisionError as exc:
            raise IllPosedError("linear operator is numerically singular") from exc

    def solve(self, D):
        A, p = self._lu
        b = mp.matrix(D.reshape(-1, order="F").tolist())
        x = mp.U_solve(A, mp.L_solve(A, b, p))
        return np.array([x[i] for i in range(x.rows)], dtype=object).reshape((self.n, self.n), order="F")


class _SylvesterOperator:
    def __init__(self, T, Y, form):
        TY = T @ Y
        A = TY - np.eye(T.shape[0])
        if form == "derived":
            self._s = GeneralizedSylvesterSolver(T, Y, A)
        else:
            self._s = SylvesterSolver(A, TY)

    def solve(self, D):
        return self._s.solve(D)


def linear_operator(T, Y, form="paper"):
    """Factorized ``L`` at `Y`, with a ``solve(D)`` method.

    Inputs may be ``(n, n)`` matrices or ``(n, 1, 1)`` diagonal stacks, in
    double or mpmath arithmetic.
    """
    if Y.ndim == 3:
        return _DiagonalOperator(T, Y, form)
    if Y.dtype == object:
        return _ExtendedKronOperator(T, Y, form)
    return _SylvesterOperator(T, Y, form)


# Single steps

def newton_step(T, Yn, form="paper", op=None):
    """One Newton step ``L Y_{n+1} = T Y_n^2 - I`` (``literal``: ``= T Y_n^2``)."""
    op = op or linear_operator(T, Yn, form)
    rhs = T @ Yn @ Yn
    if form != "literal":
        rhs = rhs - _eye_like(Yn)
    return op.solve(rhs)


def _weight(j, extended):
    """``C_j / (2 C_{j-1}) = (2j - 1)/(j + 1)``."""
    return mp.mpf(2 * j - 1) / (j + 1) if extended else (2.0 * j - 1.0) / (j + 1.0)


def catalan_H0(T, Yn, op):
    """``L H_0 = -Q(Y_n)``: the Newton correction."""
    return op.solve(-q_of(T, Yn))


def catalan_Hj(T, H0, Hprev, j, op):
    """``L H_j = -(C_j / (2 C_{j-1})) T (H_0 H_{j-1} + H_{j-1} H_0)`` for ``j >= 1``."""
    if j < 1:
        raise DomainError("j must be >= 1")
    w = _weight(j, H0.dtype == object)
    return op.solve(-w * (T @ (H0 @ Hprev + Hprev @ H0)))


def catalan_corrections(T, Yn, k, form="paper", op=None):
    """``[H_0, ..., H_k]`` from the recursion, with one shared factorization."""
    op = op or linear_operator(T, Yn, form)
    H = [catalan_H0(T, Yn, op)]
    for j in range(1, k + 1):
        H.append(catalan_Hj(T, H[0], H[-1], j, op))
    return H


def catalan_corrections_closed(T, Yn, k, form="paper", op=None):
    """``H_j = -(C_j / 2^j) F^j G`` with ``G = L^-1 Q(Y_n)``, ``F E = L^-1 T (E G + G E)``.

    An independent route to the same corrections, used as a cross-check.
    """
    op = op or linear_operator(T, Yn, form)
    G = op.solve(q_of(T, Yn))
    extended = G.dtype == object
    out = []
    E = G
    c = 1  # C_j
    for j in range(k + 1):
        if j:
            E = op.solve(T @ (E @ G + G @ E))
            c = c * 2 * (2 * j - 1) // (j + 1)
        coef = mp.mpf(c) / 2 ** j if extended else c / 2.0 ** j
        out.append(-coef * E)
    return out


def catalan_step(T, Yn, k, form="paper", assembly="sum", op=None):
    """``Y_{n+1} = Y_n + H_0 + ... + H_k`` (``assembly="paper"``: ``+ H_2/2`` last)."""
    H = catalan_corrections(T, Yn, k, form, op)
    if assembly == "paper":
        if k != 2:
            raise StrategyError("the paper assembly is defined for k = 2 only")
        half = mp.mpf(1) / 2 if Yn.dtype == object else 0.5
        return Yn + H[0] + H[1] + half * H[2]
    Y = Yn
    for h in H:
        Y = Y + h
    return Y


# Driver

def _is_diagonal(A):
    return not np.any(A - np.diag(np.diag(A)))


def _to_internal(A, cfg, diag):
    if diag:
        A = np.diag(A).reshape(-1, 1, 1)
    if cfg.extended:
        return np.frompyfunc(mp.mpc, 1, 1)(A).astype(object)
    return np.array(A, dtype=np.complex128)


def _to_complex(A, diag):
    A = np.array(np.frompyfunc(complex, 1, 1)(A), dtype=np.complex128) if A.dtype == object else A
    return np.diag(A.reshape(-1)) if diag else A


def precision_floor(T, precision="double"):
    """Residual level below which rounding dominates: ``10^-(digits-3) n ||T||``."""
    T = _square(T, "T")
    digits = 16 if precision == "double" else precision
    return 10.0 ** -(digits - 3) * T.shape[0] * max(norm_inf(T), 1e-300)


def solve_qme(T, Y0=None, cfg=None):
    """Iterate until ``||Q(Y)||_inf < res_tol`` or `max_iters` steps.

    Returns an `IterationTrace`; non-convergence and step failures are
    reported in the trace (``converged=False``, `failure`) rather than raised.
    """
    cfg = cfg or SolverConfig()
    T = _square(T, "T")
    Y0 = T.copy() if Y0 is None else _square(Y0, "Y0")
    if Y0.shape != T.shape:
        raise DimensionError("Y0 and T must have the same shape")
    n = T.shape[0]
    diag = cfg.diagonal_fast_path and _is_diagonal(T) and _is_diagonal(Y0)
    trace = IterationTrace(method=cfg.label, form=cfg.form, precision=cfg.precision_label, n=n)
    ctx = mp.workdps(cfg.digits) if cfg.extended else _null_context()
    with ctx:
        Ti = _to_internal(T, cfg, diag)
        Y = _to_internal(Y0, cfg, diag)
        trace.initial_residual = float(norm_inf(q_of(Ti, Y)))
        for k in range(1, cfg.max_iters + 1):
            t0 = time.perf_counter()
            try:
                op = linear_operator(Ti, Y, cfg.form)
                if cfg.method == NEWTON:
                    Y = newton_step(Ti, Y, cfg.form, op)
                else:
                    Y = catalan_step(Ti, Y, cfg.k, cfg.form, cfg.assembly, op)
            except (IllPosedError, SingularMatrixError) as exc:
                trace.failure = f"step {k}: {exc}"
                break
            res = float(norm_inf(q_of(Ti, Y)))
            trace.steps.append(StepRecord(k, res, time.perf_counter() - t0))
            if not np.isfinite(res):
                trace.failure = f"step {k}: residual is not finite"
                break
            if res < cfg.tol:
                trace.converged = True
                break
        trace.Y = _to_complex(Y, diag)
    trace.final_residual = float(norm_inf(q_of(T, trace.Y)))
    if trace.converged and cfg.check_series and spectral_radius(T) < 0.25 * (1 - 1e-6):
        try:
            trace.series_distance = float(norm_inf(trace.Y - catalan_of_matrix_series(T)))
        except ConvergenceError:
            pass
    return trace


class _null_context:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def qbd_example(n=100):
    """Diagonal test matrix: ``0.1`` everywhere except ``1e-10`` in position 10.

    Only the first ten diagonal entries of the reference problem are
    specified; the remaining ones repeat ``0.1``.
    """
    if int(n) != n or n < 10:
        raise DimensionError("n must be an integer >= 10")
    d = np.full(n, 0.1)
    d[9] = QBD_SMALL
    return np.diag(d).astype(np.complex128)


def estimate_order(residuals, floor):
    """Least-squares slope of ``log r_{n+1}`` against ``log r_n``.

    Only residuals above ``100 * floor`` take part.  Needs at least two
    consecutive pairs.
    """
    usable = []
    for x in residuals:
        if x > 100.0 * floor:
            usable.append(x)
        else:
            break
    r = usable
    if len(r) < 3:
        raise ConvergenceError(f"need at least 3 residuals above the floor, got {len(r)}")
    x = np.log(r[:-1])
    y = np.log(r[1:])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)
