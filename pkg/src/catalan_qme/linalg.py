"""Dense complex linear algebra kernels.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Everything in
here is a pure function of its inputs; the only state is the factorization
cached inside :class:`SylvesterSolver` and :class:`GeneralizedSylvesterSolver`
so that several right-hand sides can share one decomposition.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla

from .errors import (ConvergenceError, DimensionError, IllPosedError,
                     SingularMatrixError, StrategyError)

__all__ = [
    "SchurForm", "SylvesterProblem", "SylvesterSolver",
    "GeneralizedSylvesterSolver", "as_cmatrix", "norm_inf", "matmul",
    "lu_solve", "hessenberg", "schur", "eigenvalues", "sylvester_solve",
    "generalized_sylvester_kron", "multiset_distance",
]

BARTELS_STEWART = "bartels-stewart"
KRONECKER = "kronecker"
KRON_MAX = 4096
SCHUR_MAX_DIM = 512
SPECTRA_TOL = 1e-12


def as_cmatrix(A, name="matrix"):
    """Return `A` as a finite 2-D complex128 array."""
    M = np.array(A, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _square(A, name="matrix"):
    M = as_cmatrix(A, name)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    return M


def norm_inf(A):
    """Maximum absolute row sum.  Works on stacks of blocks and on object arrays."""
    A = np.asarray(A)
    if A.ndim == 1:
        return max(abs(x) for x in A)
    return np.abs(A).sum(axis=-1).max()


def matmul(A, B):
    A = as_cmatrix(A, "A")
    B = as_cmatrix(B, "B")
    if A.shape[1] != B.shape[0]:
        raise DimensionError(f"cannot multiply {A.shape} by {B.shape}")
    return A @ B


def lu_solve(A, B):
    """Solve ``A X = B`` by LU with partial pivoting.

    Raises
    ------
    SingularMatrixError
        If a pivot is exactly zero.
    """
    A = _square(A, "A")
    B = np.asarray(B, dtype=np.complex128)
    vector = B.ndim == 1
    if vector:
        B = B[:, None]
    if B.shape[0] != A.shape[0]:
        raise DimensionError(f"right-hand side has {B.shape[0]} rows, expected {A.shape[0]}")
    lu, piv = _lu_factor(A, SingularMatrixError)
    X = spla.lu_solve((lu, piv), B, check_finite=False)
    return X[:, 0] if vector else X


def _lu_factor(A, error, rel=0.0):
    # scipy only warns on a zero pivot; we want an exception
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", spla.LinAlgWarning)
        lu, piv = spla.lu_factor(A, check_finite=False)
    d = np.abs(np.diag(lu))
    if np.any(d == 0.0) or d.min() <= rel * d.max():
        raise error("matrix is singular to working precision")
    return lu, piv


def hessenberg(A):
    """Householder reduction ``A = Q H Q^H`` with `H` upper Hessenberg."""
    H = _square(A).copy()
    n = H.shape[0]
    Q = np.eye(n, dtype=np.complex128)
    for k in range(n - 2):
        x = H[k + 1:, k]
        if not np.any(x[1:]):
            continue
        alpha = np.linalg.norm(x)
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ H[k + 1:, :])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v.conj())
        Q[:, k + 1:] -= 2.0 * np.outer(Q[:, k + 1:] @ v, v.conj())
        H[k + 2:, k] = 0.0
    return Q, H


@dataclass(frozen=True)
class SchurForm:
    """``A = Q U Q^H`` with `Q` unitary and `U` upper triangular."""

    Q: np.ndarray
    U: np.ndarray
    source_dim: int

    @property
    def eigenvalues(self):
        return np.diag(self.U).copy()

    def reconstruct(self):
        return self.Q @ self.U @ self.Q.conj().T


def _wilkinson_shift(a, b, c, d):
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    mu1 = 0.5 * (a + d) + disc
    mu2 = 0.5 * (a + d) - disc
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def schur(A, max_dim=SCHUR_MAX_DIM, max_sweeps=None):
    """Complex Schur decomposition by shifted QR on the Hessenberg form.

    Wilkinson shifts, with an exceptional shift every tenth iteration spent
    on the same eigenvalue.  A subdiagonal entry is deflated once it drops
    below ``1e-14 * ||H||_inf`` or below machine precision relative to its
    diagonal neighbours.

    Raises
    ------
    ConvergenceError
        After `max_sweeps` QR steps (default ``30 n``) without convergence.
    """
    A = _square(A)
    n = A.shape[0]
    if n > max_dim:
        raise DimensionError(f"dimension {n} exceeds the configured maximum {max_dim}")
    Q, U = hessenberg(A)
    if max_sweeps is None:
        max_sweeps = 30 * n
    eps = np.finfo(float).eps
    tol = 1e-14 * norm_inf(U)
    hi = n - 1
    sweeps = 0
    stuck = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            sub = abs(U[lo, lo - 1])
            if sub <= max(tol, eps * (abs(U[lo, lo]) + abs(U[lo - 1, lo - 1]))):
                U[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            stuck = 0
            continue
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"QR iteration did not converge in {max_sweeps} sweeps")
        sweeps += 1
        stuck += 1
        if stuck % 10 == 0:
            mu = U[hi, hi] + 1.5 * abs(U[hi, hi - 1])
        else:
            mu = _wilkinson_shift(U[hi - 1, hi - 1], U[hi - 1, hi], U[hi, hi - 1], U[hi, hi])

        idx = np.arange(lo, hi + 1)
        U[idx, idx] -= mu
        rotations = []
        for k in range(lo, hi):
            a, b = U[k, k], U[k + 1, k]
            r = np.hypot(abs(a), abs(b))
            if r == 0.0:
                G = np.eye(2, dtype=np.complex128)
            else:
                G = np.array([[np.conj(a), np.conj(b)], [-b, a]]) / r
            U[k:k + 2, k:] = G @ U[k:k + 2, k:]
            rotations.append(G)
        for k, G in zip(range(lo, hi), rotations):
            GH = G.conj().T
            top = min(k + 2, hi) + 1
            U[:top, k:k + 2] = U[:top, k:k + 2] @ GH
            Q[:, k:k + 2] = Q[:, k:k + 2] @ GH
        U[idx, idx] += mu
    U = np.triu(U)
    return SchurForm(Q=Q, U=U, source_dim=n)


def eigenvalues(A):
    """Eigenvalues of `A` (diagonal of its Schur factor), in no canonical order."""
    return schur(A).eigenvalues


def multiset_distance(a, b):
    """Largest pair distance of a greedy minimal-distance matching of two multisets.

    Returns ``inf`` when the sizes differ.
    """
    a = list(np.asarray(a, dtype=complex).ravel())
    b = list(np.asarray(b, dtype=complex).ravel())
    if len(a) != len(b):
        return np.inf
    worst = 0.0
    while a:
        D = np.abs(np.subtract.outer(np.array(a), np.array(b)))
        i, j = np.unravel_index(np.argmin(D), D.shape)
        worst = max(worst, D[i, j])
        a.pop(i)
        b.pop(j)
    return worst


class SylvesterSolver:
    """Solve ``A X + X B = D`` for many right-hand sides.

    With the Bartels-Stewart strategy the Schur forms of `A` and `B` are
    computed once in the constructor; with the Kronecker strategy the LU
    factors of ``I (x) A + B^T (x) I`` are.
    """

    def __init__(self, A, B, strategy=BARTELS_STEWART):
        self.A = _square(A, "A")
        self.B = _square(B, "B")
        self.strategy = strategy
        m, n = self.A.shape[0], self.B.shape[0]
        scale = max(norm_inf(self.A) + norm_inf(self.B), np.finfo(float).tiny)
        if strategy == BARTELS_STEWART:
            self._sa = schur(self.A)
            self._sb = schur(self.B)
            ea, eb = self._sa.eigenvalues, self._sb.eigenvalues
        elif strategy == KRONECKER:
            if m * n > KRON_MAX:
                raise StrategyError(f"Kronecker system of size {m * n} exceeds cap {KRON_MAX}")
            ea, eb = eigenvalues(self.A), eigenvalues(self.B)
            K = np.kron(np.eye(n), self.A) + np.kron(self.B.T, np.eye(m))
            self._lu = _lu_factor(K, IllPosedError)
        else:
            raise StrategyError(f"unknown strategy {strategy!r}")
        gap = np.abs(np.add.outer(ea, eb)).min()
        if gap <= SPECTRA_TOL * scale:
            raise IllPosedError(f"spectra of A and -B intersect (gap {gap:.3e})")

    def solve(self, D):
        D = as_cmatrix(D, "D")
        m, n = self.A.shape[0], self.B.shape[0]
        if D.shape != (m, n):
            raise DimensionError(f"D has shape {D.shape}, expected {(m, n)}")
        if self.strategy == KRONECKER:
            x = spla.lu_solve(self._lu, D.reshape(-1, order="F"), check_finite=False)
            return x.reshape((m, n), order="F")
        Qa, Ua = self._sa.Q, self._sa.U
        Qb, Ub = self._sb.Q, self._sb.U
        F = Qa.conj().T @ D @ Qb
        Z = np.empty_like(F)
        Im = np.eye(m)
        for j in range(n):
            rhs = F[:, j] - Z[:, :j] @ Ub[:j, j]
            Z[:, j] = spla.solve_triangular(Ua + Ub[j, j] * Im, rhs, check_finite=False)
        return Qa @ Z @ Qb.conj().T


@dataclass(frozen=True)
class SylvesterProblem:
    """Coefficients of ``A X + X B = D`` and the strategy used to solve it."""

    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    strategy: str = BARTELS_STEWART

    def solve(self):
        return SylvesterSolver(self.A, self.B, self.strategy).solve(self.D)

    def residual(self, X):
        return norm_inf(self.A @ X + X @ self.B - self.D)


def sylvester_solve(A, B, D, strategy=BARTELS_STEWART):
    """Solve ``A X + X B = D``.

    Parameters
    ----------
    strategy : {"bartels-stewart", "kronecker"}
        Kronecker assembles the ``mn x mn`` system and is only allowed for
        ``m n <= 4096``.

    Raises
    ------
    IllPosedError
        If the spectra of `A` and ``-B`` intersect.
    StrategyError
        For an unknown strategy or an oversized Kronecker system.
    """
    return SylvesterSolver(A, B, strategy).solve(D)


class GeneralizedSylvesterSolver:
    """Solve ``A1 X B1 + A2 X = D`` through the vectorized system.

    The ``n^2 x n^2`` matrix ``B1^T (x) A1 + I (x) A2`` is factorized once.
    """

    def __init__(self, A1, B1, A2):
        self.A1 = _square(A1, "A1")
        self.B1 = _square(B1, "B1")
        self.A2 = _square(A2, "A2")
        n = self.A1.shape[0]
        if self.B1.shape[0] != n or self.A2.shape[0] != n:
            raise DimensionError("A1, B1, A2 must share one dimension")
        if n * n > KRON_MAX:
            raise StrategyError(f"Kronecker system of size {n * n} exceeds cap {KRON_MAX}")
        self.n = n
        K = np.kron(self.B1.T, self.A1) + np.kron(np.eye(n), self.A2)
        self._lu = _lu_factor(K, IllPosedError, rel=1e-14)

    def solve(self, D):
        D = as_cmatrix(D, "D")
        if D.shape != (self.n, self.n):
            raise DimensionError(f"D has shape {D.shape}, expected {(self.n, self.n)}")
        x = spla.lu_solve(self._lu, D.reshape(-1, order="F"), check_finite=False)
        return x.reshape((self.n, self.n), order="F")


def generalized_sylvester_kron(A1, B1, A2, D):
    """Solve ``A1 X B1 + A2 X = D`` (all ``n x n``, ``n^2 <= 4096``)."""
    return GeneralizedSylvesterSolver(A1, B1, A2).solve(D)
