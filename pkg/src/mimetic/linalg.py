"""Linear algebra: Jacobi-preconditioned CG, sparse LU, dense eigen/SVD tools."""

from __future__ import annotations

import logging
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from src.mimetic.config import settings
from src.mimetic.errors import (
    InvalidArgumentError,
    InvalidMatrixError,
    ProblemTooLargeError,
    SolverError,
)
from src.mimetic.fem.assembly import SparseMatrix
from src.mimetic.models import SolveReport

logger = logging.getLogger(__name__)

MatrixLike = Union[SparseMatrix, sps.spmatrix, np.ndarray]


def _as_operator(A: MatrixLike):
    if isinstance(A, SparseMatrix):
        return A.csr
    return A


def _dense(A: MatrixLike) -> np.ndarray:
    if isinstance(A, SparseMatrix):
        return A.toarray()
    if sps.issparse(A):
        return A.toarray()
    return np.asarray(A, dtype=float)


# ---------------------------------------------------------------------------
# Iterative solve
# ---------------------------------------------------------------------------

def cg_solve(
    A: MatrixLike,
    b: np.ndarray,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    *,
    x0: Optional[np.ndarray] = None,
    callback: Optional[Callable[[np.ndarray], None]] = None,
) -> tuple[np.ndarray, SolveReport]:
    """Solve A x = b for symmetric positive definite A with Jacobi-PCG.

    Converged means ||b - A x|| <= tol * ||b||.  `callback` receives each
    iterate.
    """
    tol = settings.solver.cg_tol if tol is None else tol
    max_iter = settings.solver.cg_max_iter if max_iter is None else max_iter
    if isinstance(A, SparseMatrix) and not A.symmetric:
        raise InvalidMatrixError("cg_solve needs a symmetric matrix")

    op = _as_operator(A)
    b = np.asarray(b, dtype=float)
    n = op.shape[0]
    if op.shape != (n, n) or b.shape != (n,):
        raise InvalidArgumentError(f"matrix {op.shape} and right-hand side {b.shape} disagree")

    diag = op.diagonal() if hasattr(op, "diagonal") else np.diag(op)
    if np.any(diag == 0.0):
        raise InvalidMatrixError("zero diagonal entry; Jacobi preconditioner undefined")
    inv_diag = 1.0 / diag

    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros(n), SolveReport(iterations=0, residual=0.0, converged=True)

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - op @ x
    z = inv_diag * r
    d = z.copy()
    rz = float(r @ z)
    threshold = tol * b_norm
    res = float(np.linalg.norm(r))
    k = 0
    while res > threshold and k < max_iter:
        Ad = op @ d
        alpha = rz / float(d @ Ad)
        x += alpha * d
        r -= alpha * Ad
        k += 1
        if callback is not None:
            callback(x)
        res = float(np.linalg.norm(r))
        if res <= threshold:
            break
        z = inv_diag * r
        rz_new = float(r @ z)
        d = z + (rz_new / rz) * d
        rz = rz_new

    true_res = float(np.linalg.norm(b - op @ x)) / b_norm
    report = SolveReport(iterations=k, residual=true_res, converged=res <= threshold)
    if not report.converged:
        logger.warning("CG stalled after %d iterations (residual %.3e)", k, true_res)
        raise SolverError(
            f"CG did not converge in {max_iter} iterations (residual {true_res:.3e})",
            report,
        )
    logger.debug("CG converged in %d iterations (residual %.3e)", k, true_res)
    return x, report


def solve_mass(A: MatrixLike, b: np.ndarray) -> np.ndarray:
    """CG solve at the configured tolerance, discarding the report."""
    x, _ = cg_solve(A, b)
    return x


# ---------------------------------------------------------------------------
# Direct solve
# ---------------------------------------------------------------------------

class Factorization:
    """Sparse LU of a square matrix, reusable across right-hand sides."""

    def __init__(self, A: MatrixLike) -> None:
        op = _as_operator(A)
        csc = sps.csc_matrix(op, dtype=float)
        if csc.shape[0] != csc.shape[1]:
            raise InvalidArgumentError(f"cannot factorise a {csc.shape} matrix")
        try:
            self._lu = spla.splu(csc)
        except RuntimeError as exc:
            raise InvalidMatrixError(f"matrix is singular: {exc}") from exc
        self.shape = csc.shape

    def solve(self, b: np.ndarray) -> np.ndarray:
        return self._lu.solve(np.asarray(b, dtype=float))

    __call__ = solve


def factorized(A: MatrixLike) -> Factorization:
    return Factorization(A)


# ---------------------------------------------------------------------------
# Dense eigenanalysis
# ---------------------------------------------------------------------------

def _check_cap(n: int, dense_cap: Optional[int]) -> None:
    cap = settings.diagnostics.dense_cap if dense_cap is None else dense_cap
    if n > cap:
        raise ProblemTooLargeError(f"dense problem of size {n} exceeds the cap {cap}")


def constant_complement(gram: np.ndarray) -> np.ndarray:
    """Orthonormal basis of vectors gram-orthogonal to the constant vector."""
    ones = np.ones(gram.shape[0])
    return sla.null_space((gram @ ones)[None, :])


def smallest_generalized_eigs(
    A: MatrixLike,
    Bmat: MatrixLike,
    k: Optional[int] = None,
    *,
    deflate_constant: bool = False,
    dense_cap: Optional[int] = None,
    return_vectors: bool = False,
):
    """Smallest k eigenvalues of A v = λ Bmat v, ascending.

    With `deflate_constant` the problem is restricted to vectors
    Bmat-orthogonal to the constant vector.
    """
    a, bm = _dense(A), _dense(Bmat)
    n = a.shape[0]
    if a.shape != (n, n) or bm.shape != (n, n):
        raise InvalidArgumentError(f"pencil shapes {a.shape} and {bm.shape} disagree")
    _check_cap(n, dense_cap)

    basis = constant_complement(bm) if deflate_constant else np.eye(n)
    a_r = basis.T @ a @ basis
    b_r = basis.T @ bm @ basis
    m = a_r.shape[0]
    count = m if k is None else min(k, m)
    try:
        vals, vecs = sla.eigh(
            0.5 * (a_r + a_r.T), 0.5 * (b_r + b_r.T), subset_by_index=[0, count - 1],
        )
    except np.linalg.LinAlgError as exc:
        raise InvalidMatrixError(f"pencil matrix is not positive definite: {exc}") from exc
    if return_vectors:
        return vals, basis @ vecs
    return vals


def _inverse_sqrt(gram: np.ndarray, rank_rtol: float) -> np.ndarray:
    """Columns V_r Λ_r^{-1/2} spanning the range of a PSD gram matrix."""
    vals, vecs = sla.eigh(0.5 * (gram + gram.T))
    top = vals.max() if vals.size else 0.0
    if top <= 0.0:
        raise InvalidMatrixError("gram matrix has no positive spectrum")
    keep = vals > rank_rtol * top
    return vecs[:, keep] / np.sqrt(vals[keep])


def whitened_singular_values(
    pairing: MatrixLike,
    row_gram: MatrixLike,
    col_gram: MatrixLike,
    *,
    deflate_constant: bool = False,
    rank_rtol: Optional[float] = None,
    dense_cap: Optional[int] = None,
) -> np.ndarray:
    """Singular values of the pairing in the row/column gram metrics, ascending.

    Their squares are the eigenvalues of P K⁺ Pᵀ r = λ M r, with M the row
    gram (positive definite, optionally restricted to the complement of
    constants) and K⁺ the spectral pseudo-inverse of the column gram.
    """
    rank_rtol = settings.diagnostics.rank_rtol if rank_rtol is None else rank_rtol
    p, m, kg = _dense(pairing), _dense(row_gram), _dense(col_gram)
    _check_cap(max(p.shape), dense_cap)
    if m.shape[0] != p.shape[0] or kg.shape[0] != p.shape[1]:
        raise InvalidArgumentError(
            f"pairing {p.shape} does not match grams {m.shape} and {kg.shape}"
        )

    if deflate_constant:
        basis = constant_complement(m)
        p = basis.T @ p
        m = basis.T @ m @ basis
    try:
        chol = sla.cholesky(0.5 * (m + m.T), lower=True)
    except np.linalg.LinAlgError as exc:
        raise InvalidMatrixError(f"row gram is not positive definite: {exc}") from exc
    right = _inverse_sqrt(kg, rank_rtol)
    whitened = sla.solve_triangular(chol, p @ right, lower=True)
    sigma = sla.svdvals(whitened)
    # rows beyond the column rank have zero singular value
    if sigma.size < whitened.shape[0]:
        sigma = np.concatenate([sigma, np.zeros(whitened.shape[0] - sigma.size)])
    return np.sort(sigma)
