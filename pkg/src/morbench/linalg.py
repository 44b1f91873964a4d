"""Dense linear-algebra kernels for the reduction methods and the analyzer.

Three primitives are provided:

* LU factorization with partial pivoting and explicit singularity
  detection (real or complex), wrapping LAPACK via SciPy;
* a pivoted, rank-revealing Cholesky factorization for symmetric
  positive-semidefinite matrices, used for Gramian factors and column
  compression;
* a one-sided Jacobi SVD, which drives the Hankel singular values of the
  balancing step and needs no Hessenberg/QR machinery.

Complex arithmetic is supported only in the LU path (transfer-function
evaluation at s = i*omega); the other kernels are real-only.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import DimensionMismatch, NonFinite, NotPSD, SingularMatrix

#: Relative pivot threshold below which a matrix counts as singular.
PIVOT_TOL = 1e-13

#: Default relative rank tolerance of the semidefinite Cholesky.
RANK_TOL = 1e-12


@dataclass(frozen=True)
class LuFactorization:
    """Packed LU factors (PA = LU) reusable for repeated solves."""

    factors: np.ndarray
    pivots: np.ndarray
    is_complex: bool

    @property
    def n(self):
        return self.factors.shape[0]


def lu_factor(m):
    """Factor a square matrix as PA = LU with partial pivoting.

    Parameters
    ----------
    m
        Square matrix, real or complex.

    Returns
    -------
    LuFactorization
        Reusable factorization.

    Raises
    ------
    SingularMatrix
        If any pivot magnitude falls below ``PIVOT_TOL * max|m|``.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got shape {m.shape}")
    is_complex = np.iscomplexobj(m)
    scale = np.max(np.abs(m)) if m.size else 0.0
    if not np.isfinite(scale):
        raise NonFinite("matrix contains non-finite entries")
    if m.shape[0] == 0:
        empty = np.empty((0, 0), dtype=complex if is_complex else float)
        return LuFactorization(empty, np.empty(0, dtype=np.int32), is_complex)
    if scale == 0.0:
        raise SingularMatrix("matrix is identically zero")
    with warnings.catch_warnings():
        # singularity is detected from the pivots below and raised as an error
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        factors, pivots = scipy.linalg.lu_factor(m, check_finite=False)
    if np.min(np.abs(np.diag(factors))) < PIVOT_TOL * scale:
        raise SingularMatrix(
            f"pivot below {PIVOT_TOL:g} * max|M|; matrix is numerically singular")
    return LuFactorization(factors, pivots, is_complex)


def solve(f, b):
    """Solve M X = B for X given the factorization of M.

    ``b`` may be a vector or a matrix with as many rows as M has; the
    result has the same shape. Complex right-hand sides are allowed with
    real factors and vice versa.
    """
    b = np.asarray(b)
    rows = b.shape[0] if b.ndim else 0
    if rows != f.n:
        raise DimensionMismatch(f"rhs has {rows} rows, factorization has order {f.n}")
    if f.n == 0:
        return b.copy()
    return scipy.linalg.lu_solve((f.factors, f.pivots), b, check_finite=False)


def log_abs_det(f):
    """log |det M| from the LU diagonal, safe against overflow."""
    if f.n == 0:
        return 0.0
    return float(np.sum(np.log(np.abs(np.diag(f.factors)))))


def cholesky_psd(s, rank_tol=RANK_TOL):
    """Pivoted Cholesky factorization of a symmetric PSD matrix.

    Computes a lower-trapezoidal ``L`` (n x k) with ``L @ L.T ~= S`` where
    k is the revealed numerical rank: the factorization stops once the
    largest remaining diagonal entry drops below ``rank_tol`` times the
    largest initial diagonal entry. The input is symmetrized as
    ``(S + S.T) / 2`` before factoring.

    Returns
    -------
    (L, k)
        The factor and its numerical rank.

    Raises
    ------
    NotPSD
        If a pivot is more negative than ``-rank_tol`` times the largest
        initial diagonal entry, i.e. the matrix is indefinite.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise NonFinite("matrix contains non-finite entries")
    n = s.shape[0]
    w = 0.5 * (s + s.T)
    perm = np.arange(n)
    max_diag = max(float(np.max(np.diag(w), initial=0.0)), 0.0)
    rank = n
    for k in range(n):
        d = np.diagonal(w)[k:]
        j = int(np.argmax(d)) + k
        pivot = w[j, j]
        if pivot < -rank_tol * max_diag:
            raise NotPSD(f"pivot {pivot:.3e} at step {k} is negative beyond tolerance")
        if pivot <= rank_tol * max_diag or pivot <= 0.0:
            rank = k
            break
        if j != k:
            w[[k, j], :] = w[[j, k], :]
            w[:, [k, j]] = w[:, [j, k]]
            perm[[k, j]] = perm[[j, k]]
        root = np.sqrt(pivot)
        w[k, k] = root
        w[k + 1:, k] /= root
        w[k, k + 1:] = 0.0
        w[k + 1:, k + 1:] -= np.outer(w[k + 1:, k], w[k + 1:, k])
    ltri = np.tril(w)[:, :rank]
    out = np.zeros_like(ltri)
    out[perm, :] = ltri
    return out, rank


def jacobi_svd(m, tol=1e-14, max_sweeps=60):
    """Singular value decomposition by one-sided Jacobi rotations.

    Rotates column pairs of a working copy until all columns are mutually
    orthogonal, which yields ``m = U @ diag(sigma) @ V.T`` with thin
    ``U`` (p x k), non-increasing nonnegative ``sigma`` (length k) and
    ``V`` (r x k), k = min(p, r). Wide inputs are transposed internally.

    Always converges for finite input; raises :class:`NonFinite` for
    NaN/Inf entries. Column norms are tracked incrementally and pairs whose
    normalized inner product is below ``tol`` are skipped, so late sweeps
    cost one matrix-vector product per column.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatch("input must be a 2-d matrix")
    if not np.all(np.isfinite(m)):
        raise NonFinite("matrix contains non-finite entries")
    p, r = m.shape
    if p == 0 or r == 0:
        k = min(p, r)
        return np.zeros((p, k)), np.zeros(k), np.zeros((r, k))
    transposed = p < r
    if transposed:
        m = m.T
        p, r = r, p
    w = np.array(m, order="F")
    v = np.eye(r, order="F")
    sq = np.einsum("ij,ij->j", w, w)
    for _ in range(max_sweeps):
        rotated = False
        for i in range(r - 1):
            # one matvec gives the inner products of column i with all later
            # columns; entries go stale after a rotation in this row, but a
            # fresh product is taken before each rotation and a clean sweep
            # (no rotations anywhere) certifies convergence with exact values
            cvec = w[:, i] @ w[:, i + 1:]
            for j in range(i + 1, r):
                a = sq[i]
                b = sq[j]
                if a == 0.0 or b == 0.0:
                    continue
                c = cvec[j - i - 1]
                if abs(c) <= tol * np.sqrt(a * b):
                    continue
                c = float(w[:, i] @ w[:, j])
                if abs(c) <= tol * np.sqrt(a * b):
                    continue
                rotated = True
                tau = (b - a) / (2.0 * c)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau)) if tau else 1.0
                cs = 1.0 / np.sqrt(1.0 + t * t)
                sn = cs * t
                wi = cs * w[:, i] - sn * w[:, j]
                w[:, j] = sn * w[:, i] + cs * w[:, j]
                w[:, i] = wi
                vi = cs * v[:, i] - sn * v[:, j]
                v[:, j] = sn * v[:, i] + cs * v[:, j]
                v[:, i] = vi
                # rotation annihilating the Gram entry shifts the norms by t*c
                sq[i] = max(a - t * c, 0.0)
                sq[j] = b + t * c
        if not rotated:
            break
        sq = np.einsum("ij,ij->j", w, w)
    sigma = np.sqrt(np.einsum("ij,ij->j", w, w))
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    w = w[:, order]
    v = v[:, order]
    u = np.zeros_like(w)
    nonzero = sigma > 0.0
    u[:, nonzero] = w[:, nonzero] / sigma[nonzero]
    for idx in np.flatnonzero(~nonzero):
        u[:, idx] = _orthonormal_fill(u[:, :idx], p)
    if transposed:
        return v, sigma, u
    return u, sigma, v


def _orthonormal_fill(u, p):
    """Deterministic unit vector orthogonal to the columns of u."""
    for basis in range(p):
        vec = np.zeros(p)
        vec[basis] = 1.0
        vec -= u @ (u.T @ vec)
        norm = np.linalg.norm(vec)
        if norm > 0.5:
            return vec / norm
    raise DimensionMismatch("cannot extend orthonormal basis")  # pragma: no cover
