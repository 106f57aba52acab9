"""Minimal dense/sparse linear algebra and spectral-norm estimation.

Vectors are plain 1-D ``numpy.float64`` arrays throughout the package;
:func:`as_vector` is the validating boundary. Sparse matrices are fixed
coordinate data held in CSR form (scipy does the heavy lifting), with
transpose application through a shared-data CSC view.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as _sparse

__all__ = [
    "DimensionError",
    "NormEstimationError",
    "as_vector",
    "dot",
    "norm",
    "axpy",
    "SparseMatrix",
    "spmv",
    "operator_norm",
]


class DimensionError(ValueError):
    """Operands have incompatible dimensions."""


class NormEstimationError(RuntimeError):
    """Power iteration did not converge within its iteration budget."""

    def __init__(self, message: str, estimate: float, gap: float):
        super().__init__(message)
        self.estimate = estimate
        self.gap = gap


def as_vector(x, name: str = "x") -> np.ndarray:
    """Validate and convert to a finite 1-D float64 array."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1 or v.size < 1:
        raise DimensionError(f"{name} must be a 1-D vector with length >= 1, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def _check_same_length(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape[0] != v.shape[0]:
        raise DimensionError(f"length mismatch: {u.shape[0]} vs {v.shape[0]}")


def dot(u, v) -> float:
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    _check_same_length(u, v)
    return float(np.dot(u, v))


def norm(u) -> float:
    u = as_vector(u, "u")
    return float(np.linalg.norm(u))


def axpy(a: float, u, v) -> np.ndarray:
    """Return ``a*u + v``."""
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    _check_same_length(u, v)
    return a * u + v


class SparseMatrix:
    """Real sparse matrix built from coordinate triples, applied in CSR form.

    Duplicate coordinates are rejected; explicit zeros are kept. The
    transpose is applied through a CSC view sharing the CSR buffers, so no
    transposed copy is ever materialized.
    """

    def __init__(self, rows: int, cols: int, triples):
        if rows < 1 or cols < 1:
            raise DimensionError("matrix dimensions must be positive")
        triples = list(triples)
        if triples:
            r = np.asarray([t[0] for t in triples], dtype=np.int64)
            c = np.asarray([t[1] for t in triples], dtype=np.int64)
            vals = np.asarray([t[2] for t in triples], dtype=np.float64)
        else:
            r = np.zeros(0, dtype=np.int64)
            c = np.zeros(0, dtype=np.int64)
            vals = np.zeros(0, dtype=np.float64)
        if r.size and (r.min() < 0 or r.max() >= rows or c.min() < 0 or c.max() >= cols):
            raise DimensionError("coordinate index out of range")
        if not np.all(np.isfinite(vals)):
            raise ValueError("matrix values must be finite")
        keys = r * cols + c
        if np.unique(keys).size != keys.size:
            raise ValueError("duplicate coordinates are forbidden")
        coo = _sparse.coo_matrix((vals, (r, c)), shape=(rows, cols))
        self._csr = coo.tocsr()
        self._csr.sort_indices()
        self._csc_view = self._csr.T  # shares data with _csr
        self.shape = (rows, cols)
        self.nnz = int(vals.size)

    @classmethod
    def from_scipy(cls, mat) -> "SparseMatrix":
        coo = _sparse.coo_matrix(mat)
        coo.sum_duplicates()
        return cls(coo.shape[0], coo.shape[1], zip(coo.row, coo.col, coo.data))

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, [(i, i, 1.0) for i in range(n)])

    @classmethod
    def diagonal(cls, diag) -> "SparseMatrix":
        d = as_vector(diag, "diag")
        return cls(d.size, d.size, [(i, i, float(d[i])) for i in range(d.size)])

    def matvec(self, x: np.ndarray) -> np.ndarray:
        if x.shape[0] != self.shape[1]:
            raise DimensionError(f"matvec: expected length {self.shape[1]}, got {x.shape[0]}")
        return self._csr @ x

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        """Apply the transpose without materializing it."""
        if x.shape[0] != self.shape[0]:
            raise DimensionError(f"rmatvec: expected length {self.shape[0]}, got {x.shape[0]}")
        return self._csc_view @ x

    def scaled(self, a: float) -> "SparseMatrix":
        coo = (self._csr * float(a)).tocoo()
        return SparseMatrix(self.shape[0], self.shape[1], zip(coo.row, coo.col, coo.data))

    def toarray(self) -> np.ndarray:
        return self._csr.toarray()

    def tocsr(self):
        return self._csr

    def __repr__(self):
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"


def spmv(A: SparseMatrix, x, transpose: bool = False) -> np.ndarray:
    """Sparse matrix-vector product ``A x`` (or ``A^T x``)."""
    x = as_vector(x, "x")
    return A.rmatvec(x) if transpose else A.matvec(x)


def operator_norm(A: SparseMatrix, tol: float = 1e-10, max_iter: int = 10000) -> float:
    """Estimate the spectral norm by power iteration on ``A^T A``.

    Deterministic all-ones start. The iteration stops once successive
    estimates agree to ``0.01 * tol`` relative (the safety factor guards
    against premature stops on clustered spectra, where increments shrink
    much faster than the true error). Raises :class:`NormEstimationError`
    with the last estimate when the budget is exhausted.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = A.shape[1]
    x = np.full(n, 1.0 / math.sqrt(n))
    sigma = 0.0
    for _ in range(max_iter):
        y = A.matvec(x)
        z = A.rmatvec(y)
        nz = float(np.linalg.norm(z))
        sigma_new = float(np.linalg.norm(y))  # Rayleigh estimate: ||Ax|| with ||x|| = 1
        if nz == 0.0:
            return 0.0
        gap = abs(sigma_new - sigma)
        sigma = sigma_new
        x = z / nz
        if gap <= 0.01 * tol * max(sigma, np.finfo(float).tiny):
            return sigma
    raise NormEstimationError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(last estimate {sigma:.17g}, last gap {gap:.3g})",
        estimate=sigma,
        gap=gap,
    )
