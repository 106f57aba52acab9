import numpy as np
import pytest

from monosplit.numkit import (DimensionError, NormEstimationError, SparseMatrix,
                              as_vector, axpy, dot, norm, operator_norm, spmv)
from monosplit.bench import build_chain_matrix


def test_dot_norm_axpy_examples():
    assert dot([1, 2], [3, 4]) == 11.0
    assert norm([3, 4]) == 5.0
    assert np.array_equal(axpy(2.0, [1, 0], [0, 1]), [2.0, 1.0])


def test_length_mismatch_raises():
    with pytest.raises(DimensionError):
        dot([1, 2], [1, 2, 3])
    with pytest.raises(DimensionError):
        axpy(1.0, [1, 2, 3], [1, 2])


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        as_vector([1.0, np.nan])
    with pytest.raises(ValueError):
        as_vector([np.inf, 0.0])


def test_dot_symmetry_and_bilinearity():
    rng = np.random.default_rng(0)
    for _ in range(50):
        u = rng.standard_normal(17)
        v = rng.standard_normal(17)
        w = rng.standard_normal(17)
        a, b = rng.standard_normal(2)
        assert dot(u, v) == pytest.approx(dot(v, u), rel=1e-12)
        assert dot(a * u + b * w, v) == pytest.approx(
            a * dot(u, v) + b * dot(w, v), rel=1e-12, abs=1e-12)


def test_sparse_matrix_validation():
    with pytest.raises(ValueError):
        SparseMatrix(2, 2, [(0, 0, 1.0), (0, 0, 2.0)])  # duplicate coordinate
    with pytest.raises(DimensionError):
        SparseMatrix(2, 2, [(2, 0, 1.0)])
    with pytest.raises(DimensionError):
        SparseMatrix(0, 2, [])
    m = SparseMatrix(2, 3, [(0, 0, 1.0), (1, 2, 0.0)])  # explicit zero kept
    assert m.nnz == 2


def test_spmv_chain3_against_dense_oracle():
    A = build_chain_matrix(3)
    dense = A.toarray()
    expected = np.array([[0, -1, 1], [-1, 1, 0], [1, 0, 0]]) / 4.0
    assert np.array_equal(dense, expected)
    x = np.array([1.0, 1.0, 1.0])
    assert np.allclose(spmv(A, x), dense @ x, rtol=0, atol=0)
    assert np.array_equal(spmv(A, x), [0.0, 0.0, 0.25])
    assert np.array_equal(spmv(A, [1.0, 0.0, 0.0], transpose=True), [0.0, -0.25, 0.25])


def test_spmv_identity_and_dims():
    I = SparseMatrix.identity(4)
    x = np.arange(4.0)
    assert np.array_equal(spmv(I, x), x)
    with pytest.raises(DimensionError):
        spmv(I, np.ones(5))
    rect = SparseMatrix(2, 3, [(0, 1, 2.0)])
    with pytest.raises(DimensionError):
        spmv(rect, np.ones(2))          # needs length 3
    with pytest.raises(DimensionError):
        spmv(rect, np.ones(3), transpose=True)  # needs length 2


def test_adjoint_identity_random():
    rng = np.random.default_rng(1)
    for trial in range(20):
        rows, cols = rng.integers(2, 12, size=2)
        nnz = int(rng.integers(1, rows * cols + 1))
        keys = rng.choice(rows * cols, size=nnz, replace=False)
        triples = [(int(k // cols), int(k % cols), float(rng.standard_normal()))
                   for k in keys]
        A = SparseMatrix(int(rows), int(cols), triples)
        x = rng.standard_normal(cols)
        y = rng.standard_normal(rows)
        lhs = float(np.dot(A.matvec(x), y))
        rhs = float(np.dot(x, A.rmatvec(y)))
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_operator_norm_identity_and_diagonal():
    assert operator_norm(SparseMatrix.identity(5)) == pytest.approx(1.0, abs=1e-12)
    assert operator_norm(SparseMatrix.diagonal([1.0, 2.0, 3.0])) == pytest.approx(
        3.0, abs=1e-10)


def test_operator_norm_zero_matrix():
    assert operator_norm(SparseMatrix(3, 3, [])) == 0.0


def test_operator_norm_against_dense_svd_oracle():
    rng = np.random.default_rng(2)
    for trial in range(5):
        n = int(rng.integers(3, 15))
        triples = [(i, j, float(rng.standard_normal()))
                   for i in range(n) for j in range(n) if rng.random() < 0.4]
        if not triples:
            triples = [(0, 0, 1.0)]
        A = SparseMatrix(n, n, triples)
        oracle = np.linalg.norm(A.toarray(), 2)
        est = operator_norm(A, tol=1e-12, max_iter=200000)
        assert est == pytest.approx(oracle, rel=1e-9, abs=1e-12)


def test_operator_norm_chain200_oracle_and_bound():
    A = build_chain_matrix(200)
    oracle = np.linalg.norm(A.toarray(), 2)
    est = operator_norm(A, tol=1e-12, max_iter=2_000_000)
    assert est == pytest.approx(oracle, rel=1e-8)
    rng = np.random.default_rng(3)
    for _ in range(100):
        x = rng.standard_normal(200)
        assert np.linalg.norm(A.matvec(x)) <= est * (1 + 1e-8) * np.linalg.norm(x)


def test_operator_norm_budget_exhaustion():
    # the chain spectrum clusters at the top; the default budget cannot
    # certify it and must fail loudly with the running estimate attached
    A = build_chain_matrix(200)
    with pytest.raises(NormEstimationError) as err:
        operator_norm(A, tol=1e-10, max_iter=100)
    assert 0.0 < err.value.estimate <= 0.51
    assert err.value.gap > 0.0


def test_operator_norm_scaling():
    A = build_chain_matrix(40)
    tol = 1e-11
    base = operator_norm(A, tol=tol, max_iter=500000)
    scaled = operator_norm(A.scaled(-2.5), tol=tol, max_iter=500000)
    assert scaled == pytest.approx(2.5 * base, rel=2 * tol + 1e-9)


@pytest.mark.slow
def test_operator_norm_chain1000_two_paths_agree():
    # independent second path: power iteration on the transpose (same
    # spectral norm, different iteration matrix A A^T)
    A = build_chain_matrix(1000)
    coo = A.tocsr().tocoo()
    At = SparseMatrix(1000, 1000, zip(coo.col, coo.row, coo.data))
    s1 = operator_norm(A, tol=1e-12, max_iter=5_000_000)
    s2 = operator_norm(At, tol=1e-12, max_iter=5_000_000)
    assert abs(s1 - s2) <= 1e-12 * s1 + 1e-13
    assert 0.49 < s1 < 0.5
