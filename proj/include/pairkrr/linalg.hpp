#pragma once

#include "pairkrr/dense_matrix.hpp"

#include <vector>

namespace pairkrr {

/// C = A * B. Parallelized over rows of C; per-entry accumulation order is
/// fixed, so results are identical across backends.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// C = A^T * B without materializing the transpose.
DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b);
/// C = A * B^T without materializing the transpose.
DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& a);

/// Spectral factorization S = W diag(values) W^T of a symmetric matrix.
/// Eigenvalues are stored in descending order; W columns are the matching
/// orthonormal eigenvectors.
struct EigenDecomposition {
    DenseMatrix vectors;        // n x n, column k is the k-th eigenvector
    std::vector<double> values; // length n, descending

    std::size_t dim() const { return values.size(); }
    /// W diag(values) W^T.
    DenseMatrix reconstruct() const;
};

/// Householder tridiagonalization followed by implicit-shift QL iteration.
/// Rejects non-square input and asymmetry beyond 1e-10 * max|S|.
EigenDecomposition sym_eig(const DenseMatrix& s);

/// LU factorization with partial pivoting, kept for dense reference solves.
struct LuFactors {
    DenseMatrix lu;
    std::vector<std::size_t> perm;
};

/// Throws numeric_error when the matrix is singular to working precision.
LuFactors lu_factor(const DenseMatrix& a);
std::vector<double> lu_solve(const LuFactors& f, const std::vector<double>& rhs);
/// Solves A X = B column by column.
DenseMatrix lu_solve(const DenseMatrix& a, const DenseMatrix& b);

} // namespace pairkrr
