#pragma once

#include "pairkrr/dense_matrix.hpp"

#include <vector>

namespace pairkrr {

/// Column-stacking vectorization: out[j*rows + i] = M(i, j).
std::vector<double> vec(const DenseMatrix& m);

/// Inverse of vec. Throws std::invalid_argument on length mismatch.
DenseMatrix unvec(const std::vector<double>& v, std::size_t rows, std::size_t cols);

/// Kronecker product A (x) B, block layout a_ij * B.
DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b);

/// M * X * N, the materialization-free form of (N^T (x) M) vec(X).
DenseMatrix apply_kron_vec(const DenseMatrix& n, const DenseMatrix& m, const DenseMatrix& x);

} // namespace pairkrr
