#pragma once

#include "pairkrr/dense_matrix.hpp"

namespace pairkrr {

/// Structured (mq)x(mq) matrix a1*(Iq x Im) + a2*(Jq x Im) + a3*(Iq x Jm) + a4*(Jq x Jm),
/// where x is the Kronecker product, I the identity and J the all-ones matrix.
/// m indexes instances (rows of the label matrix), q tasks (columns); the
/// Kronecker ordering matches column-stacking vectorization of an m x q matrix.
struct SmootherMatrix {
    double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
    std::size_t m = 0, q = 0;

    static SmootherMatrix identity_coeffs(std::size_t m, std::size_t q) { return {1.0, 0.0, 0.0, 0.0, m, q}; }
};

/// Closed-form product; the family is closed under multiplication.
SmootherMatrix smoother_mul(const SmootherMatrix& a, const SmootherMatrix& b);

/// Closed-form inverse via the four joint eigenvalues
/// a1, a1 + q*a2, a1 + m*a3, a1 + q*a2 + m*a3 + m*q*a4.
/// Throws numeric_error when any of them is below 1e-12 * max|ai| in magnitude.
SmootherMatrix smoother_inv(const SmootherMatrix& a);

/// Materializes the (mq)x(mq) matrix. Guarded by densification_cap().
DenseMatrix smoother_to_dense(const SmootherMatrix& a);

} // namespace pairkrr
