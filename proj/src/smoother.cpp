#include "pairkrr/smoother.hpp"

#include "pairkrr/common.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pairkrr {

namespace {
void require_same_grid(const SmootherMatrix& a, const SmootherMatrix& b, const char* op) {
    if (a.m != b.m || a.q != b.q)
        throw std::invalid_argument(std::string(op) + ": (m,q) mismatch (" + std::to_string(a.m) + "," +
                                    std::to_string(a.q) + ") vs (" + std::to_string(b.m) + "," +
                                    std::to_string(b.q) + ")");
}
} // namespace

SmootherMatrix smoother_mul(const SmootherMatrix& a, const SmootherMatrix& b) {
    require_same_grid(a, b, "smoother_mul");
    const double m = static_cast<double>(a.m), q = static_cast<double>(a.q);
    SmootherMatrix c{0.0, 0.0, 0.0, 0.0, a.m, a.q};
    // J_q^2 = q*J_q and J_m^2 = m*J_m drive the cross terms.
    c.a1 = a.a1 * b.a1;
    c.a2 = a.a1 * b.a2 + a.a2 * b.a1 + q * a.a2 * b.a2;
    c.a3 = a.a1 * b.a3 + a.a3 * b.a1 + m * a.a3 * b.a3;
    c.a4 = a.a1 * b.a4 + a.a4 * b.a1 + a.a2 * b.a3 + a.a3 * b.a2 + q * a.a2 * b.a4 + q * a.a4 * b.a2 +
           m * a.a3 * b.a4 + m * a.a4 * b.a3 + m * q * a.a4 * b.a4;
    return c;
}

SmootherMatrix smoother_inv(const SmootherMatrix& a) {
    const double m = static_cast<double>(a.m), q = static_cast<double>(a.q);
    const double mu00 = a.a1;
    const double mu10 = a.a1 + q * a.a2;
    const double mu01 = a.a1 + m * a.a3;
    const double mu11 = a.a1 + q * a.a2 + m * a.a3 + m * q * a.a4;
    const double eps = 1e-12 * std::max({std::fabs(a.a1), std::fabs(a.a2), std::fabs(a.a3), std::fabs(a.a4)});
    for (double mu : {mu00, mu10, mu01, mu11})
        if (std::fabs(mu) <= eps)
            throw numeric_error("smoother_inv: structured matrix is singular (eigenvalue " +
                                std::to_string(mu) + " below guard)");
    SmootherMatrix d{0.0, 0.0, 0.0, 0.0, a.m, a.q};
    d.a1 = 1.0 / mu00;
    d.a2 = (1.0 / mu10 - 1.0 / mu00) / q;
    d.a3 = (1.0 / mu01 - 1.0 / mu00) / m;
    d.a4 = (1.0 / mu11 - 1.0 / mu10 - 1.0 / mu01 + 1.0 / mu00) / (m * q);
    return d;
}

DenseMatrix smoother_to_dense(const SmootherMatrix& a) {
    if (a.m == 0 || a.q == 0) throw std::invalid_argument("smoother_to_dense: m and q must be >= 1");
    const std::size_t n = a.m * a.q;
    if (n > densification_cap())
        throw data_error("smoother_to_dense: m*q = " + std::to_string(n) + " exceeds densification cap " +
                         std::to_string(densification_cap()));
    DenseMatrix d(n, n);
    for (std::size_t col = 0; col < n; ++col) {
        const std::size_t j = col / a.m, i = col % a.m;
        for (std::size_t row = 0; row < n; ++row) {
            const std::size_t jj = row / a.m, ii = row % a.m;
            double v = a.a4;
            if (ii == i) v += a.a2;
            if (jj == j) v += a.a3;
            if (ii == i && jj == j) v += a.a1;
            d(row, col) = v;
        }
    }
    return d;
}

} // namespace pairkrr
