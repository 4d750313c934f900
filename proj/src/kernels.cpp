#include "pairkrr/kernels.hpp"

#include "pairkrr/common.hpp"
#include "pairkrr/kron.hpp"
#include "pairkrr/linalg.hpp"
#include "pairkrr/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace pairkrr::kernels {

std::string gram_source_name(GramSource s) {
    switch (s) {
        case GramSource::Precomputed: return "precomputed";
        case GramSource::Linear: return "linear";
        case GramSource::Rbf: return "rbf";
        case GramSource::Gip: return "gip";
        case GramSource::Smoother: return "smoother";
        case GramSource::Delta: return "delta";
    }
    return "unknown";
}

GramMatrix::GramMatrix(DenseMatrix matrix, GramSource source)
    : matrix_(std::move(matrix)), source_(source) {
    if (matrix_.rows() != matrix_.cols())
        throw std::invalid_argument("GramMatrix: matrix must be square");
}

GramMatrix gram_linear(const DenseMatrix& x) {
    x.require_finite("gram_linear features");
    DenseMatrix k = matmul_a_bt(x, x);
    // mirror the lower triangle so rounding cannot break symmetry
    for (std::size_t i = 0; i < k.rows(); ++i)
        for (std::size_t j = i + 1; j < k.cols(); ++j) k(j, i) = k(i, j);
    return GramMatrix(std::move(k), GramSource::Linear);
}

namespace {

DenseMatrix rbf_over_rows(const DenseMatrix& x, double gamma) {
    const std::size_t n = x.rows(), d = x.cols();
    DenseMatrix k(n, n);
    parallel::parallel_for(n, [&](std::size_t i) {
        k(i, i) = 1.0;
        const double* xi = x.data() + i * d;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* xj = x.data() + j * d;
            double dist2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = xi[c] - xj[c];
                dist2 += diff * diff;
            }
            k(i, j) = std::exp(-gamma * dist2);
        }
    });
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) k(j, i) = k(i, j);
    return k;
}

} // namespace

GramMatrix gram_rbf(const DenseMatrix& x, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gram_rbf: gamma must be > 0");
    x.require_finite("gram_rbf features");
    return GramMatrix(rbf_over_rows(x, gamma), GramSource::Rbf);
}

GramMatrix gram_gip(const DenseMatrix& y, GipAxis axis, std::optional<double> gamma) {
    y.require_finite("gram_gip labels");
    const DenseMatrix profiles = (axis == GipAxis::Rows) ? y : transpose(y);
    const double g = gamma.value_or(1.0 / static_cast<double>(profiles.cols()));
    if (!(g > 0.0)) throw std::invalid_argument("gram_gip: gamma must be > 0");
    return GramMatrix(rbf_over_rows(profiles, g), GramSource::Gip);
}

GramMatrix gram_smoother(std::size_t size, double theta) {
    if (theta < 0.0) throw std::invalid_argument("gram_smoother: theta must be >= 0");
    if (size == 0) throw std::invalid_argument("gram_smoother: size must be >= 1");
    DenseMatrix k = DenseMatrix::ones(size, size);
    for (std::size_t i = 0; i < size; ++i) k(i, i) += theta;
    return GramMatrix(std::move(k), GramSource::Smoother);
}

DenseMatrix two_step_pairwise_gram(const GramMatrix& k, const GramMatrix& g, double lambda_u, double lambda_v) {
    if (!(lambda_u > 0.0) || !(lambda_v > 0.0))
        throw std::invalid_argument("two_step_pairwise_gram: lambdas must be > 0");
    const std::size_t n = k.size() * g.size();
    if (n > densification_cap())
        throw data_error("two_step_pairwise_gram: m*q = " + std::to_string(n) +
                         " exceeds densification cap " + std::to_string(densification_cap()));
    DenseMatrix ks = k.matrix();
    for (std::size_t i = 0; i < ks.rows(); ++i) ks(i, i) += lambda_u;
    DenseMatrix gs = g.matrix();
    for (std::size_t j = 0; j < gs.rows(); ++j) gs(j, j) += lambda_v;
    return kron(gs, ks);
}

DenseMatrix xi_pairwise_gram(const GramMatrix& k, const GramMatrix& g, double lambda_u, double lambda_v) {
    const std::size_t m = k.size(), q = g.size();
    if (m * q > densification_cap())
        throw data_error("xi_pairwise_gram: m*q = " + std::to_string(m * q) +
                         " exceeds densification cap " + std::to_string(densification_cap()));
    const DenseMatrix gk = kron(g.matrix(), k.matrix());
    // inner = lu*lv I + lv (I (x) K) + lu (G (x) I)
    DenseMatrix inner = kron(DenseMatrix::identity(q), k.matrix());
    for (std::size_t e = 0; e < inner.size(); ++e) inner.data()[e] *= lambda_v;
    const DenseMatrix gi = kron(g.matrix(), DenseMatrix::identity(m));
    for (std::size_t r = 0; r < inner.rows(); ++r)
        for (std::size_t c = 0; c < inner.cols(); ++c) inner(r, c) += lambda_u * gi(r, c);
    for (std::size_t d = 0; d < inner.rows(); ++d) inner(d, d) += lambda_u * lambda_v;
    // G(x)K and the inner shift share an eigenbasis, so inner^{-1} commutes with G(x)K
    // and Xi = (G(x)K) inner^{-1} = inner^{-1} (G(x)K).
    return lu_solve(inner, gk);
}

GramMatrix validate_psd(const DenseMatrix& m, double tol) {
    if (m.rows() != m.cols()) throw data_error("validate_psd: matrix is not square");
    m.require_finite("kernel matrix");
    const double scale = max_abs(m);
    double asym = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j) asym = std::max(asym, std::fabs(m(i, j) - m(j, i)));
    if (asym > 1e-10 * std::max(scale, 1e-300))
        throw data_error("validate_psd: matrix asymmetric beyond tolerance");
    const EigenDecomposition eig = sym_eig(m);
    const double max_ev = eig.values.front();
    const double min_ev = eig.values.back();
    if (min_ev < -tol * std::max(max_ev, 0.0))
        throw data_error("validate_psd: matrix is not positive semidefinite (min eigenvalue " +
                         std::to_string(min_ev) + ", max " + std::to_string(max_ev) + ")");
    return GramMatrix(m, GramSource::Precomputed);
}

} // namespace pairkrr::kernels
