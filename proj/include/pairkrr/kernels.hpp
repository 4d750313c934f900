#pragma once

#include "pairkrr/dense_matrix.hpp"

#include <optional>
#include <string>

namespace pairkrr::kernels {

enum class GramSource { Precomputed, Linear, Rbf, Gip, Smoother, Delta };

std::string gram_source_name(GramSource s);

/// Symmetric PSD similarity matrix over one object type.
class GramMatrix {
public:
    GramMatrix(DenseMatrix matrix, GramSource source);

    std::size_t size() const { return matrix_.rows(); }
    const DenseMatrix& matrix() const { return matrix_; }
    GramSource source() const { return source_; }

private:
    DenseMatrix matrix_;
    GramSource source_;
};

/// Kernel construction parameters carried as model metadata.
struct KernelConfig {
    GramSource kind = GramSource::Precomputed;
    std::optional<double> gamma;  // rbf / gip bandwidth, > 0
    std::optional<double> theta;  // smoother diagonal weight, >= 0
};

/// X * X^T over row feature vectors.
GramMatrix gram_linear(const DenseMatrix& x);

/// exp(-gamma * ||x_i - x_j||^2); unit diagonal.
GramMatrix gram_rbf(const DenseMatrix& x, double gamma);

enum class GipAxis { Rows, Cols };

/// Gaussian interaction profile kernel: rbf over rows or columns of the label
/// matrix. gamma defaults to 1/profile_length when not given.
GramMatrix gram_gip(const DenseMatrix& y, GipAxis axis, std::optional<double> gamma = std::nullopt);

/// Feature-agnostic smoother kernel J + theta*I; PSD for every theta >= 0.
GramMatrix gram_smoother(std::size_t size, double theta);

/// Kronecker pairwise kernel value k(u,u')*g(v,v').
inline double kron_pairwise_eval(double k_val, double g_val) { return k_val * g_val; }

/// Dense (G + lambda_v I) (x) (K + lambda_u I), verification use only.
DenseMatrix two_step_pairwise_gram(const GramMatrix& k, const GramMatrix& g, double lambda_u, double lambda_v);

/// Dense G (x) K (lu*lv I(x)I + lv I(x)K + lu G(x)I)^{-1}, verification use only;
/// requires strictly positive definite K and G.
DenseMatrix xi_pairwise_gram(const GramMatrix& k, const GramMatrix& g, double lambda_u, double lambda_v);

/// Wraps a precomputed matrix after symmetry and PSD checks
/// (min eigenvalue >= -tol * max eigenvalue). Throws data_error on failure.
GramMatrix validate_psd(const DenseMatrix& m, double tol = 1e-8);

} // namespace pairkrr::kernels
