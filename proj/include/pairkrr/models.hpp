#pragma once

#include "pairkrr/dense_matrix.hpp"
#include "pairkrr/kernels.hpp"
#include "pairkrr/linalg.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pairkrr::models {

enum class Method { IndependentTask, Kron, Okkls, TwoStep, Filter };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

/// Prediction scenario: A both objects in-sample, B new instance, C new task,
/// D both new (zero-shot).
enum class Setting { A, B, C, D };

Setting setting_from_name(const std::string& name);
std::string setting_name(Setting s);

/// Linear-filter weights; each component must lie in [0, 1].
struct FilterWeights {
    double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
};

/// Complete m x q label matrix, rows = instances, columns = tasks.
class LabelMatrix {
public:
    explicit LabelMatrix(DenseMatrix y);

    const DenseMatrix& matrix() const { return y_; }
    std::size_t instances() const { return y_.rows(); }
    std::size_t tasks() const { return y_.cols(); }

private:
    DenseMatrix y_;
};

/// Closed-form fitted model. Eigendecompositions are shared so hyperparameter
/// sweeps reuse one factorization, and dual parameters are kept in the
/// spectral basis (A = U Ahat V^T, or A = U Ahat for independent-task models)
/// so a sweep point costs O(mq) on top of the shared transform.
struct TrainedModel {
    Method method = Method::Kron;
    std::size_t m = 0, q = 0;
    std::optional<DenseMatrix> coefficients;           // dense dual parameters A (loaded models)
    std::optional<DenseMatrix> spectral_coefficients;  // Ahat in the eigenbases
    std::shared_ptr<const EigenDecomposition> eig_k;
    std::shared_ptr<const EigenDecomposition> eig_g;
    std::optional<double> lambda;    // kron / okkls
    std::optional<double> lambda_u;  // it / two-step
    std::optional<double> lambda_v;  // two-step
    std::optional<FilterWeights> weights;  // filter
    std::optional<DenseMatrix> labels;     // filter models keep Y
    kernels::KernelConfig kernel_u;
    kernels::KernelConfig kernel_v;

    bool has_dual() const { return coefficients.has_value() || spectral_coefficients.has_value(); }
    /// Dense dual parameter matrix, materialized from the spectral form when
    /// necessary. Throws for filter models.
    DenseMatrix dual_dense() const;

    /// Training-kernel matrix rebuilt from the stored eigendecomposition.
    DenseMatrix training_kernel_u() const;
    DenseMatrix training_kernel_g() const;
};

/// (K + lambda_u I) A = Y solved through the eigendecomposition of K.
TrainedModel fit_it(const kernels::GramMatrix& k, const LabelMatrix& y, double lambda_u);

/// (G (x) K + lambda I) vec(A) = vec(Y) via the shifted-Kronecker shortcut
/// A = U (E ./ D) V^T, E = U^T Y V, D_ij = sigma_i s_j + lambda. Never
/// materializes the (mq)x(mq) system.
TrainedModel fit_kron(const kernels::GramMatrix& k, const kernels::GramMatrix& g, const LabelMatrix& y,
                      double lambda);

/// Kronecker least squares without regularization (lambda = 0).
TrainedModel fit_okkls(const kernels::GramMatrix& k, const kernels::GramMatrix& g, const LabelMatrix& y);

/// A = (K + lambda_u I)^{-1} Y (G + lambda_v I)^{-1} via both eigendecompositions.
TrainedModel fit_two_step(const kernels::GramMatrix& k, const kernels::GramMatrix& g, const LabelMatrix& y,
                          double lambda_u, double lambda_v);

/// Linear matrix filter; weights validated to [0,1]^4.
TrainedModel fit_filter(const LabelMatrix& y, const FilterWeights& w);

/// F = K_test A G_test^T. K_test rows are kernel evaluations of test instances
/// against training instances; G_test likewise for tasks.
DenseMatrix predict(const TrainedModel& model, const DenseMatrix& k_test, const DenseMatrix& g_test);

/// Dispatches by setting. Absent test kernels default to the training-side
/// matrices where the setting allows it (always for Setting A). Rejects IT
/// models for Settings C/D and filter models for B/C/D.
DenseMatrix predict_setting(const TrainedModel& model, Setting setting,
                            const std::optional<DenseMatrix>& k_test = std::nullopt,
                            const std::optional<DenseMatrix>& g_test = std::nullopt);

/// Weighted average of label, column mean, row mean and grand mean. Plain
/// arithmetic shared with the smoother-theorem check; weights may be any reals.
DenseMatrix linear_filter_apply(const DenseMatrix& y, double a1, double a2, double a3, double a4);

double filter_predict(const TrainedModel& model, std::size_t i, std::size_t j);
DenseMatrix filter_predict_all(const TrainedModel& model);

/// Leave-one-pair-out shortcut F_loo = (F - c Y) / (1 - c),
/// c = a1 + a2/m + a3/q + a4/(mq); requires c < 1 - 1e-12.
DenseMatrix filter_loo(const TrainedModel& model);

struct FilterTuneResult {
    FilterWeights weights;
    double loo_mse = 0.0;
};

/// Exhaustive grid search over {0, step, ..., 1}^4 minimizing mean squared
/// LOO error; ties resolved to the lexicographically smallest weight vector.
FilterTuneResult tune_filter(const LabelMatrix& y, double grid_step = 0.1);

/// One hyperparameter grid point of a sweep; kron/okkls use values[0] as
/// lambda, it uses values[0] as lambda_u, two-step uses (lambda_u, lambda_v).
struct SweepPoint {
    std::array<double, 2> values{0.0, 0.0};
    std::optional<TrainedModel> model;
    std::string error;  // nonempty when this point failed
};

/// Fits every grid point off one pair of eigendecompositions. Singular points
/// are recorded as per-point errors, never aborting the sweep.
std::vector<SweepPoint> sweep(const kernels::GramMatrix& k, const kernels::GramMatrix* g,
                              const LabelMatrix& y, Method method,
                              const std::vector<std::array<double, 2>>& grid);

/// Mean squared Setting-A training error.
double training_mse(const TrainedModel& model, const LabelMatrix& y);

} // namespace pairkrr::models
