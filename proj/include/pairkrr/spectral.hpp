#pragma once

#include "pairkrr/dense_matrix.hpp"
#include "pairkrr/kernels.hpp"
#include "pairkrr/linalg.hpp"

#include <string>
#include <vector>

namespace pairkrr::spectral {

enum class FilterKind { Tikhonov, KronTikhonov, TwoStep, IndependentTask };

std::string filter_kind_name(FilterKind k);
FilterKind filter_kind_from_name(const std::string& name);

/// Family of regularizing filter functions over factor eigenvalues (sigma, s):
///   tikhonov          1/(sigma + lambda)            (ignores s)
///   kron_tikhonov     1/(sigma*s + lambda)
///   two_step          1/((sigma + lambda_u)(s + lambda_v))
///   independent_task  1/((sigma + lambda_u) s)
class SpectralFilter {
public:
    static SpectralFilter tikhonov(double lambda);
    static SpectralFilter kron_tikhonov(double lambda);
    static SpectralFilter two_step(double lambda_u, double lambda_v);
    static SpectralFilter independent_task(double lambda_u);

    FilterKind kind() const { return kind_; }
    double lambda() const { return lambda_; }
    double lambda_u() const { return lambda_u_; }
    double lambda_v() const { return lambda_v_; }

private:
    SpectralFilter(FilterKind kind, double lambda, double lambda_u, double lambda_v)
        : kind_(kind), lambda_(lambda), lambda_u_(lambda_u), lambda_v_(lambda_v) {}

    FilterKind kind_;
    double lambda_ = 0.0;    // tikhonov / kron_tikhonov
    double lambda_u_ = 0.0;  // two_step / independent_task
    double lambda_v_ = 0.0;  // two_step
};

/// Filter value at factor eigenvalues (sigma, s). Throws numeric_error on a
/// zero denominator (independent_task at s = 0).
double eval_filter(const SpectralFilter& f, double sigma, double s);

/// A = U (E .* Theta) V^T with Theta_ij = filter(sigma_i, s_j); generalizes
/// every closed-form fit in this library.
DenseMatrix filtered_fit(const kernels::GramMatrix& k, const kernels::GramMatrix& g, const DenseMatrix& y,
                         const SpectralFilter& f);

/// Dense hat matrix H = (V (x) U) diag(varsigma * filter) (V (x) U)^T,
/// verification use only; guarded by densification_cap().
DenseMatrix hat_matrix(const kernels::GramMatrix& k, const kernels::GramMatrix& g, const SpectralFilter& f);

struct NuProbe {
    double nu = 0.0;
    double gamma_nu_hat = 0.0;            // observed sup of (varsigma/lambda)^nu |1 - varsigma*filter|
    double bound = 0.0;                   // theorem constant for this filter kind
    bool within_bound = false;            // gamma_nu_hat <= bound * (1 + slack), only meaningful for nu <= nu_bar
    bool qualification_exceeded = false;  // sup grows monotonically without bound as lambda -> 0
    std::vector<double> sup_by_lambda;    // one entry per lambda grid point, descending lambda
};

/// Numeric probe of the four admissibility bounds on finite log-spaced grids.
/// Suprema are approximated from below; this is a check, not a proof.
struct AdmissibilityReport {
    FilterKind kind = FilterKind::Tikhonov;
    double kappa = 0.0;
    double a = 1.0, b = 1.0;
    double d_const = 1.0, b_const = 1.0, gamma_const = 1.0, gamma_nu_const = 1.0;
    double nu_bar = 1.0;  // theoretical qualification for this kind
    double d_hat = 0.0;   // observed sup |varsigma * filter|
    double b_hat = 0.0;   // observed sup |filter| * lambda
    double gamma_hat = 0.0;  // observed sup |1 - varsigma * filter|
    std::vector<NuProbe> nu_probes;
    std::vector<double> lambda_grid;  // descending
    std::size_t grid_size = 0;
    double slack = 0.05;
    bool pass = false;
};

/// Sweeps (varsigma, lambda) over log grids in (0, kappa^2], including the
/// factorization extremes sigma in {sqrt(vs)/a, sqrt(vs), a*sqrt(vs)} and
/// lambda_u in {sqrt(l)/b, sqrt(l), b*sqrt(l)} for factorized filters.
/// lambda_min defaults to kappa^2 * 1e-8. Rejects independent_task (its
/// pairwise lambda = lambda_u * lambda_v is 0, outside Definition coverage).
AdmissibilityReport admissibility_check(FilterKind kind, double kappa, double a, double b,
                                        const std::vector<double>& nu_list, std::size_t grid_size,
                                        double lambda_min = 0.0);

/// Default probe list bracketing the two-step qualification boundary 1/2.
std::vector<double> default_nu_list();

/// Empirical kernel bound max sqrt(K_ii) * max sqrt(G_jj); understates the
/// population constant, which is noted in the report consumers.
double empirical_kappa(const kernels::GramMatrix& k, const kernels::GramMatrix& g);

} // namespace pairkrr::spectral
