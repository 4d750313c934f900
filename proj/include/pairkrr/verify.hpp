#pragma once

#include "pairkrr/dense_matrix.hpp"
#include "pairkrr/kernels.hpp"
#include "pairkrr/models.hpp"
#include "pairkrr/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pairkrr::verify {

/// Outcome of one randomized identity check. pass means the measured
/// discrepancy is within tolerance; negative-control rows set
/// expect_violation and succeed precisely when the check trips.
struct TheoremCheckResult {
    std::string theorem;
    std::size_t m = 0, q = 0;
    std::uint64_t seed = 0;
    double lambda_u = 0.0, lambda_v = 0.0;
    double max_abs_discrepancy = 0.0;  // relative to the reference side
    double tolerance = 0.0;
    bool pass = false;
    bool expect_violation = false;

    bool ok() const { return expect_violation ? !pass : pass; }
};

/// Fixed PD-kernel recipe X X^T + 0.1 I with standard-normal X (seeded splitmix64).
kernels::GramMatrix random_pd_gram(SplitMix64& rng, std::size_t n);
DenseMatrix random_matrix(SplitMix64& rng, std::size_t rows, std::size_t cols);

/// Theorem: independent-task KRR and two-step KRR with lambda_v = 0 agree on
/// Setting-B predictions for training tasks when G is full rank.
TheoremCheckResult check_theorem1(const kernels::GramMatrix& k, const kernels::GramMatrix& g,
                                  const models::LabelMatrix& y, double lambda_u,
                                  const DenseMatrix& test_rows);

/// Hypothesis-violation control: rank-deficient G, two-step side computed with
/// a spectral pseudo-inverse; reports the discrepancy that results.
TheoremCheckResult check_theorem1_singular_control(const kernels::GramMatrix& k,
                                                   const kernels::GramMatrix& g_singular,
                                                   const models::LabelMatrix& y, double lambda_u,
                                                   const DenseMatrix& test_rows);

/// Theorem: Setting-A predictions of pairwise KRR with kernel Xi and lambda=1
/// equal two-step training predictions K A G.
TheoremCheckResult check_theorem2(const kernels::GramMatrix& k, const kernels::GramMatrix& g,
                                  const models::LabelMatrix& y, double lambda_u, double lambda_v,
                                  double pairwise_lambda = 1.0, bool expect_violation = false);

/// Theorem: two-step dual parameters equal the OKKLS parameters under the
/// shifted pairwise kernel Upsilon, and Setting-D predictions agree on dyads
/// unseen in training.
TheoremCheckResult check_theorem3(const kernels::GramMatrix& k, const kernels::GramMatrix& g,
                                  const models::LabelMatrix& y, double lambda_u, double lambda_v,
                                  const DenseMatrix& k_test, const DenseMatrix& g_test);

/// Control: the same comparison evaluated at an in-sample dyad, where the
/// delta terms of Upsilon are active and equality is not claimed.
TheoremCheckResult check_theorem3_insample_control(const kernels::GramMatrix& k,
                                                   const kernels::GramMatrix& g,
                                                   const models::LabelMatrix& y, double lambda_u,
                                                   double lambda_v);

/// Theorem: Kronecker KRR under smoother kernels J + theta*I reduces to the
/// weighted-average linear filter; hat coefficients recovered through the
/// structured smoother algebra.
TheoremCheckResult check_smoother_theorem(std::size_t m, std::size_t q, double theta_u, double theta_v,
                                          double lambda, const models::LabelMatrix& y);

/// Control: instance kernel perturbed off the smoother form while the
/// structured route still assumes it.
TheoremCheckResult check_smoother_control(std::size_t m, std::size_t q, double theta_u, double theta_v,
                                          double lambda, const models::LabelMatrix& y, SplitMix64& rng);

/// vec(M X N) = (N^T (x) M) vec(X) on random conformable matrices.
TheoremCheckResult check_vec_kron(std::uint64_t seed, std::size_t max_dim);

/// Eigen-shortcut solution of (G (x) K + lambda I) vec(A) = vec(Y) against a
/// dense LU solve.
TheoremCheckResult check_shifted_kron_solver(std::uint64_t seed, std::size_t m, std::size_t q, double lambda);

struct SuiteOptions {
    std::string selection = "all";  // thm1|thm2|thm3|smoother|veckron|solver|all
    std::size_t seeds = 5;
    std::uint64_t base_seed = 1;
    std::size_t fixed_m = 0;  // 0 = derive from seed in {2..8}
    std::size_t fixed_q = 0;
    bool include_negative_controls = true;
};

/// Runs the seed-driven randomized suite; sizes and hyperparameters are
/// derived from each seed unless fixed.
std::vector<TheoremCheckResult> run_suite(const SuiteOptions& options);

/// One CSV row per check: theorem,seed,m,q,lambda_u,lambda_v,discrepancy,tolerance,pass,expected,ok.
std::string report_csv(const std::vector<TheoremCheckResult>& results);

} // namespace pairkrr::verify
