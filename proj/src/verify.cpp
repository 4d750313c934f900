#include "pairkrr/verify.hpp"

#include "pairkrr/common.hpp"
#include "pairkrr/kron.hpp"
#include "pairkrr/linalg.hpp"
#include "pairkrr/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace pairkrr::verify {

namespace {

double relative_discrepancy(const DenseMatrix& reference, const DenseMatrix& other) {
    const double scale = std::max(max_abs(reference), 1e-300);
    return max_abs_diff(reference, other) / scale;
}

void require_strictly_pd(const kernels::GramMatrix& g, const char* what) {
    const EigenDecomposition eig = sym_eig(g.matrix());
    if (!(eig.values.back() > 1e-8 * std::max(eig.values.front(), 0.0)))
        throw std::invalid_argument(std::string(what) +
                                    " must be strictly positive definite (min eigenvalue " +
                                    std::to_string(eig.values.back()) + ")");
}

TheoremCheckResult make_result(std::string tag, std::size_t m, std::size_t q, double lu, double lv,
                               double disc, double tol, bool expect_violation = false) {
    TheoremCheckResult r;
    r.theorem = std::move(tag);
    r.m = m;
    r.q = q;
    r.lambda_u = lu;
    r.lambda_v = lv;
    r.max_abs_discrepancy = disc;
    r.tolerance = tol;
    r.pass = disc <= tol;
    r.expect_violation = expect_violation;
    return r;
}

} // namespace

kernels::GramMatrix random_pd_gram(SplitMix64& rng, std::size_t n) {
    DenseMatrix x = random_matrix(rng, n, n);
    DenseMatrix k = matmul_a_bt(x, x);
    for (std::size_t i = 0; i < n; ++i) k(i, i) += 0.1;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) k(j, i) = k(i, j);
    return kernels::GramMatrix(std::move(k), kernels::GramSource::Precomputed);
}

DenseMatrix random_matrix(SplitMix64& rng, std::size_t rows, std::size_t cols) {
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.next_normal();
    return m;
}

TheoremCheckResult check_theorem1(const kernels::GramMatrix& k, const kernels::GramMatrix& g,
                                  const models::LabelMatrix& y, double lambda_u,
                                  const DenseMatrix& test_rows) {
    require_strictly_pd(g, "check_theorem1: task kernel");
    const models::TrainedModel it = models::fit_it(k, y, lambda_u);
    const models::TrainedModel ts = models::fit_two_step(k, g, y, lambda_u, 0.0);
    const DenseMatrix f_it = models::predict_setting(it, models::Setting::B, test_rows);
    const DenseMatrix f_ts = models::predict_setting(ts, models::Setting::B, test_rows);
    return make_result("thm1", y.instances(), y.tasks(), lambda_u, 0.0, relative_discrepancy(f_it, f_ts),
                       1e-8);
}

TheoremCheckResult check_theorem1_singular_control(const kernels::GramMatrix& k,
                                                   const kernels::GramMatrix& g_singular,
                                                   const models::LabelMatrix& y, double lambda_u,
                                                   const DenseMatrix& test_rows) {
    const models::TrainedModel it = models::fit_it(k, y, lambda_u);
    const DenseMatrix f_it = models::predict_setting(it, models::Setting::B, test_rows);

    // two-step side with lambda_v = 0 and singular G: (G)^{-1} replaced by the
    // spectral pseudo-inverse, projecting task outputs onto range(G)
    const EigenDecomposition eg = sym_eig(g_singular.matrix());
    const double cutoff = 1e-8 * std::max(eg.values.front(), 0.0);
    DenseMatrix b = matmul(f_it, eg.vectors);  // f_it already equals K_test (K+lu I)^{-1} Y
    for (std::size_t c = 0; c < b.cols(); ++c) {
        const double s = eg.values[c];
        const double w = (s > cutoff) ? 1.0 : 0.0;  // (1/s) * s for the kept directions
        for (std::size_t r = 0; r < b.rows(); ++r) b(r, c) *= w;
    }
    const DenseMatrix f_ts = matmul_a_bt(b, eg.vectors);
    return make_result("thm1-negative", y.instances(), y.tasks(), lambda_u, 0.0,
                       relative_discrepancy(f_it, f_ts), 1e-8, true);
}

TheoremCheckResult check_theorem2(const kernels::GramMatrix& k, const kernels::GramMatrix& g,
                                  const models::LabelMatrix& y, double lambda_u, double lambda_v,
                                  double pairwise_lambda, bool expect_violation) {
    require_strictly_pd(k, "check_theorem2: instance kernel");
    require_strictly_pd(g, "check_theorem2: task kernel");
    const std::size_t m = y.instances(), q = y.tasks();

    // pairwise KRR route on the Xi kernel: vec(F) = Xi (Xi + lambda I)^{-1} vec(Y)
    const DenseMatrix xi = kernels::xi_pairwise_gram(k, g, lambda_u, lambda_v);
    DenseMatrix shifted = xi;
    for (std::size_t d = 0; d < shifted.rows(); ++d) shifted(d, d) += pairwise_lambda;
    const DenseMatrix alpha = lu_solve(shifted, unvec(vec(y.matrix()), m * q, 1));
    std::vector<double> alpha_v(m * q);
    for (std::size_t i = 0; i < alpha_v.size(); ++i) alpha_v[i] = alpha(i, 0);
    std::vector<double> f_vec(m * q, 0.0);
    for (std::size_t r = 0; r < m * q; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < m * q; ++c) s += xi(r, c) * alpha_v[c];
        f_vec[r] = s;
    }
    const DenseMatrix f_pairwise = unvec(f_vec, m, q);

    // two-step route: training predictions K A G
    const models::TrainedModel ts = models::fit_two_step(k, g, y, lambda_u, lambda_v);
    const DenseMatrix f_ts = models::predict_setting(ts, models::Setting::A);

    const std::string tag = expect_violation ? "thm2-negative" : "thm2";
    return make_result(tag, m, q, lambda_u, lambda_v, relative_discrepancy(f_ts, f_pairwise), 1e-7,
                       expect_violation);
}

TheoremCheckResult check_theorem3(const kernels::GramMatrix& k, const kernels::GramMatrix& g,
                                  const models::LabelMatrix& y, double lambda_u, double lambda_v,
                                  const DenseMatrix& k_test, const DenseMatrix& g_test) {
    const std::size_t m = y.instances(), q = y.tasks();
    const models::TrainedModel ts = models::fit_two_step(k, g, y, lambda_u, lambda_v);

    const DenseMatrix upsilon = kernels::two_step_pairwise_gram(k, g, lambda_u, lambda_v);
    const DenseMatrix a_vec = lu_solve(upsilon, unvec(vec(y.matrix()), m * q, 1));
    std::vector<double> av(m * q);
    for (std::size_t i = 0; i < av.size(); ++i) av[i] = a_vec(i, 0);
    const DenseMatrix a_okkls = unvec(av, m, q);

    const double param_disc =
        max_abs_diff(ts.dual_dense(), a_okkls) / std::max(max_abs(ts.dual_dense()), 1e-300);

    // Setting-D predictions: delta terms vanish for unseen dyads, so the OKKLS
    // prediction is K_test A G_test^T as well
    const DenseMatrix f_ts = models::predict_setting(ts, models::Setting::D, k_test, g_test);
    const DenseMatrix f_okkls = matmul_a_bt(matmul(k_test, a_okkls), g_test);
    const double pred_disc = relative_discrepancy(f_ts, f_okkls);

    return make_result("thm3", m, q, lambda_u, lambda_v, std::max(param_disc, pred_disc), 1e-8);
}

TheoremCheckResult check_theorem3_insample_control(const kernels::GramMatrix& k,
                                                   const kernels::GramMatrix& g,
                                                   const models::LabelMatrix& y, double lambda_u,
                                                   double lambda_v) {
    const std::size_t m = y.instances(), q = y.tasks();
    const models::TrainedModel ts = models::fit_two_step(k, g, y, lambda_u, lambda_v);

    // OKKLS evaluated at the training dyads keeps the delta terms:
    // F = (K + lu I) A (G + lv I) = Y exactly, while two-step gives K A G.
    const DenseMatrix upsilon = kernels::two_step_pairwise_gram(k, g, lambda_u, lambda_v);
    const DenseMatrix a_vec = lu_solve(upsilon, unvec(vec(y.matrix()), m * q, 1));
    std::vector<double> fv(m * q, 0.0);
    for (std::size_t r = 0; r < m * q; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < m * q; ++c) s += upsilon(r, c) * a_vec(c, 0);
        fv[r] = s;
    }
    const DenseMatrix f_okkls_insample = unvec(fv, m, q);
    const DenseMatrix f_ts = models::predict_setting(ts, models::Setting::A);
    return make_result("thm3-negative", m, q, lambda_u, lambda_v,
                       relative_discrepancy(f_okkls_insample, f_ts), 1e-8, true);
}

TheoremCheckResult check_smoother_theorem(std::size_t m, std::size_t q, double theta_u, double theta_v,
                                          double lambda, const models::LabelMatrix& y) {
    const kernels::GramMatrix k = kernels::gram_smoother(m, theta_u);
    const kernels::GramMatrix g = kernels::gram_smoother(q, theta_v);
    const models::TrainedModel kk = models::fit_kron(k, g, y, lambda);
    const DenseMatrix f_fit = models::predict_setting(kk, models::Setting::A);

    // structured route: hat = Gamma (Gamma + lambda I)^{-1} inside the
    // 4-coefficient smoother algebra, then read off the average weights
    SmootherMatrix gamma{theta_u * theta_v, theta_u, theta_v, 1.0, m, q};
    SmootherMatrix shifted = gamma;
    shifted.a1 += lambda;
    const SmootherMatrix hat = smoother_mul(gamma, smoother_inv(shifted));
    const double alpha1 = hat.a1;
    const double alpha2 = hat.a3 * static_cast<double>(m);
    const double alpha3 = hat.a2 * static_cast<double>(q);
    const double alpha4 = hat.a4 * static_cast<double>(m) * static_cast<double>(q);
    const DenseMatrix f_filter = models::linear_filter_apply(y.matrix(), alpha1, alpha2, alpha3, alpha4);

    return make_result("smoother", m, q, lambda, 0.0, relative_discrepancy(f_fit, f_filter), 1e-8);
}

TheoremCheckResult check_smoother_control(std::size_t m, std::size_t q, double theta_u, double theta_v,
                                          double lambda, const models::LabelMatrix& y, SplitMix64& rng) {
    DenseMatrix km = kernels::gram_smoother(m, theta_u).matrix();
    const kernels::GramMatrix perturb = random_pd_gram(rng, m);
    const double scale = 0.5 / std::max(max_abs(perturb.matrix()), 1e-300);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) km(i, j) += scale * perturb.matrix()(i, j);
    const kernels::GramMatrix k(std::move(km), kernels::GramSource::Precomputed);
    const kernels::GramMatrix g = kernels::gram_smoother(q, theta_v);
    const models::TrainedModel kk = models::fit_kron(k, g, y, lambda);
    const DenseMatrix f_fit = models::predict_setting(kk, models::Setting::A);

    SmootherMatrix gamma{theta_u * theta_v, theta_u, theta_v, 1.0, m, q};
    SmootherMatrix shifted = gamma;
    shifted.a1 += lambda;
    const SmootherMatrix hat = smoother_mul(gamma, smoother_inv(shifted));
    const DenseMatrix f_filter =
        models::linear_filter_apply(y.matrix(), hat.a1, hat.a3 * static_cast<double>(m),
                                    hat.a2 * static_cast<double>(q),
                                    hat.a4 * static_cast<double>(m) * static_cast<double>(q));
    return make_result("smoother-negative", m, q, lambda, 0.0, relative_discrepancy(f_fit, f_filter), 1e-8,
                       true);
}

TheoremCheckResult check_vec_kron(std::uint64_t seed, std::size_t max_dim) {
    if (max_dim > 8) throw std::invalid_argument("check_vec_kron: dims capped at 8");
    SplitMix64 rng(seed);
    const auto dim = [&]() { return static_cast<std::size_t>(rng.next_index(1, max_dim)); };
    const std::size_t p = dim(), r = dim(), c = dim(), d = dim();
    const DenseMatrix mmat = random_matrix(rng, p, r);
    const DenseMatrix x = random_matrix(rng, r, c);
    const DenseMatrix n = random_matrix(rng, c, d);

    const std::vector<double> lhs = vec(apply_kron_vec(n, mmat, x));
    const DenseMatrix big = kron(transpose(n), mmat);
    const std::vector<double> xv = vec(x);
    double disc = 0.0;
    for (std::size_t row = 0; row < big.rows(); ++row) {
        double s = 0.0;
        for (std::size_t col = 0; col < big.cols(); ++col) s += big(row, col) * xv[col];
        disc = std::max(disc, std::fabs(s - lhs[row]));
    }
    TheoremCheckResult res = make_result("veckron", p, d, 0.0, 0.0, disc, 1e-10);
    res.seed = seed;
    return res;
}

TheoremCheckResult check_shifted_kron_solver(std::uint64_t seed, std::size_t m, std::size_t q,
                                             double lambda) {
    SplitMix64 rng(seed);
    const kernels::GramMatrix k = random_pd_gram(rng, m);
    const kernels::GramMatrix g = random_pd_gram(rng, q);
    const models::LabelMatrix y(random_matrix(rng, m, q));

    const models::TrainedModel shortcut = models::fit_kron(k, g, y, lambda);

    DenseMatrix system = kron(g.matrix(), k.matrix());
    if (m * q > densification_cap())
        throw data_error("check_shifted_kron_solver: m*q exceeds densification cap");
    for (std::size_t d = 0; d < system.rows(); ++d) system(d, d) += lambda;
    const DenseMatrix a_vec = lu_solve(system, unvec(vec(y.matrix()), m * q, 1));
    std::vector<double> av(m * q);
    for (std::size_t i = 0; i < av.size(); ++i) av[i] = a_vec(i, 0);
    const DenseMatrix a_dense = unvec(av, m, q);

    const double disc =
        max_abs_diff(shortcut.dual_dense(), a_dense) / std::max(max_abs(a_dense), 1e-300);
    TheoremCheckResult res = make_result("solver", m, q, lambda, 0.0, disc, 1e-8);
    res.seed = seed;
    return res;
}

namespace {

struct SeedInstance {
    std::size_t m, q;
    double lambda_u, lambda_v;
};

SeedInstance derive_instance(SplitMix64& rng, const SuiteOptions& opt) {
    SeedInstance inst{};
    inst.m = opt.fixed_m ? opt.fixed_m : static_cast<std::size_t>(rng.next_index(2, 8));
    inst.q = opt.fixed_q ? opt.fixed_q : static_cast<std::size_t>(rng.next_index(2, 8));
    inst.lambda_u = rng.next_log_uniform(1e-2, 10.0);
    inst.lambda_v = rng.next_log_uniform(1e-2, 10.0);
    return inst;
}

kernels::GramMatrix drop_smallest_eigenvalue(const kernels::GramMatrix& g) {
    EigenDecomposition eig = sym_eig(g.matrix());
    eig.values.back() = 0.0;
    DenseMatrix rebuilt = eig.reconstruct();
    for (std::size_t i = 0; i < rebuilt.rows(); ++i)
        for (std::size_t j = i + 1; j < rebuilt.cols(); ++j) rebuilt(j, i) = rebuilt(i, j);
    return kernels::GramMatrix(std::move(rebuilt), kernels::GramSource::Precomputed);
}

bool selected(const std::string& selection, const char* name) {
    return selection == "all" || selection == name;
}

} // namespace

std::vector<TheoremCheckResult> run_suite(const SuiteOptions& opt) {
    std::vector<TheoremCheckResult> out;
    for (std::size_t s = 0; s < opt.seeds; ++s) {
        const std::uint64_t seed = opt.base_seed + s;
        SplitMix64 rng(seed ^ 0x5DEECE66DULL);
        const SeedInstance inst = derive_instance(rng, opt);
        const std::size_t n_test_u = 3, n_test_v = 2;

        if (selected(opt.selection, "thm1")) {
            SplitMix64 r(seed * 2654435761ULL + 1);
            const kernels::GramMatrix joint = random_pd_gram(r, inst.m + n_test_u);
            DenseMatrix km(inst.m, inst.m), kt(n_test_u, inst.m);
            for (std::size_t i = 0; i < inst.m; ++i)
                for (std::size_t j = 0; j < inst.m; ++j) km(i, j) = joint.matrix()(i, j);
            for (std::size_t i = 0; i < n_test_u; ++i)
                for (std::size_t j = 0; j < inst.m; ++j) kt(i, j) = joint.matrix()(inst.m + i, j);
            const kernels::GramMatrix k(std::move(km), kernels::GramSource::Precomputed);
            const kernels::GramMatrix g = random_pd_gram(r, inst.q);
            const models::LabelMatrix y(random_matrix(r, inst.m, inst.q));
            TheoremCheckResult res = check_theorem1(k, g, y, inst.lambda_u, kt);
            res.seed = seed;
            out.push_back(res);
            if (opt.include_negative_controls) {
                TheoremCheckResult neg =
                    check_theorem1_singular_control(k, drop_smallest_eigenvalue(g), y, inst.lambda_u, kt);
                neg.seed = seed;
                out.push_back(neg);
            }
        }
        if (selected(opt.selection, "thm2")) {
            SplitMix64 r(seed * 2654435761ULL + 2);
            const kernels::GramMatrix k = random_pd_gram(r, inst.m);
            const kernels::GramMatrix g = random_pd_gram(r, inst.q);
            const models::LabelMatrix y(random_matrix(r, inst.m, inst.q));
            TheoremCheckResult res = check_theorem2(k, g, y, inst.lambda_u, inst.lambda_v);
            res.seed = seed;
            out.push_back(res);
            if (opt.include_negative_controls) {
                TheoremCheckResult neg =
                    check_theorem2(k, g, y, inst.lambda_u, inst.lambda_v, 2.0, true);
                neg.seed = seed;
                out.push_back(neg);
            }
        }
        if (selected(opt.selection, "thm3")) {
            SplitMix64 r(seed * 2654435761ULL + 3);
            const kernels::GramMatrix joint_k = random_pd_gram(r, inst.m + n_test_u);
            const kernels::GramMatrix joint_g = random_pd_gram(r, inst.q + n_test_v);
            DenseMatrix km(inst.m, inst.m), kt(n_test_u, inst.m);
            for (std::size_t i = 0; i < inst.m; ++i)
                for (std::size_t j = 0; j < inst.m; ++j) km(i, j) = joint_k.matrix()(i, j);
            for (std::size_t i = 0; i < n_test_u; ++i)
                for (std::size_t j = 0; j < inst.m; ++j) kt(i, j) = joint_k.matrix()(inst.m + i, j);
            DenseMatrix gm(inst.q, inst.q), gt(n_test_v, inst.q);
            for (std::size_t i = 0; i < inst.q; ++i)
                for (std::size_t j = 0; j < inst.q; ++j) gm(i, j) = joint_g.matrix()(i, j);
            for (std::size_t i = 0; i < n_test_v; ++i)
                for (std::size_t j = 0; j < inst.q; ++j) gt(i, j) = joint_g.matrix()(inst.q + i, j);
            const kernels::GramMatrix k(std::move(km), kernels::GramSource::Precomputed);
            const kernels::GramMatrix g(std::move(gm), kernels::GramSource::Precomputed);
            const models::LabelMatrix y(random_matrix(r, inst.m, inst.q));
            TheoremCheckResult res = check_theorem3(k, g, y, inst.lambda_u, inst.lambda_v, kt, gt);
            res.seed = seed;
            out.push_back(res);
            if (opt.include_negative_controls) {
                TheoremCheckResult neg =
                    check_theorem3_insample_control(k, g, y, inst.lambda_u, inst.lambda_v);
                neg.seed = seed;
                out.push_back(neg);
            }
        }
        if (selected(opt.selection, "smoother")) {
            SplitMix64 r(seed * 2654435761ULL + 4);
            const double theta_u = r.next_log_uniform(0.1, 10.0);
            const double theta_v = r.next_log_uniform(0.1, 10.0);
            const models::LabelMatrix y(random_matrix(r, inst.m, inst.q));
            TheoremCheckResult res =
                check_smoother_theorem(inst.m, inst.q, theta_u, theta_v, inst.lambda_u, y);
            res.seed = seed;
            out.push_back(res);
            if (opt.include_negative_controls) {
                TheoremCheckResult neg =
                    check_smoother_control(inst.m, inst.q, theta_u, theta_v, inst.lambda_u, y, r);
                neg.seed = seed;
                out.push_back(neg);
            }
        }
        if (selected(opt.selection, "veckron")) {
            TheoremCheckResult res = check_vec_kron(seed * 2654435761ULL + 5, 8);
            res.seed = seed;
            out.push_back(res);
        }
        if (selected(opt.selection, "solver")) {
            TheoremCheckResult res =
                check_shifted_kron_solver(seed * 2654435761ULL + 6, inst.m, inst.q, inst.lambda_u);
            res.seed = seed;
            out.push_back(res);
        }
    }
    return out;
}

std::string report_csv(const std::vector<TheoremCheckResult>& results) {
    std::ostringstream os;
    os << "theorem,seed,m,q,lambda_u,lambda_v,max_abs_discrepancy,tolerance,pass,expect_violation,ok\n";
    char buf[64];
    for (const TheoremCheckResult& r : results) {
        os << r.theorem << ',' << r.seed << ',' << r.m << ',' << r.q << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.lambda_u);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.lambda_v);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.max_abs_discrepancy);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.tolerance);
        os << buf << ',' << (r.pass ? 1 : 0) << ',' << (r.expect_violation ? 1 : 0) << ','
           << (r.ok() ? 1 : 0) << '\n';
    }
    return os.str();
}

} // namespace pairkrr::verify
