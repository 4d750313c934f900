#include "pairkrr/spectral.hpp"

#include "pairkrr/common.hpp"
#include "pairkrr/kron.hpp"
#include "pairkrr/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pairkrr::spectral {

std::string filter_kind_name(FilterKind k) {
    switch (k) {
        case FilterKind::Tikhonov: return "tikhonov";
        case FilterKind::KronTikhonov: return "kron_tikhonov";
        case FilterKind::TwoStep: return "two_step";
        case FilterKind::IndependentTask: return "independent_task";
    }
    return "unknown";
}

FilterKind filter_kind_from_name(const std::string& name) {
    if (name == "tikhonov") return FilterKind::Tikhonov;
    if (name == "kron_tikhonov") return FilterKind::KronTikhonov;
    if (name == "two_step") return FilterKind::TwoStep;
    if (name == "independent_task") return FilterKind::IndependentTask;
    throw std::invalid_argument("unknown filter kind: " + name);
}

SpectralFilter SpectralFilter::tikhonov(double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("tikhonov filter requires lambda > 0");
    return SpectralFilter(FilterKind::Tikhonov, lambda, 0.0, 0.0);
}

SpectralFilter SpectralFilter::kron_tikhonov(double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("kron_tikhonov filter requires lambda > 0");
    return SpectralFilter(FilterKind::KronTikhonov, lambda, 0.0, 0.0);
}

SpectralFilter SpectralFilter::two_step(double lambda_u, double lambda_v) {
    if (!(lambda_u > 0.0) || !(lambda_v > 0.0))
        throw std::invalid_argument("two_step filter requires lambda_u > 0 and lambda_v > 0");
    return SpectralFilter(FilterKind::TwoStep, lambda_u * lambda_v, lambda_u, lambda_v);
}

SpectralFilter SpectralFilter::independent_task(double lambda_u) {
    if (!(lambda_u > 0.0)) throw std::invalid_argument("independent_task filter requires lambda_u > 0");
    return SpectralFilter(FilterKind::IndependentTask, 0.0, lambda_u, 0.0);
}

double eval_filter(const SpectralFilter& f, double sigma, double s) {
    switch (f.kind()) {
        case FilterKind::Tikhonov:
            return 1.0 / (sigma + f.lambda());
        case FilterKind::KronTikhonov:
            return 1.0 / (sigma * s + f.lambda());
        case FilterKind::TwoStep:
            return 1.0 / ((sigma + f.lambda_u()) * (s + f.lambda_v()));
        case FilterKind::IndependentTask: {
            const double denom = (sigma + f.lambda_u()) * s;
            if (denom == 0.0)
                throw numeric_error("independent_task filter undefined at s = 0 (zero denominator)");
            return 1.0 / denom;
        }
    }
    throw std::invalid_argument("eval_filter: unknown filter kind");
}

DenseMatrix filtered_fit(const kernels::GramMatrix& k, const kernels::GramMatrix& g, const DenseMatrix& y,
                         const SpectralFilter& f) {
    if (k.size() != y.rows() || g.size() != y.cols())
        throw std::invalid_argument("filtered_fit: label matrix must be m x q for kernel sizes m, q");
    const EigenDecomposition ek = sym_eig(k.matrix());
    const EigenDecomposition eg = sym_eig(g.matrix());
    DenseMatrix e = matmul(matmul_at_b(ek.vectors, y), eg.vectors);
    for (std::size_t i = 0; i < e.rows(); ++i)
        for (std::size_t j = 0; j < e.cols(); ++j) e(i, j) *= eval_filter(f, ek.values[i], eg.values[j]);
    return matmul_a_bt(matmul(ek.vectors, e), eg.vectors);
}

DenseMatrix hat_matrix(const kernels::GramMatrix& k, const kernels::GramMatrix& g, const SpectralFilter& f) {
    const std::size_t m = k.size(), q = g.size(), n = m * q;
    if (n > densification_cap())
        throw data_error("hat_matrix: m*q = " + std::to_string(n) + " exceeds densification cap " +
                         std::to_string(densification_cap()));
    const EigenDecomposition ek = sym_eig(k.matrix());
    const EigenDecomposition eg = sym_eig(g.matrix());
    const DenseMatrix w = kron(eg.vectors, ek.vectors);
    // scale column (j*m + i) by varsigma * filter, varsigma = sigma_i * s_j
    DenseMatrix scaled = w;
    for (std::size_t j = 0; j < q; ++j)
        for (std::size_t i = 0; i < m; ++i) {
            const double varsigma = ek.values[i] * eg.values[j];
            const double d = varsigma * eval_filter(f, ek.values[i], eg.values[j]);
            const std::size_t col = j * m + i;
            for (std::size_t row = 0; row < n; ++row) scaled(row, col) *= d;
        }
    return matmul_a_bt(scaled, w);
}

std::vector<double> default_nu_list() { return {0.1, 0.25, 0.5, 0.75, 0.9}; }

double empirical_kappa(const kernels::GramMatrix& k, const kernels::GramMatrix& g) {
    double dk = 0.0, dg = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) dk = std::max(dk, k.matrix()(i, i));
    for (std::size_t j = 0; j < g.size(); ++j) dg = std::max(dg, g.matrix()(j, j));
    return std::sqrt(std::max(dk, 0.0)) * std::sqrt(std::max(dg, 0.0));
}

namespace {

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    std::vector<double> g(count);
    if (count == 1) {
        g[0] = hi;
        return g;
    }
    const double step = std::log(hi / lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
    g.front() = lo;
    g.back() = hi;
    return g;
}

struct FilterProfile {
    double d_const, b_const, gamma_const, gamma_nu_const, nu_bar;
};

FilterProfile profile_for(FilterKind kind, double a, double b) {
    switch (kind) {
        case FilterKind::Tikhonov:
        case FilterKind::KronTikhonov:
            return {1.0, 1.0, 1.0, 1.0, 1.0};
        case FilterKind::TwoStep:
            return {1.0, 1.0, 1.0, 2.0 * a * b, 0.5};
        case FilterKind::IndependentTask:
            break;
    }
    throw std::invalid_argument("admissibility_check: no admissibility profile for filter kind " +
                                filter_kind_name(kind));
}

} // namespace

AdmissibilityReport admissibility_check(FilterKind kind, double kappa, double a, double b,
                                        const std::vector<double>& nu_list, std::size_t grid_size,
                                        double lambda_min) {
    if (!(kappa > 0.0)) throw std::invalid_argument("admissibility_check: kappa must be > 0");
    if (a < 1.0 || b < 1.0) throw std::invalid_argument("admissibility_check: a and b must be >= 1");
    if (grid_size < 100) throw std::invalid_argument("admissibility_check: grid_size must be >= 100");
    for (double nu : nu_list)
        if (!(nu > 0.0 && nu <= 1.0))
            throw std::invalid_argument("admissibility_check: nu values must lie in (0, 1]");

    const FilterProfile prof = profile_for(kind, a, b);
    const double kappa2 = kappa * kappa;
    if (!(lambda_min > 0.0)) lambda_min = kappa2 * 1e-8;

    AdmissibilityReport rep;
    rep.kind = kind;
    rep.kappa = kappa;
    rep.a = a;
    rep.b = b;
    rep.d_const = prof.d_const;
    rep.b_const = prof.b_const;
    rep.gamma_const = prof.gamma_const;
    rep.gamma_nu_const = prof.gamma_nu_const;
    rep.nu_bar = prof.nu_bar;
    rep.grid_size = grid_size;

    std::vector<double> lambdas = log_grid(lambda_min, kappa2, grid_size);
    std::reverse(lambdas.begin(), lambdas.end());  // descending lambda
    rep.lambda_grid = lambdas;
    const std::vector<double> varsigmas = log_grid(kappa2 * 1e-10, kappa2, grid_size);

    const bool factorized = kind == FilterKind::TwoStep;
    const std::size_t n_nu = nu_list.size();

    // per-lambda suprema, filled in parallel and folded serially
    std::vector<double> d_sup(lambdas.size(), 0.0), b_sup(lambdas.size(), 0.0), g_sup(lambdas.size(), 0.0);
    std::vector<std::vector<double>> nu_sup(n_nu, std::vector<double>(lambdas.size(), 0.0));

    parallel::parallel_for(lambdas.size(), [&](std::size_t li) {
        const double lambda = lambdas[li];
        double ds = 0.0, bs = 0.0, gs = 0.0;
        std::vector<double> ns(n_nu, 0.0);
        for (double vs : varsigmas) {
            // candidate filter values for this (varsigma, lambda) cell
            double phis[9];
            std::size_t n_phi = 0;
            if (!factorized) {
                phis[n_phi++] = 1.0 / (vs + lambda);
            } else {
                const double sig_opts[3] = {std::sqrt(vs) / a, std::sqrt(vs), a * std::sqrt(vs)};
                const double lu_opts[3] = {std::sqrt(lambda) / b, std::sqrt(lambda), b * std::sqrt(lambda)};
                for (double sigma : sig_opts) {
                    const double s = vs / sigma;
                    for (double lu : lu_opts) {
                        const double lv = lambda / lu;
                        phis[n_phi++] = 1.0 / ((sigma + lu) * (s + lv));
                    }
                }
            }
            for (std::size_t pi = 0; pi < n_phi; ++pi) {
                const double phi = phis[pi];
                const double residual = std::fabs(1.0 - vs * phi);
                ds = std::max(ds, std::fabs(vs * phi));
                bs = std::max(bs, std::fabs(phi) * lambda);
                gs = std::max(gs, residual);
                for (std::size_t ni = 0; ni < n_nu; ++ni) {
                    const double t = std::pow(vs / lambda, nu_list[ni]) * residual;
                    ns[ni] = std::max(ns[ni], t);
                }
            }
        }
        d_sup[li] = ds;
        b_sup[li] = bs;
        g_sup[li] = gs;
        for (std::size_t ni = 0; ni < n_nu; ++ni) nu_sup[ni][li] = ns[ni];
    });

    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        rep.d_hat = std::max(rep.d_hat, d_sup[li]);
        rep.b_hat = std::max(rep.b_hat, b_sup[li]);
        rep.gamma_hat = std::max(rep.gamma_hat, g_sup[li]);
    }

    const double tol = 1.0 + rep.slack;
    bool pass = rep.d_hat <= prof.d_const * tol && rep.b_hat <= prof.b_const * tol &&
                rep.gamma_hat <= prof.gamma_const * tol;

    for (std::size_t ni = 0; ni < n_nu; ++ni) {
        NuProbe probe;
        probe.nu = nu_list[ni];
        probe.bound = prof.gamma_nu_const;
        probe.sup_by_lambda = nu_sup[ni];
        probe.gamma_nu_hat = *std::max_element(probe.sup_by_lambda.begin(), probe.sup_by_lambda.end());
        probe.within_bound = probe.gamma_nu_hat <= probe.bound * tol;
        // unbounded growth signature: sup increases monotonically as lambda
        // decreases and spans more than one decade over the grid
        bool monotone = true;
        for (std::size_t li = 1; li < probe.sup_by_lambda.size(); ++li)
            if (probe.sup_by_lambda[li] < probe.sup_by_lambda[li - 1] * (1.0 - 1e-9)) {
                monotone = false;
                break;
            }
        probe.qualification_exceeded =
            monotone && probe.sup_by_lambda.back() > probe.sup_by_lambda.front() * 10.0;
        if (probe.nu <= prof.nu_bar + 1e-12) pass = pass && probe.within_bound;
        rep.nu_probes.push_back(std::move(probe));
    }

    rep.pass = pass;
    return rep;
}

} // namespace pairkrr::spectral
