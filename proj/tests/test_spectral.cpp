#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pairkrr/common.hpp"
#include "pairkrr/kernels.hpp"
#include "pairkrr/kron.hpp"
#include "pairkrr/linalg.hpp"
#include "pairkrr/models.hpp"
#include "pairkrr/rng.hpp"
#include "pairkrr/spectral.hpp"

#include "oracles.hpp"

#include <cmath>

using namespace pairkrr;
using namespace pairkrr::spectral;
using kernels::GramMatrix;
using kernels::GramSource;

namespace {
GramMatrix wrap(DenseMatrix m) { return GramMatrix(std::move(m), GramSource::Precomputed); }
} // namespace

TEST_CASE("eval_filter formulas") {
    CHECK(eval_filter(SpectralFilter::two_step(1.0, 1.0), 0.0, 0.0) == doctest::Approx(1.0));
    CHECK(eval_filter(SpectralFilter::kron_tikhonov(4.0), 2.0, 3.0) == doctest::Approx(0.1));
    CHECK(eval_filter(SpectralFilter::two_step(0.5, 2.0), 1.0, 1.0) == doctest::Approx(2.0 / 9.0));
    CHECK(eval_filter(SpectralFilter::tikhonov(0.5), 1.5, 99.0) == doctest::Approx(0.5));
    CHECK(eval_filter(SpectralFilter::independent_task(1.0), 1.0, 2.0) == doctest::Approx(0.25));
    CHECK_THROWS_AS(eval_filter(SpectralFilter::independent_task(1.0), 1.0, 0.0), numeric_error);
    CHECK_THROWS_AS(SpectralFilter::tikhonov(0.0), std::invalid_argument);
    CHECK_THROWS_AS(SpectralFilter::two_step(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("filtered_fit reproduces the closed-form fits") {
    SplitMix64 rng(3);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t m = 2 + rng.next_index(0, 6), q = 2 + rng.next_index(0, 6);
        const GramMatrix k = wrap(oracles::random_spd(rng, m));
        const GramMatrix g = wrap(oracles::random_spd(rng, q));
        const models::LabelMatrix y(oracles::random_matrix(rng, m, q));
        const double lambda = rng.next_log_uniform(1e-2, 10.0);
        const double lu = rng.next_log_uniform(1e-2, 10.0), lv = rng.next_log_uniform(1e-2, 10.0);

        const DenseMatrix a_kron = filtered_fit(k, g, y.matrix(), SpectralFilter::kron_tikhonov(lambda));
        const models::TrainedModel kron_fit = models::fit_kron(k, g, y, lambda);
        CHECK(max_abs_diff(a_kron, kron_fit.dual_dense()) <= 1e-10);

        const DenseMatrix a_ts = filtered_fit(k, g, y.matrix(), SpectralFilter::two_step(lu, lv));
        const models::TrainedModel ts_fit = models::fit_two_step(k, g, y, lu, lv);
        CHECK(max_abs_diff(a_ts, ts_fit.dual_dense()) <= 1e-10);
    }
}

TEST_CASE("filtered_fit identity-kernel closed form") {
    SplitMix64 rng(5);
    const DenseMatrix y = oracles::random_matrix(rng, 3, 2);
    const DenseMatrix a = filtered_fit(wrap(DenseMatrix::identity(3)), wrap(DenseMatrix::identity(2)), y,
                                       SpectralFilter::two_step(0.5, 2.0));
    CHECK(max_abs_diff(a, (1.0 / (1.5 * 3.0)) * y) <= 1e-12);
}

TEST_CASE("independent-task filter equals fit_it on Setting B rows") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t m = 3 + rng.next_index(0, 4), q = 2 + rng.next_index(0, 4);
        const DenseMatrix joint = oracles::random_spd(rng, m + 2);
        DenseMatrix km(m, m), kt(2, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) km(i, j) = joint(i, j);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < m; ++j) kt(i, j) = joint(m + i, j);
        const GramMatrix k = wrap(km);
        const GramMatrix g = wrap(oracles::random_spd(rng, q));  // full rank
        const models::LabelMatrix y(oracles::random_matrix(rng, m, q));
        const double lu = rng.next_log_uniform(1e-2, 10.0);

        const DenseMatrix a_f = filtered_fit(k, g, y.matrix(), SpectralFilter::independent_task(lu));
        const DenseMatrix f_filter = matmul(matmul(kt, a_f), g.matrix());

        const models::TrainedModel it = models::fit_it(k, y, lu);
        const DenseMatrix f_it = models::predict_setting(it, models::Setting::B, kt);
        CHECK(max_abs_diff(f_filter, f_it) <= 1e-8 * std::max(max_abs(f_it), 1e-300));
    }
}

TEST_CASE("two-step filter factorizes into Tikhonov factors") {
    const double lu = 0.37, lv = 2.9;
    const SpectralFilter ts = SpectralFilter::two_step(lu, lv);
    const SpectralFilter fu = SpectralFilter::tikhonov(lu);
    const SpectralFilter fv = SpectralFilter::tikhonov(lv);
    SplitMix64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const double sigma = rng.next_log_uniform(1e-8, 1e2);
        const double s = rng.next_log_uniform(1e-8, 1e2);
        const double lhs = eval_filter(ts, sigma, s);
        const double rhs = eval_filter(fu, sigma, 0.0) * eval_filter(fv, s, 0.0);
        CHECK(std::fabs(lhs - rhs) <= 1e-14 * std::fabs(lhs));
    }
}

TEST_CASE("hat_matrix identities") {
    SplitMix64 rng(13);
    SUBCASE("identity kernels, kron tikhonov lambda 1 gives H = I/2") {
        const DenseMatrix h = hat_matrix(wrap(DenseMatrix::identity(2)), wrap(DenseMatrix::identity(2)),
                                         SpectralFilter::kron_tikhonov(1.0));
        CHECK(max_abs_diff(h, 0.5 * DenseMatrix::identity(4)) <= 1e-12);
    }
    SUBCASE("H vec(Y) equals vec(K A G) for the filtered fit") {
        const GramMatrix k = wrap(oracles::random_spd(rng, 3));
        const GramMatrix g = wrap(oracles::random_spd(rng, 2));
        const DenseMatrix y = oracles::random_matrix(rng, 3, 2);
        const SpectralFilter f = SpectralFilter::kron_tikhonov(0.7);
        const DenseMatrix h = hat_matrix(k, g, f);
        const std::vector<double> yv = vec(y);
        std::vector<double> hy(6, 0.0);
        for (std::size_t r = 0; r < 6; ++r)
            for (std::size_t c = 0; c < 6; ++c) hy[r] += h(r, c) * yv[c];

        const DenseMatrix a = filtered_fit(k, g, y, f);
        const DenseMatrix kag = matmul(matmul(k.matrix(), a), g.matrix());
        CHECK(max_abs_diff(unvec(hy, 3, 2), kag) <= 1e-10);
    }
    SUBCASE("large lambda shrinks H towards (1/lambda) Gamma") {
        const GramMatrix k = wrap(oracles::random_spd(rng, 2));
        const GramMatrix g = wrap(oracles::random_spd(rng, 2));
        const double lambda = 1e8;
        const DenseMatrix h = hat_matrix(k, g, SpectralFilter::kron_tikhonov(lambda));
        // H - Gamma/lambda = -Gamma^2 / (lambda (Gamma + lambda)), second order in 1/lambda
        const DenseMatrix gamma = oracles::kron_loop(g.matrix(), k.matrix());
        const double second_order = max_abs(gamma) * max_abs(gamma) * 4.0 / (lambda * lambda);
        CHECK(max_abs_diff(h, (1.0 / lambda) * gamma) <= second_order + 1e-18);
        CHECK(max_abs(h) <= max_abs(gamma) / lambda * 1.001);
    }
    SUBCASE("hat matrices are symmetric PSD with spectral norm below 1") {
        const GramMatrix k = wrap(oracles::random_spd(rng, 3));
        const GramMatrix g = wrap(oracles::random_spd(rng, 3));
        for (const SpectralFilter& f :
             {SpectralFilter::kron_tikhonov(0.3), SpectralFilter::two_step(0.4, 0.9)}) {
            const DenseMatrix h = hat_matrix(k, g, f);
            CHECK(max_abs_diff(h, transpose(h)) <= 1e-10);
            const EigenDecomposition eig = sym_eig(h);
            CHECK(eig.values.front() <= 1.0 + 1e-10);
            CHECK(eig.values.back() >= -1e-10);
        }
    }
    SUBCASE("densification cap") {
        const GramMatrix big = wrap(DenseMatrix::identity(70));
        CHECK_THROWS_AS(hat_matrix(big, big, SpectralFilter::kron_tikhonov(1.0)), data_error);
    }
}

TEST_CASE("admissibility: tikhonov passes with unit constants") {
    const AdmissibilityReport rep =
        admissibility_check(FilterKind::Tikhonov, 1.0, 1.0, 1.0, default_nu_list(), 150);
    CHECK(rep.pass);
    CHECK(rep.d_hat < 1.0);
    CHECK(rep.b_hat <= 1.0 + 1e-12);
    CHECK(rep.gamma_hat < 1.0);
    CHECK(rep.nu_bar == doctest::Approx(1.0));
    for (const NuProbe& p : rep.nu_probes) {
        CHECK(p.within_bound);
        CHECK(p.gamma_nu_hat <= 1.0 + 1e-9);
        CHECK_FALSE(p.qualification_exceeded);
    }
}

TEST_CASE("admissibility: kron tikhonov matches tikhonov") {
    const AdmissibilityReport rep =
        admissibility_check(FilterKind::KronTikhonov, 2.0, 1.0, 1.0, {0.25, 0.5, 1.0}, 120);
    CHECK(rep.pass);
}

TEST_CASE("admissibility: two-step passes up to nu = 1/2 and diverges beyond") {
    const AdmissibilityReport rep =
        admissibility_check(FilterKind::TwoStep, 1.0, 1.0, 1.0, default_nu_list(), 160);
    CHECK(rep.pass);
    CHECK(rep.nu_bar == doctest::Approx(0.5));
    CHECK(rep.gamma_nu_const == doctest::Approx(2.0));
    for (const NuProbe& p : rep.nu_probes) {
        if (p.nu <= 0.5 + 1e-12) {
            CHECK(p.within_bound);
            CHECK(p.gamma_nu_hat <= 2.0 + 1e-9);
        } else {
            // beyond the qualification the sup grows without bound as lambda -> 0
            CHECK(p.qualification_exceeded);
            for (std::size_t i = 1; i < p.sup_by_lambda.size(); ++i)
                CHECK(p.sup_by_lambda[i] >= p.sup_by_lambda[i - 1] * (1.0 - 1e-9));
            CHECK(p.sup_by_lambda.back() > 10.0 * p.sup_by_lambda.front());
        }
    }
}

TEST_CASE("admissibility: factorization constants loosen the two-step bound to 2ab") {
    const AdmissibilityReport rep =
        admissibility_check(FilterKind::TwoStep, 1.0, 1.5, 2.0, {0.25, 0.5}, 120);
    CHECK(rep.gamma_nu_const == doctest::Approx(6.0));
    CHECK(rep.pass);
}

TEST_CASE("admissibility argument validation") {
    CHECK_THROWS_AS(admissibility_check(FilterKind::Tikhonov, 0.0, 1.0, 1.0, {0.5}, 120),
                    std::invalid_argument);
    CHECK_THROWS_AS(admissibility_check(FilterKind::Tikhonov, 1.0, 0.5, 1.0, {0.5}, 120),
                    std::invalid_argument);
    CHECK_THROWS_AS(admissibility_check(FilterKind::Tikhonov, 1.0, 1.0, 1.0, {0.5}, 50),
                    std::invalid_argument);
    CHECK_THROWS_AS(admissibility_check(FilterKind::Tikhonov, 1.0, 1.0, 1.0, {1.5}, 120),
                    std::invalid_argument);
    CHECK_THROWS_AS(admissibility_check(FilterKind::IndependentTask, 1.0, 1.0, 1.0, {0.5}, 120),
                    std::invalid_argument);
}

TEST_CASE("empirical kappa bound") {
    const GramMatrix k = wrap(DenseMatrix{{4.0, 0.0}, {0.0, 1.0}});
    const GramMatrix g = wrap(DenseMatrix{{9.0}});
    CHECK(empirical_kappa(k, g) == doctest::Approx(6.0));
}
