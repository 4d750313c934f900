// Compares the serial reference kernels against the OpenMP ones on the hot
// paths (matmul, RBF gram, Kronecker fit, filter tuning) and checks that both
// backends produce bit-identical results.

#include "pairkrr/dense_matrix.hpp"
#include "pairkrr/kernels.hpp"
#include "pairkrr/linalg.hpp"
#include "pairkrr/models.hpp"
#include "pairkrr/parallel.hpp"
#include "pairkrr/rng.hpp"
#include "pairkrr/verify.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

namespace {

using namespace pairkrr;
using Clock = std::chrono::steady_clock;

double time_best_of(int reps, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        fn();
        const auto t1 = Clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

struct Case {
    std::string name;
    std::function<DenseMatrix()> run;
};

} // namespace

int main() {
    SplitMix64 rng(42);
    const DenseMatrix a = verify::random_matrix(rng, 384, 384);
    const DenseMatrix b = verify::random_matrix(rng, 384, 384);
    const DenseMatrix feats = verify::random_matrix(rng, 700, 24);
    const kernels::GramMatrix k300 = verify::random_pd_gram(rng, 256);
    const kernels::GramMatrix g300 = verify::random_pd_gram(rng, 256);
    const models::LabelMatrix y300(verify::random_matrix(rng, 256, 256));
    const models::LabelMatrix ytune(verify::random_matrix(rng, 48, 32));

    const Case cases[] = {
        {"matmul 384x384", [&] { return matmul(a, b); }},
        {"gram_rbf 700x24", [&] { return kernels::gram_rbf(feats, 0.05).matrix(); }},
        {"fit_kron 256", [&] { return models::fit_kron(k300, g300, y300, 0.5).dual_dense(); }},
        {"tune_filter 48x32",
         [&] {
             const models::FilterTuneResult r = models::tune_filter(ytune, 0.1);
             DenseMatrix out(1, 4);
             out(0, 0) = r.weights.a1;
             out(0, 1) = r.weights.a2;
             out(0, 2) = r.weights.a3;
             out(0, 3) = r.weights.a4;
             return out;
         }},
    };

    std::printf("%-18s %12s %12s %9s %s\n", "kernel", "serial [s]", "openmp [s]", "speedup", "bit-identical");
    for (const Case& c : cases) {
        parallel::set_backend(parallel::Backend::Serial);
        const DenseMatrix ref = c.run();
        const double t_serial = time_best_of(3, [&] { c.run(); });

        double t_omp = t_serial;
        bool identical = true;
        if (parallel::openmp_compiled()) {
            parallel::set_backend(parallel::Backend::OpenMP);
            const DenseMatrix par = c.run();
            t_omp = time_best_of(3, [&] { c.run(); });
            identical = max_abs_diff(ref, par) == 0.0;
        }
        std::printf("%-18s %12.4f %12.4f %8.2fx %s\n", c.name.c_str(), t_serial, t_omp, t_serial / t_omp,
                    identical ? "yes" : "NO");
    }
    if (parallel::openmp_compiled())
        std::printf("threads available: %d\n", parallel::max_threads());
    else
        std::printf("built without OpenMP; serial backend only\n");
    return 0;
}
