#include "pairkrr/models.hpp"

#include "pairkrr/common.hpp"
#include "pairkrr/parallel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pairkrr::models {

std::string method_name(Method m) {
    switch (m) {
        case Method::IndependentTask: return "it";
        case Method::Kron: return "kron";
        case Method::Okkls: return "okkls";
        case Method::TwoStep: return "two-step";
        case Method::Filter: return "filter";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    if (name == "it") return Method::IndependentTask;
    if (name == "kron") return Method::Kron;
    if (name == "okkls") return Method::Okkls;
    if (name == "two-step") return Method::TwoStep;
    if (name == "filter") return Method::Filter;
    throw std::invalid_argument("unknown method: " + name);
}

Setting setting_from_name(const std::string& name) {
    if (name == "A") return Setting::A;
    if (name == "B") return Setting::B;
    if (name == "C") return Setting::C;
    if (name == "D") return Setting::D;
    throw std::invalid_argument("unknown setting: " + name + " (expected A, B, C or D)");
}

std::string setting_name(Setting s) {
    switch (s) {
        case Setting::A: return "A";
        case Setting::B: return "B";
        case Setting::C: return "C";
        case Setting::D: return "D";
    }
    return "?";
}

LabelMatrix::LabelMatrix(DenseMatrix y) : y_(std::move(y)) {
    y_.require_finite("label matrix");
}

namespace {

DenseMatrix reconstruct(const EigenDecomposition& e) { return e.reconstruct(); }

std::shared_ptr<const EigenDecomposition> shared_eig(const DenseMatrix& s) {
    return std::make_shared<const EigenDecomposition>(sym_eig(s));
}

DenseMatrix spectral_transform(const EigenDecomposition& ek, const EigenDecomposition& eg,
                               const DenseMatrix& y) {
    return matmul(matmul_at_b(ek.vectors, y), eg.vectors);
}

// Ahat = E .* W; E = U^T Y V is passed in so sweeps compute it once.
DenseMatrix hadamard(const DenseMatrix& e_base, const DenseMatrix& w) {
    DenseMatrix e = e_base;
    for (std::size_t i = 0; i < e.rows(); ++i)
        for (std::size_t j = 0; j < e.cols(); ++j) e(i, j) *= w(i, j);
    return e;
}

void check_label_dims(const kernels::GramMatrix& k, const LabelMatrix& y) {
    if (k.size() != y.instances())
        throw std::invalid_argument("instance kernel size " + std::to_string(k.size()) +
                                    " does not match label rows " + std::to_string(y.instances()));
}

} // namespace

DenseMatrix TrainedModel::dual_dense() const {
    if (coefficients) return *coefficients;
    if (spectral_coefficients && eig_k) {
        const DenseMatrix ua = matmul(eig_k->vectors, *spectral_coefficients);
        return eig_g ? matmul_a_bt(ua, eig_g->vectors) : ua;
    }
    throw std::invalid_argument("model has no dual coefficients (filter models predict only Setting A)");
}

DenseMatrix TrainedModel::training_kernel_u() const {
    if (!eig_k) throw std::invalid_argument("model stores no instance-kernel eigendecomposition");
    return reconstruct(*eig_k);
}

DenseMatrix TrainedModel::training_kernel_g() const {
    if (!eig_g) throw std::invalid_argument("model stores no task-kernel eigendecomposition");
    return reconstruct(*eig_g);
}

TrainedModel fit_it(const kernels::GramMatrix& k, const LabelMatrix& y, double lambda_u) {
    if (lambda_u < 0.0) throw std::invalid_argument("fit_it: lambda_u must be >= 0");
    check_label_dims(k, y);
    auto ek = shared_eig(k.matrix());

    const double sigma_max = ek->values.front();
    const double guard = 1e-12 * (sigma_max + lambda_u);
    for (double sigma : ek->values)
        if (!(sigma + lambda_u > guard))
            throw numeric_error("fit_it: singular system, eigenvalue " + std::to_string(sigma) +
                                " with lambda_u " + std::to_string(lambda_u));

    // A = U diag(1/(sigma+lambda)) U^T Y, kept as Ahat = diag(...) U^T Y
    DenseMatrix e = matmul_at_b(ek->vectors, y.matrix());
    for (std::size_t i = 0; i < e.rows(); ++i) {
        const double w = 1.0 / (ek->values[i] + lambda_u);
        for (std::size_t j = 0; j < e.cols(); ++j) e(i, j) *= w;
    }
    TrainedModel model;
    model.method = Method::IndependentTask;
    model.m = y.instances();
    model.q = y.tasks();
    model.spectral_coefficients = std::move(e);
    model.eig_k = std::move(ek);
    model.lambda_u = lambda_u;
    return model;
}

namespace {

TrainedModel fit_kron_with_eigs(std::shared_ptr<const EigenDecomposition> ek,
                                std::shared_ptr<const EigenDecomposition> eg, const LabelMatrix& y,
                                const DenseMatrix& e_base, double lambda, Method tag) {
    const std::size_t m = y.instances(), q = y.tasks();
    double d_max = 0.0;
    for (double sigma : ek->values)
        for (double s : eg->values) d_max = std::max(d_max, std::fabs(sigma * s + lambda));
    const double guard = 1e-12 * d_max;
    DenseMatrix w(m, q);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < q; ++j) {
            const double d = ek->values[i] * eg->values[j] + lambda;
            if (!(d > guard))
                throw numeric_error("fit_kron: singular shifted Kronecker system (sigma*s+lambda = " +
                                    std::to_string(d) + ")");
            w(i, j) = 1.0 / d;
        }
    TrainedModel model;
    model.method = tag;
    model.m = m;
    model.q = q;
    model.spectral_coefficients = hadamard(e_base, w);
    model.eig_k = std::move(ek);
    model.eig_g = std::move(eg);
    model.lambda = lambda;
    return model;
}

TrainedModel fit_two_step_with_eigs(std::shared_ptr<const EigenDecomposition> ek,
                                    std::shared_ptr<const EigenDecomposition> eg, const LabelMatrix& y,
                                    const DenseMatrix& e_base, double lambda_u, double lambda_v) {
    const std::size_t m = y.instances(), q = y.tasks();
    const double guard_u = 1e-12 * (ek->values.front() + lambda_u);
    for (double sigma : ek->values)
        if (!(sigma + lambda_u > guard_u))
            throw numeric_error("fit_two_step: singular instance factor (sigma+lambda_u = " +
                                std::to_string(sigma + lambda_u) + ")");
    const double guard_v = 1e-12 * (eg->values.front() + lambda_v);
    for (double s : eg->values)
        if (!(s + lambda_v > guard_v))
            throw numeric_error("fit_two_step: singular task factor (s+lambda_v = " +
                                std::to_string(s + lambda_v) + ")");
    DenseMatrix w(m, q);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < q; ++j)
            w(i, j) = 1.0 / ((ek->values[i] + lambda_u) * (eg->values[j] + lambda_v));
    TrainedModel model;
    model.method = Method::TwoStep;
    model.m = m;
    model.q = q;
    model.spectral_coefficients = hadamard(e_base, w);
    model.eig_k = std::move(ek);
    model.eig_g = std::move(eg);
    model.lambda_u = lambda_u;
    model.lambda_v = lambda_v;
    return model;
}

void check_pair_dims(const kernels::GramMatrix& k, const kernels::GramMatrix& g, const LabelMatrix& y) {
    check_label_dims(k, y);
    if (g.size() != y.tasks())
        throw std::invalid_argument("task kernel size " + std::to_string(g.size()) +
                                    " does not match label columns " + std::to_string(y.tasks()));
}

} // namespace

TrainedModel fit_kron(const kernels::GramMatrix& k, const kernels::GramMatrix& g, const LabelMatrix& y,
                      double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("fit_kron: lambda must be >= 0");
    check_pair_dims(k, g, y);
    auto ek = shared_eig(k.matrix());
    auto eg = shared_eig(g.matrix());
    const DenseMatrix e = spectral_transform(*ek, *eg, y.matrix());
    return fit_kron_with_eigs(std::move(ek), std::move(eg), y, e, lambda, Method::Kron);
}

TrainedModel fit_okkls(const kernels::GramMatrix& k, const kernels::GramMatrix& g, const LabelMatrix& y) {
    check_pair_dims(k, g, y);
    auto ek = shared_eig(k.matrix());
    auto eg = shared_eig(g.matrix());
    const DenseMatrix e = spectral_transform(*ek, *eg, y.matrix());
    return fit_kron_with_eigs(std::move(ek), std::move(eg), y, e, 0.0, Method::Okkls);
}

TrainedModel fit_two_step(const kernels::GramMatrix& k, const kernels::GramMatrix& g, const LabelMatrix& y,
                          double lambda_u, double lambda_v) {
    if (lambda_u < 0.0 || lambda_v < 0.0)
        throw std::invalid_argument("fit_two_step: lambdas must be >= 0");
    check_pair_dims(k, g, y);
    auto ek = shared_eig(k.matrix());
    auto eg = shared_eig(g.matrix());
    const DenseMatrix e = spectral_transform(*ek, *eg, y.matrix());
    return fit_two_step_with_eigs(std::move(ek), std::move(eg), y, e, lambda_u, lambda_v);
}

TrainedModel fit_filter(const LabelMatrix& y, const FilterWeights& w) {
    for (double a : {w.a1, w.a2, w.a3, w.a4})
        if (!(a >= 0.0 && a <= 1.0))
            throw std::invalid_argument("fit_filter: weights must lie in [0,1], got " + std::to_string(a));
    TrainedModel model;
    model.method = Method::Filter;
    model.m = y.instances();
    model.q = y.tasks();
    model.weights = w;
    model.labels = y.matrix();
    return model;
}

DenseMatrix predict(const TrainedModel& model, const DenseMatrix& k_test, const DenseMatrix& g_test) {
    if (!model.has_dual())
        throw std::invalid_argument("model has no dual coefficients (filter models predict only Setting A)");
    if (k_test.cols() != model.m)
        throw std::invalid_argument("predict: K_test must have " + std::to_string(model.m) + " columns");
    if (g_test.cols() != model.q)
        throw std::invalid_argument("predict: G_test must have " + std::to_string(model.q) + " columns");
    if (model.spectral_coefficients && model.eig_k) {
        // F = (K_test U) Ahat (G_test V)^T without materializing A
        const DenseMatrix left = matmul(matmul(k_test, model.eig_k->vectors), *model.spectral_coefficients);
        if (model.eig_g) return matmul_a_bt(left, matmul(g_test, model.eig_g->vectors));
        return matmul_a_bt(left, g_test);
    }
    return matmul_a_bt(matmul(k_test, *model.coefficients), g_test);
}

DenseMatrix predict_setting(const TrainedModel& model, Setting setting,
                            const std::optional<DenseMatrix>& k_test,
                            const std::optional<DenseMatrix>& g_test) {
    const bool new_instances = setting == Setting::B || setting == Setting::D;
    const bool new_tasks = setting == Setting::C || setting == Setting::D;

    if (model.method == Method::Filter) {
        if (setting != Setting::A)
            throw std::invalid_argument("filter models predict only Setting A");
        return filter_predict_all(model);
    }
    if (model.method == Method::IndependentTask && new_tasks)
        throw std::invalid_argument("independent-task models do not generalize to new tasks (Settings C/D)");

    if (new_instances && !k_test)
        throw std::invalid_argument("Setting " + setting_name(setting) + " requires test instance kernel rows");
    if (new_tasks && !g_test)
        throw std::invalid_argument("Setting " + setting_name(setting) + " requires test task kernel rows");

    DenseMatrix ku = new_instances ? *k_test : (k_test ? *k_test : model.training_kernel_u());
    DenseMatrix gv = [&]() {
        if (new_tasks) return *g_test;
        if (g_test) return *g_test;
        if (model.method == Method::IndependentTask) return DenseMatrix::identity(model.q);
        return model.training_kernel_g();
    }();
    return predict(model, ku, gv);
}

DenseMatrix linear_filter_apply(const DenseMatrix& y, double a1, double a2, double a3, double a4) {
    const std::size_t m = y.rows(), q = y.cols();
    std::vector<double> col_mean(q, 0.0), row_mean(m, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < q; ++j) {
            col_mean[j] += y(i, j);
            row_mean[i] += y(i, j);
            grand += y(i, j);
        }
    for (double& v : col_mean) v /= static_cast<double>(m);
    for (double& v : row_mean) v /= static_cast<double>(q);
    grand /= static_cast<double>(m) * static_cast<double>(q);

    DenseMatrix f(m, q);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < q; ++j)
            f(i, j) = a1 * y(i, j) + a2 * col_mean[j] + a3 * row_mean[i] + a4 * grand;
    return f;
}

namespace {

const TrainedModel& require_filter(const TrainedModel& model) {
    if (model.method != Method::Filter || !model.weights || !model.labels)
        throw std::invalid_argument("operation requires a filter model");
    return model;
}

double filter_shrinkage(const TrainedModel& model) {
    const FilterWeights& w = *model.weights;
    const double m = static_cast<double>(model.m), q = static_cast<double>(model.q);
    return w.a1 + w.a2 / m + w.a3 / q + w.a4 / (m * q);
}

} // namespace

double filter_predict(const TrainedModel& model, std::size_t i, std::size_t j) {
    require_filter(model);
    if (i >= model.m || j >= model.q)
        throw std::invalid_argument("filter_predict: index out of range");
    return filter_predict_all(model)(i, j);
}

DenseMatrix filter_predict_all(const TrainedModel& model) {
    require_filter(model);
    const FilterWeights& w = *model.weights;
    return linear_filter_apply(*model.labels, w.a1, w.a2, w.a3, w.a4);
}

DenseMatrix filter_loo(const TrainedModel& model) {
    require_filter(model);
    const double c = filter_shrinkage(model);
    if (!(c < 1.0 - 1e-12))
        throw numeric_error("filter_loo: shrinkage factor c = " + std::to_string(c) +
                            " leaves a degenerate 1-c denominator");
    const DenseMatrix& y = *model.labels;
    DenseMatrix f = filter_predict_all(model);
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) f(i, j) = (f(i, j) - c * y(i, j)) / (1.0 - c);
    return f;
}

FilterTuneResult tune_filter(const LabelMatrix& y, double grid_step) {
    if (!(grid_step > 0.0 && grid_step <= 0.5))
        throw std::invalid_argument("tune_filter: grid_step must be in (0, 0.5]");
    std::vector<double> axis;
    for (std::size_t k = 0;; ++k) {
        double v = static_cast<double>(k) * grid_step;
        if (v > 1.0 + 1e-12) break;
        if (std::fabs(v - 1.0) <= 1e-12) v = 1.0;
        axis.push_back(v);
    }
    if (axis.back() != 1.0) axis.push_back(1.0);

    const DenseMatrix& ym = y.matrix();
    const std::size_t m = ym.rows(), q = ym.cols();
    const double md = static_cast<double>(m), qd = static_cast<double>(q);

    std::vector<double> col_mean(q, 0.0), row_mean(m, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < q; ++j) {
            col_mean[j] += ym(i, j);
            row_mean[i] += ym(i, j);
            grand += ym(i, j);
        }
    for (double& v : col_mean) v /= md;
    for (double& v : row_mean) v /= qd;
    grand /= md * qd;

    const std::size_t n = axis.size();
    const std::size_t total = n * n * n * n;
    std::vector<double> mse(total);

    // cells are independent; evaluated in parallel, selected serially below
    parallel::parallel_for(total, [&](std::size_t cell) {
        std::size_t rest = cell;
        const double a4 = axis[rest % n];
        rest /= n;
        const double a3 = axis[rest % n];
        rest /= n;
        const double a2 = axis[rest % n];
        rest /= n;
        const double a1 = axis[rest % n];
        const double c = a1 + a2 / md + a3 / qd + a4 / (md * qd);
        if (!(c < 1.0 - 1e-12)) {
            mse[cell] = std::numeric_limits<double>::infinity();
            return;
        }
        double err = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < q; ++j) {
                const double fij = a1 * ym(i, j) + a2 * col_mean[j] + a3 * row_mean[i] + a4 * grand;
                const double loo = (fij - c * ym(i, j)) / (1.0 - c);
                const double d = loo - ym(i, j);
                err += d * d;
            }
        mse[cell] = err / (md * qd);
    });

    // lexicographic scan order makes the first strict minimum the tie-break winner
    std::size_t best = 0;
    for (std::size_t cell = 1; cell < total; ++cell)
        if (mse[cell] < mse[best]) best = cell;

    std::size_t rest = best;
    FilterWeights w;
    w.a4 = axis[rest % n];
    rest /= n;
    w.a3 = axis[rest % n];
    rest /= n;
    w.a2 = axis[rest % n];
    rest /= n;
    w.a1 = axis[rest % n];
    return FilterTuneResult{w, mse[best]};
}

std::vector<SweepPoint> sweep(const kernels::GramMatrix& k, const kernels::GramMatrix* g,
                              const LabelMatrix& y, Method method,
                              const std::vector<std::array<double, 2>>& grid) {
    if (grid.empty()) throw std::invalid_argument("sweep: empty hyperparameter grid");
    const bool needs_g = method == Method::Kron || method == Method::Okkls || method == Method::TwoStep;
    if (method == Method::Filter) throw std::invalid_argument("sweep: filter models are tuned via tune_filter");
    if (needs_g && g == nullptr) throw std::invalid_argument("sweep: method requires a task kernel");

    auto ek = shared_eig(k.matrix());
    std::shared_ptr<const EigenDecomposition> eg;
    if (needs_g) eg = shared_eig(g->matrix());

    // the spectral image of Y is hyperparameter-independent; compute it once
    const DenseMatrix e_base = needs_g ? spectral_transform(*ek, *eg, y.matrix())
                                       : matmul_at_b(ek->vectors, y.matrix());

    std::vector<SweepPoint> points(grid.size());
    parallel::parallel_for(grid.size(), [&](std::size_t idx) {
        SweepPoint& p = points[idx];
        p.values = grid[idx];
        try {
            switch (method) {
                case Method::IndependentTask: {
                    const double lambda_u = p.values[0];
                    if (lambda_u < 0.0) throw std::invalid_argument("lambda_u must be >= 0");
                    const double guard = 1e-12 * (ek->values.front() + lambda_u);
                    for (double sigma : ek->values)
                        if (!(sigma + lambda_u > guard))
                            throw numeric_error("singular system at lambda_u = " + std::to_string(lambda_u));
                    DenseMatrix e = e_base;
                    for (std::size_t i = 0; i < e.rows(); ++i) {
                        const double wv = 1.0 / (ek->values[i] + lambda_u);
                        for (std::size_t j = 0; j < e.cols(); ++j) e(i, j) *= wv;
                    }
                    TrainedModel model;
                    model.method = Method::IndependentTask;
                    model.m = y.instances();
                    model.q = y.tasks();
                    model.spectral_coefficients = std::move(e);
                    model.eig_k = ek;
                    model.lambda_u = lambda_u;
                    p.model = std::move(model);
                    break;
                }
                case Method::Kron:
                case Method::Okkls:
                    p.model = fit_kron_with_eigs(ek, eg, y, e_base,
                                                 method == Method::Okkls ? 0.0 : p.values[0], method);
                    break;
                case Method::TwoStep:
                    p.model = fit_two_step_with_eigs(ek, eg, y, e_base, p.values[0], p.values[1]);
                    break;
                case Method::Filter:
                    break;
            }
        } catch (const std::exception& ex) {
            p.model.reset();
            p.error = ex.what();
        }
    });
    return points;
}

double training_mse(const TrainedModel& model, const LabelMatrix& y) {
    const DenseMatrix f = predict_setting(model, Setting::A);
    if (!same_shape(f, y.matrix()))
        throw std::invalid_argument("training_mse: prediction shape does not match labels");
    double err = 0.0;
    for (std::size_t e = 0; e < f.size(); ++e) {
        const double d = f.data()[e] - y.matrix().data()[e];
        err += d * d;
    }
    return err / static_cast<double>(f.size());
}

} // namespace pairkrr::models
