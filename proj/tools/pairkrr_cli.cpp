// Command-line front end: fit, predict, sweep, tune-filter, verify.
//
// Exit codes: 0 success, 2 usage error, 3 data error (ragged CSV, non-PSD
// kernel, bad model file), 4 numeric error (singular system).

#include "pairkrr/common.hpp"
#include "pairkrr/io.hpp"
#include "pairkrr/kernels.hpp"
#include "pairkrr/models.hpp"
#include "pairkrr/spectral.hpp"
#include "pairkrr/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace pairkrr;

struct KernelSideArgs {
    std::string kernel_csv;    // precomputed gram
    std::string features_csv;  // build from features
    std::string kind;          // linear|rbf|gip|smoother
    double gamma = 0.0;
    bool gamma_set = false;
    double theta = 0.0;
    bool theta_set = false;
};

void add_kernel_side(CLI::App* cmd, KernelSideArgs& args, const std::string& side) {
    cmd->add_option("--kernel-" + side, args.kernel_csv, "precomputed Gram matrix CSV for side " + side);
    cmd->add_option("--features-" + side, args.features_csv, "feature matrix CSV for side " + side);
    cmd->add_option("--kernel-kind-" + side, args.kind, "kernel kind: linear|rbf|gip|smoother");
    cmd->add_option("--gamma-" + side, args.gamma, "rbf/gip bandwidth")->each([&args](const std::string&) {
        args.gamma_set = true;
    });
    cmd->add_option("--theta-" + side, args.theta, "smoother kernel theta")->each([&args](const std::string&) {
        args.theta_set = true;
    });
}

struct BuiltKernel {
    kernels::GramMatrix gram;
    kernels::KernelConfig config;
};

// Builds one side's Gram matrix. `size` is the required object count; the GIP
// kernel draws its profiles from the label matrix.
BuiltKernel build_kernel(const KernelSideArgs& args, const DenseMatrix& labels, bool instance_side,
                         std::size_t size, const io::MatrixFileOptions& csv) {
    kernels::KernelConfig cfg;
    if (!args.kernel_csv.empty()) {
        const DenseMatrix raw = io::load_matrix(args.kernel_csv, csv);
        kernels::GramMatrix gram = kernels::validate_psd(raw);
        if (gram.size() != size)
            throw data_error("kernel file " + args.kernel_csv + " has size " + std::to_string(gram.size()) +
                             ", expected " + std::to_string(size));
        cfg.kind = kernels::GramSource::Precomputed;
        return {std::move(gram), cfg};
    }
    if (args.kind.empty())
        throw CLI::ValidationError("--kernel-" + std::string(instance_side ? "u" : "v") +
                                   " or --kernel-kind-" + (instance_side ? "u" : "v") + " is required");
    if (args.kind == "linear" || args.kind == "rbf") {
        if (args.features_csv.empty())
            throw CLI::ValidationError("kernel kind '" + args.kind + "' requires --features-" +
                                       (instance_side ? "u" : "v"));
        const DenseMatrix x = io::load_matrix(args.features_csv, csv);
        if (x.rows() != size)
            throw data_error("feature file " + args.features_csv + " has " + std::to_string(x.rows()) +
                             " rows, expected " + std::to_string(size));
        if (args.kind == "linear") {
            cfg.kind = kernels::GramSource::Linear;
            return {kernels::gram_linear(x), cfg};
        }
        const double gamma = args.gamma_set ? args.gamma : 1.0 / static_cast<double>(x.cols());
        cfg.kind = kernels::GramSource::Rbf;
        cfg.gamma = gamma;
        return {kernels::gram_rbf(x, gamma), cfg};
    }
    if (args.kind == "gip") {
        const auto axis = instance_side ? kernels::GipAxis::Rows : kernels::GipAxis::Cols;
        std::optional<double> gamma;
        if (args.gamma_set) gamma = args.gamma;
        kernels::GramMatrix gram = kernels::gram_gip(labels, axis, gamma);
        cfg.kind = kernels::GramSource::Gip;
        cfg.gamma = gamma.value_or(1.0 / static_cast<double>(instance_side ? labels.cols() : labels.rows()));
        return {std::move(gram), cfg};
    }
    if (args.kind == "smoother") {
        const double theta = args.theta_set ? args.theta : 1.0;
        cfg.kind = kernels::GramSource::Smoother;
        cfg.theta = theta;
        return {kernels::gram_smoother(size, theta), cfg};
    }
    throw CLI::ValidationError("unknown kernel kind: " + args.kind);
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    if (out.empty()) throw CLI::ValidationError("empty grid: " + text);
    return out;
}

int run_fit(const std::string& method_name, const std::string& labels_csv, KernelSideArgs& ku,
            KernelSideArgs& kv, std::optional<double> lambda, std::optional<double> lambda_u,
            std::optional<double> lambda_v, const std::string& alpha_text, const std::string& out_path,
            bool csv_header) {
    const io::MatrixFileOptions csv{',', csv_header};
    const models::Method method = models::method_from_name(method_name);
    const models::LabelMatrix y(io::load_matrix(labels_csv, csv));

    models::TrainedModel model;
    if (method == models::Method::Filter) {
        if (alpha_text.empty()) throw CLI::ValidationError("filter method requires --alpha a1,a2,a3,a4");
        const std::vector<double> a = parse_grid(alpha_text);
        if (a.size() != 4) throw CLI::ValidationError("--alpha needs exactly four comma-separated values");
        model = models::fit_filter(y, models::FilterWeights{a[0], a[1], a[2], a[3]});
    } else if (method == models::Method::IndependentTask) {
        BuiltKernel bu = build_kernel(ku, y.matrix(), true, y.instances(), csv);
        if (!lambda_u) throw CLI::ValidationError("method 'it' requires --lambda-u");
        model = models::fit_it(bu.gram, y, *lambda_u);
        model.kernel_u = bu.config;
    } else {
        BuiltKernel bu = build_kernel(ku, y.matrix(), true, y.instances(), csv);
        BuiltKernel bv = build_kernel(kv, y.matrix(), false, y.tasks(), csv);
        switch (method) {
            case models::Method::Kron:
                if (!lambda) throw CLI::ValidationError("method 'kron' requires --lambda");
                model = models::fit_kron(bu.gram, bv.gram, y, *lambda);
                break;
            case models::Method::Okkls:
                model = models::fit_okkls(bu.gram, bv.gram, y);
                break;
            case models::Method::TwoStep:
                if (!lambda_u || !lambda_v)
                    throw CLI::ValidationError("method 'two-step' requires --lambda-u and --lambda-v");
                model = models::fit_two_step(bu.gram, bv.gram, y, *lambda_u, *lambda_v);
                break;
            default:
                break;
        }
        model.kernel_u = bu.config;
        model.kernel_v = bv.config;
    }
    io::save_model(model, out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int run_predict(const std::string& model_path, const std::string& setting_name,
                const std::string& ku_test_csv, const std::string& gv_test_csv, const std::string& out_path,
                bool csv_header) {
    const io::MatrixFileOptions csv{',', csv_header};
    const models::TrainedModel model = io::load_model(model_path);
    const models::Setting setting = models::setting_from_name(setting_name);
    std::optional<DenseMatrix> k_test, g_test;
    if (!ku_test_csv.empty()) k_test = io::load_matrix(ku_test_csv, csv);
    if (!gv_test_csv.empty()) g_test = io::load_matrix(gv_test_csv, csv);
    const DenseMatrix f = models::predict_setting(model, setting, k_test, g_test);
    io::save_matrix(f, out_path, csv);
    std::cout << "wrote " << out_path << " (" << f.rows() << "x" << f.cols() << ")\n";
    return 0;
}

int run_sweep(const std::string& method_name, const std::string& labels_csv, KernelSideArgs& ku,
              KernelSideArgs& kv, const std::string& lambda_grid, const std::string& lambda_u_grid,
              const std::string& lambda_v_grid, const std::string& out_prefix, bool csv_header) {
    const io::MatrixFileOptions csv{',', csv_header};
    const models::Method method = models::method_from_name(method_name);
    const models::LabelMatrix y(io::load_matrix(labels_csv, csv));

    std::vector<std::array<double, 2>> grid;
    if (method == models::Method::TwoStep) {
        if (lambda_u_grid.empty() || lambda_v_grid.empty())
            throw CLI::ValidationError("two-step sweep requires --lambda-u-grid and --lambda-v-grid");
        for (double lu : parse_grid(lambda_u_grid))
            for (double lv : parse_grid(lambda_v_grid)) grid.push_back({lu, lv});
    } else if (method == models::Method::Kron || method == models::Method::IndependentTask) {
        if (lambda_grid.empty()) throw CLI::ValidationError("sweep requires --lambda-grid");
        for (double l : parse_grid(lambda_grid)) grid.push_back({l, 0.0});
    } else {
        throw CLI::ValidationError("sweep supports methods it, kron and two-step");
    }

    BuiltKernel bu = build_kernel(ku, y.matrix(), true, y.instances(), csv);
    std::optional<BuiltKernel> bv;
    if (method != models::Method::IndependentTask)
        bv = build_kernel(kv, y.matrix(), false, y.tasks(), csv);

    const std::vector<models::SweepPoint> points =
        models::sweep(bu.gram, bv ? &bv->gram : nullptr, y, method, grid);

    std::ostringstream summary;
    summary << "index,lambda_u,lambda_v,training_mse,error\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const models::SweepPoint& p = points[i];
        summary << i << ',' << io::format_double(p.values[0]) << ',' << io::format_double(p.values[1]) << ',';
        if (p.model) {
            models::TrainedModel model = *p.model;
            model.kernel_u = bu.config;
            if (bv) model.kernel_v = bv->config;
            char name[32];
            std::snprintf(name, sizeof name, "_%03zu.model", i);
            io::save_model(model, out_prefix + name);
            summary << io::format_double(models::training_mse(model, y)) << ',' << '\n';
        } else {
            summary << ',' << p.error << '\n';
        }
    }
    io::write_text_file(out_prefix + "_summary.csv", summary.str());
    std::cout << "wrote " << points.size() << " grid points to " << out_prefix << "_*.model\n";
    return 0;
}

int run_tune_filter(const std::string& labels_csv, double grid_step, bool csv_header) {
    const io::MatrixFileOptions csv{',', csv_header};
    const models::LabelMatrix y(io::load_matrix(labels_csv, csv));
    const models::FilterTuneResult res = models::tune_filter(y, grid_step);
    std::cout << "alpha " << io::format_double(res.weights.a1) << ' ' << io::format_double(res.weights.a2)
              << ' ' << io::format_double(res.weights.a3) << ' ' << io::format_double(res.weights.a4)
              << "\nloo_mse " << io::format_double(res.loo_mse) << "\n";
    return 0;
}

int run_verify(const std::string& check, std::size_t seeds, std::uint64_t seed, const std::string& size_text,
               const std::string& report_path) {
    bool all_ok = true;
    std::vector<verify::TheoremCheckResult> results;

    if (check != "admissibility") {
        verify::SuiteOptions opt;
        opt.selection = (check == "all") ? "all" : check;
        opt.seeds = seeds;
        opt.base_seed = seed;
        if (!size_text.empty()) {
            std::size_t m = 0, q = 0;
            if (std::sscanf(size_text.c_str(), "%zu,%zu", &m, &q) != 2 || m < 2 || q < 2)
                throw CLI::ValidationError("--size expects m,q with m,q >= 2");
            opt.fixed_m = m;
            opt.fixed_q = q;
        }
        results = verify::run_suite(opt);
        for (const verify::TheoremCheckResult& r : results) {
            all_ok = all_ok && r.ok();
            std::cout << (r.ok() ? "PASS" : "FAIL") << ' ' << r.theorem << " seed=" << r.seed << " m=" << r.m
                      << " q=" << r.q << " discrepancy=" << io::format_double(r.max_abs_discrepancy)
                      << " tol=" << io::format_double(r.tolerance)
                      << (r.expect_violation ? " (negative control)" : "") << "\n";
        }
    }

    if (check == "admissibility" || check == "all") {
        const std::vector<double> nus = spectral::default_nu_list();
        for (const spectral::FilterKind kind :
             {spectral::FilterKind::Tikhonov, spectral::FilterKind::TwoStep}) {
            const spectral::AdmissibilityReport rep = spectral::admissibility_check(kind, 1.0, 1.0, 1.0, nus, 160);
            all_ok = all_ok && rep.pass;
            std::cout << (rep.pass ? "PASS" : "FAIL") << " admissibility " << spectral::filter_kind_name(kind)
                      << " D_hat=" << io::format_double(rep.d_hat) << " B_hat=" << io::format_double(rep.b_hat)
                      << " gamma_hat=" << io::format_double(rep.gamma_hat) << "\n";
            for (const spectral::NuProbe& p : rep.nu_probes) {
                std::cout << "  nu=" << io::format_double(p.nu)
                          << " gamma_nu_hat=" << io::format_double(p.gamma_nu_hat)
                          << " bound=" << io::format_double(p.bound)
                          << (p.nu <= rep.nu_bar + 1e-12
                                  ? (p.within_bound ? " within" : " VIOLATED")
                                  : (p.qualification_exceeded ? " qualification-exceeded" : " above-nu-bar"))
                          << "\n";
                verify::TheoremCheckResult row;
                row.theorem = "admissibility-" + spectral::filter_kind_name(kind) + "-nu" +
                              io::format_double(p.nu);
                row.max_abs_discrepancy = p.gamma_nu_hat;
                row.tolerance = p.bound * (1.0 + rep.slack);
                row.pass = p.within_bound;
                row.expect_violation = p.nu > rep.nu_bar + 1e-12;
                results.push_back(row);
            }
        }
    }

    if (!report_path.empty()) io::write_text_file(report_path, verify::report_csv(results));
    std::cout << (all_ok ? "all checks passed" : "some checks FAILED") << "\n";
    return all_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pairwise kernel ridge regression toolkit"};
    app.require_subcommand(1);

    bool csv_header = false;
    app.add_flag("--csv-header", csv_header, "input CSV files carry one header line");

    // fit
    auto* fit = app.add_subcommand("fit", "fit a model and write it to disk");
    std::string fit_method, fit_labels, fit_alpha, fit_out;
    std::optional<double> fit_lambda, fit_lambda_u, fit_lambda_v;
    KernelSideArgs fit_ku, fit_kv;
    fit->add_option("--method", fit_method, "it|kron|okkls|two-step|filter")->required();
    fit->add_option("--labels", fit_labels, "label matrix CSV (m x q)")->required();
    add_kernel_side(fit, fit_ku, "u");
    add_kernel_side(fit, fit_kv, "v");
    fit->add_option("--lambda", fit_lambda, "regularization for kron");
    fit->add_option("--lambda-u", fit_lambda_u, "instance-side regularization (it, two-step)");
    fit->add_option("--lambda-v", fit_lambda_v, "task-side regularization (two-step)");
    fit->add_option("--alpha", fit_alpha, "filter weights a1,a2,a3,a4");
    fit->add_option("--out", fit_out, "output model file")->required();

    // predict
    auto* predict = app.add_subcommand("predict", "predict with a stored model");
    std::string pred_model, pred_setting, pred_ku, pred_gv, pred_out;
    predict->add_option("--model", pred_model, "model file")->required();
    predict->add_option("--setting", pred_setting, "A|B|C|D")->required();
    predict->add_option("--kernel-u-test", pred_ku, "test instance kernel rows (r x m)");
    predict->add_option("--kernel-v-test", pred_gv, "test task kernel rows (s x q)");
    predict->add_option("--out", pred_out, "output prediction CSV")->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "fit a hyperparameter grid off one eigendecomposition");
    std::string sweep_method, sweep_labels, sweep_lambda_grid, sweep_lu_grid, sweep_lv_grid, sweep_prefix;
    KernelSideArgs sweep_ku, sweep_kv;
    sweep->add_option("--method", sweep_method, "it|kron|two-step")->required();
    sweep->add_option("--labels", sweep_labels, "label matrix CSV")->required();
    add_kernel_side(sweep, sweep_ku, "u");
    add_kernel_side(sweep, sweep_kv, "v");
    sweep->add_option("--lambda-grid", sweep_lambda_grid, "comma-separated lambdas (it, kron)");
    sweep->add_option("--lambda-u-grid", sweep_lu_grid, "comma-separated lambda_u values (two-step)");
    sweep->add_option("--lambda-v-grid", sweep_lv_grid, "comma-separated lambda_v values (two-step)");
    sweep->add_option("--out-prefix", sweep_prefix, "prefix for model files and summary CSV")->required();

    // tune-filter
    auto* tune = app.add_subcommand("tune-filter", "grid-search filter weights by LOO shortcut");
    std::string tune_labels;
    double tune_step = 0.1;
    tune->add_option("--labels", tune_labels, "label matrix CSV")->required();
    tune->add_option("--grid-step", tune_step, "grid step in (0, 0.5], default 0.1");

    // verify
    auto* ver = app.add_subcommand("verify", "machine-check the equivalence theorems and identities");
    std::string ver_check = "all", ver_size, ver_report;
    std::size_t ver_seeds = 5;
    std::uint64_t ver_seed = 1;
    ver->add_option("--check", ver_check, "thm1|thm2|thm3|smoother|veckron|solver|admissibility|all");
    ver->add_option("--seeds", ver_seeds, "number of random seeds per check (default 5)");
    ver->add_option("--seed", ver_seed, "base seed (default 1)");
    ver->add_option("--size", ver_size, "fixed instance,task counts, e.g. 5,4");
    ver->add_option("--report", ver_report, "write a CSV report to this path");

    try {
        app.parse(argc, argv);
        if (*fit)
            return run_fit(fit_method, fit_labels, fit_ku, fit_kv, fit_lambda, fit_lambda_u, fit_lambda_v,
                           fit_alpha, fit_out, csv_header);
        if (*predict) return run_predict(pred_model, pred_setting, pred_ku, pred_gv, pred_out, csv_header);
        if (*sweep)
            return run_sweep(sweep_method, sweep_labels, sweep_ku, sweep_kv, sweep_lambda_grid,
                             sweep_lu_grid, sweep_lv_grid, sweep_prefix, csv_header);
        if (*tune) return run_tune_filter(tune_labels, tune_step, csv_header);
        if (*ver) return run_verify(ver_check, ver_seeds, ver_seed, ver_size, ver_report);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const pairkrr::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const pairkrr::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
