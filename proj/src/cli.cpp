#include "qmetro/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qmetro/counting.hpp"
#include "qmetro/entanglement.hpp"
#include "qmetro/estimation.hpp"
#include "qmetro/fisher.hpp"
#include "qmetro/io.hpp"
#include "qmetro/optimizer.hpp"

namespace qmetro {

namespace {

using nlohmann::json;

json parse_config(const std::string& text) {
    json cfg = json::parse(text, nullptr, false);
    if (cfg.is_discarded()) throw ConfigError("config is not valid JSON");
    if (!cfg.is_object()) throw ConfigError("config root must be a JSON object");
    return cfg;
}

void require_keys(const json& cfg, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : cfg.items()) {
        (void)value;
        if (std::none_of(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; })) {
            throw ConfigError("unknown config key: \"" + key + "\"");
        }
    }
}

double get_number(const json& cfg, const char* key) {
    if (!cfg.contains(key)) throw ConfigError(std::string("missing config key: \"") + key + "\"");
    if (!cfg[key].is_number()) throw ConfigError(std::string("config key \"") + key + "\" must be a number");
    return cfg[key].get<double>();
}

double get_number_or(const json& cfg, const char* key, double fallback) {
    return cfg.contains(key) ? get_number(cfg, key) : fallback;
}

int get_int(const json& cfg, const char* key) {
    if (!cfg.contains(key)) throw ConfigError(std::string("missing config key: \"") + key + "\"");
    if (!cfg[key].is_number_integer()) throw ConfigError(std::string("config key \"") + key + "\" must be an integer");
    return cfg[key].get<int>();
}

int get_int_or(const json& cfg, const char* key, int fallback) {
    return cfg.contains(key) ? get_int(cfg, key) : fallback;
}

std::vector<double> get_number_array(const json& cfg, const char* key) {
    if (!cfg.contains(key)) throw ConfigError(std::string("missing config key: \"") + key + "\"");
    if (!cfg[key].is_array()) throw ConfigError(std::string("config key \"") + key + "\" must be an array");
    std::vector<double> out;
    for (const auto& v : cfg[key]) {
        if (!v.is_number()) throw ConfigError(std::string("config key \"") + key + "\" must contain numbers only");
        out.push_back(v.get<double>());
    }
    return out;
}

void write_config_echo(const std::string& command, const json& cfg,
                       const CliContext& ctx, std::uint64_t seed, int dim) {
    json echo;
    echo["command"] = command;
    echo["config"] = cfg;
    echo["effective"] = {{"seed", seed}, {"dim", dim}, {"threads", ctx.threads}};
    atomic_write_text(ctx.out / "config_echo.json", echo.dump(2) + "\n");
}

std::uint64_t effective_seed(const json& cfg, const CliContext& ctx) {
    if (ctx.seed) return *ctx.seed;
    if (cfg.contains("seed")) {
        if (!cfg["seed"].is_number_unsigned() && !cfg["seed"].is_number_integer()) {
            throw ConfigError("config key \"seed\" must be an integer");
        }
        return cfg["seed"].get<std::uint64_t>();
    }
    return 0;
}

int effective_dim(const json& cfg, const CliContext& ctx) {
    const int dim = ctx.dim ? *ctx.dim : get_int_or(cfg, "dim", 0);
    if (dim != 0 && dim < 2) throw ConfigError("dim must be >= 2 (or 0 for automatic)");
    return dim;
}

// Per-mode truncations for a coherent ⊗ squeezed-vacuum input.
std::pair<TruncationPolicy, TruncationPolicy> input_policies(double alpha_sq,
                                                             double r, int dim) {
    if (dim > 0) return {TruncationPolicy{dim, 1e-10}, TruncationPolicy{dim, 1e-10}};
    return {TruncationPolicy::for_mean_photon(alpha_sq), TruncationPolicy::for_squeezed(r)};
}

struct JsonDoc {
    std::ostringstream os;
    bool first = true;
    JsonDoc() { os << "{"; }
    void raw(const std::string& key, const std::string& value) {
        os << (first ? "\n" : ",\n") << "  \"" << key << "\": " << value;
        first = false;
    }
    void num(const std::string& key, double v) { raw(key, format_g17(v)); }
    void integer(const std::string& key, long long v) { raw(key, std::to_string(v)); }
    void uinteger(const std::string& key, std::uint64_t v) { raw(key, std::to_string(v)); }
    void boolean(const std::string& key, bool v) { raw(key, v ? "true" : "false"); }
    void text(const std::string& key, const std::string& v) { raw(key, "\"" + v + "\""); }
    std::string str() { return os.str() + "\n}\n"; }
};

}  // namespace

void cmd_qfi(const std::string& config_text, const CliContext& ctx) {
    const json cfg = parse_config(config_text);
    require_keys(cfg, {"alpha_mag", "alpha_phase", "nbar_values", "dim"});
    const double alpha_mag = get_number(cfg, "alpha_mag");
    const double alpha_phase = get_number_or(cfg, "alpha_phase", 0.0);
    if (alpha_mag < 0.0) throw ConfigError("alpha_mag must be >= 0");
    const std::vector<double> nbars = get_number_array(cfg, "nbar_values");
    if (nbars.empty()) throw ConfigError("empty sweep");
    const int dim = effective_dim(cfg, ctx);
    write_config_echo("qfi", cfg, ctx, 0, dim);

    const Complex alpha = std::polar(alpha_mag, alpha_phase);
    const double alpha_sq = alpha_mag * alpha_mag;
    std::ostringstream csv;
    csv << "alpha_sq,nbar,f_ss,f_sd,f_dd,f_max,remainder_r,n_tot\n";
    double worst_gap = 0.0;
    for (const double nbar : nbars) {
        if (nbar < 0.0) throw ConfigError("nbar_values must be >= 0");
        const double r = std::asinh(std::sqrt(nbar));
        const auto [pol1, pol2] = input_policies(alpha_sq, r, dim);
        const TwoModeState input =
            tensor(make_coherent(alpha, pol1), make_squeezed_vacuum(r, pol2));
        const FisherMatrix fm = qfi_from_covariance(input);
        const FmaxReport bound = fmax_bound(alpha_sq, nbar);
        worst_gap = std::max(worst_gap,
                             std::abs(fm.f_dd - bound.f_max) / std::max(1.0, bound.f_max));
        csv << format_g17(alpha_sq) << "," << format_g17(nbar) << ","
            << format_g17(fm.f_ss) << "," << format_g17(fm.f_sd) << ","
            << format_g17(fm.f_dd) << "," << format_g17(bound.f_max) << ","
            << format_g17(bound.remainder_r) << "," << format_g17(bound.n_tot) << "\n";
    }
    atomic_write_text(ctx.out / "qfi_table.csv", csv.str());

    JsonDoc summary;
    summary.num("alpha_sq", alpha_sq);
    summary.integer("rows", static_cast<long long>(nbars.size()));
    summary.num("max_rel_gap_fdd_vs_fmax", worst_gap);
    atomic_write_text(ctx.out / "qfi_summary.json", summary.str());
}

void cmd_optimize(const std::string& config_text, const CliContext& ctx) {
    const json cfg = parse_config(config_text);
    require_keys(cfg, {"alpha_sq", "nbar", "dim", "tol", "restarts", "seed"});
    OptimizationProblem prob;
    prob.alpha_sq = get_number(cfg, "alpha_sq");
    prob.nbar = get_number(cfg, "nbar");
    prob.tol = get_number_or(cfg, "tol", 1e-7);
    prob.seed = effective_seed(cfg, ctx);
    const int restarts = get_int_or(cfg, "restarts", 5);
    int dim = effective_dim(cfg, ctx);
    if (dim == 0) dim = TruncationPolicy::for_squeezed(std::asinh(std::sqrt(prob.nbar))).dim;
    prob.dim = dim;
    prob.validate();
    write_config_echo("optimize", cfg, ctx, prob.seed, dim);

    const RestartSummary grad = maximize_fdd_gradient_restarts(prob, restarts, ctx.threads);
    const OptimizationResult sweep = maximize_fdd_eigensweep(prob);

    std::ostringstream chi_csv;
    chi_csv << "n,re,im\n";
    for (int n = 0; n < grad.best.chi_opt.dim(); ++n) {
        chi_csv << n << "," << format_g17(grad.best.chi_opt.amps[n].real()) << ","
                << format_g17(grad.best.chi_opt.amps[n].imag()) << "\n";
    }
    atomic_write_text(ctx.out / "chi_opt.csv", chi_csv.str());

    std::ostringstream log_csv;
    log_csv << "restart,seed,fdd_achieved,fidelity_to_squeezed,iterations,converged,"
               "constraint_residual\n";
    for (int rix = 0; rix < restarts; ++rix) {
        const OptimizationResult& res = grad.all[rix];
        log_csv << rix << "," << (prob.seed + static_cast<std::uint64_t>(rix)) << ","
                << format_g17(res.fdd_achieved) << ","
                << format_g17(res.fidelity_to_squeezed) << "," << res.iterations << ","
                << (res.converged ? 1 : 0) << "," << format_g17(res.constraint_residual)
                << "\n";
    }
    atomic_write_text(ctx.out / "convergence_log.csv", log_csv.str());

    const double agree = std::abs(grad.best.fdd_achieved - sweep.fdd_achieved) /
                         std::max(1.0, grad.best.fmax_analytic);
    JsonDoc rep;
    rep.num("alpha_sq", prob.alpha_sq);
    rep.num("nbar", prob.nbar);
    rep.integer("dim", dim);
    rep.uinteger("seed", prob.seed);
    rep.integer("restarts", restarts);
    rep.num("fmax_analytic", grad.best.fmax_analytic);
    rep.num("gradient_fdd", grad.best.fdd_achieved);
    rep.num("gradient_fidelity_to_squeezed", grad.best.fidelity_to_squeezed);
    rep.boolean("gradient_converged", grad.best.converged);
    rep.integer("gradient_iterations", grad.best.iterations);
    rep.num("gradient_restart_spread", grad.fdd_spread);
    rep.num("eigensweep_fdd", sweep.fdd_achieved);
    rep.num("eigensweep_fidelity_to_squeezed", sweep.fidelity_to_squeezed);
    rep.integer("eigensweep_solves", sweep.iterations);
    rep.num("route_rel_disagreement", agree);
    atomic_write_text(ctx.out / "optimize_report.json", rep.str());
}

void cmd_cfi(const std::string& config_text, const CliContext& ctx) {
    const json cfg = parse_config(config_text);
    require_keys(cfg, {"alpha_mag", "alpha_phase", "r", "dim", "phi_start", "phi_stop",
                       "phi_points", "distribution_phi"});
    const double alpha_mag = get_number(cfg, "alpha_mag");
    const double alpha_phase = get_number_or(cfg, "alpha_phase", 0.0);
    const double r = get_number(cfg, "r");
    const double phi_start = get_number(cfg, "phi_start");
    const double phi_stop = get_number_or(cfg, "phi_stop", phi_start);
    const int phi_points = get_int_or(cfg, "phi_points", 1);
    if (phi_points < 1) throw ConfigError("phi_points must be >= 1");
    const int dim = effective_dim(cfg, ctx);
    write_config_echo("cfi", cfg, ctx, 0, dim);

    const auto [pol1, pol2] = input_policies(alpha_mag * alpha_mag, r, dim);
    const TwoModeState input = tensor(make_coherent(std::polar(alpha_mag, alpha_phase), pol1),
                                      make_squeezed_vacuum(r, pol2));
    const RotationPlan plan = make_rotation_plan(input);
    const double qfi_ref = qfi_from_covariance(input).f_dd;

    std::ostringstream csv;
    csv << "phi_d,cfi,cfi_nd_only,qfi_ref\n";
    double max_rel_gap = 0.0;
    for (int i = 0; i < phi_points; ++i) {
        const double phi = phi_points == 1
                               ? phi_start
                               : phi_start + (phi_stop - phi_start) * i / (phi_points - 1.0);
        const double cfi = classical_fisher(plan, phi);
        const double cfi_nd = classical_fisher_nd_only(plan, phi);
        max_rel_gap = std::max(max_rel_gap, std::abs(cfi - qfi_ref) / qfi_ref);
        csv << format_g17(phi) << "," << format_g17(cfi) << "," << format_g17(cfi_nd)
            << "," << format_g17(qfi_ref) << "\n";
    }
    atomic_write_text(ctx.out / "cfi_grid.csv", csv.str());

    if (cfg.contains("distribution_phi")) {
        const double dphi = get_number(cfg, "distribution_phi");
        const CountDistribution dist = count_distribution(plan, dphi);
        atomic_write_text(ctx.out / "count_distribution.csv", count_distribution_csv(dist));
        atomic_write_text(ctx.out / "count_distribution.json", count_distribution_json(dist));
    }

    JsonDoc summary;
    summary.num("alpha_sq", alpha_mag * alpha_mag);
    summary.num("r", r);
    summary.num("qfi_ref", qfi_ref);
    summary.integer("grid_points", phi_points);
    summary.num("max_rel_gap_cfi_vs_qfi", max_rel_gap);
    atomic_write_text(ctx.out / "cfi_summary.json", summary.str());
}

void cmd_estimate(const std::string& config_text, const CliContext& ctx) {
    const json cfg = parse_config(config_text);
    require_keys(cfg, {"alpha_mag", "alpha_phase", "r", "phi_true", "shots_per_trial",
                       "trials", "estimator", "dim", "seed", "window_lo", "window_hi",
                       "grid_points"});
    ExperimentConfig ec;
    ec.alpha = std::polar(get_number(cfg, "alpha_mag"), get_number_or(cfg, "alpha_phase", 0.0));
    ec.r = get_number(cfg, "r");
    ec.phi_true = get_number(cfg, "phi_true");
    ec.shots_per_trial = get_int(cfg, "shots_per_trial");
    ec.trials = get_int(cfg, "trials");
    ec.seed = effective_seed(cfg, ctx);
    ec.dim = effective_dim(cfg, ctx);
    ec.window_lo = get_number_or(cfg, "window_lo", ec.window_lo);
    ec.window_hi = get_number_or(cfg, "window_hi", ec.window_hi);
    ec.grid_points = get_int_or(cfg, "grid_points", ec.grid_points);
    if (!cfg.contains("estimator")) throw ConfigError("missing config key: \"estimator\"");
    const std::string kind = cfg["estimator"].get<std::string>();
    if (kind == "ml") {
        ec.estimator = EstimatorKind::MaximumLikelihood;
    } else if (kind == "bayes") {
        ec.estimator = EstimatorKind::Bayesian;
    } else if (kind == "fringe") {
        ec.estimator = EstimatorKind::LinearFringe;
    } else {
        throw ConfigError("estimator must be one of \"ml\", \"bayes\", \"fringe\"");
    }
    ec.validate();
    write_config_echo("estimate", cfg, ctx, ec.seed, ec.dim);

    const EstimationRun run = run_experiment(ec);

    std::ostringstream csv;
    csv << "trial,estimate\n";
    for (size_t t = 0; t < run.estimates.size(); ++t) {
        csv << t << "," << format_g17(run.estimates[t]) << "\n";
    }
    atomic_write_text(ctx.out / "estimates.csv", csv.str());

    JsonDoc summary;
    summary.text("estimator", kind);
    summary.num("alpha_mag", std::abs(ec.alpha));
    summary.num("r", ec.r);
    summary.num("phi_true", ec.phi_true);
    summary.integer("shots_per_trial", ec.shots_per_trial);
    summary.integer("trials", ec.trials);
    summary.uinteger("seed", ec.seed);
    summary.integer("dim", ec.dim);
    summary.num("fisher_used", run.fisher_used);
    summary.num("crb", run.crb);
    summary.num("sample_variance", run.sample_variance);
    summary.num("variance_ratio", run.variance_ratio);
    summary.num("bias", run.bias);
    summary.num("mc_sigma", run.mc_sigma);
    if (ec.estimator == EstimatorKind::Bayesian) {
        summary.num("mean_posterior_variance", run.mean_posterior_variance);
    }
    atomic_write_text(ctx.out / "estimate_summary.json", summary.str());
}

void cmd_entropy(const std::string& config_text, const CliContext& ctx) {
    const json cfg = parse_config(config_text);
    require_keys(cfg, {"nbar_values", "coherent_sweep", "alpha_mag", "dim"});
    const std::vector<double> nbars_raw = get_number_array(cfg, "nbar_values");
    if (nbars_raw.empty()) throw ConfigError("empty sweep");
    std::vector<int> nbars;
    for (double v : nbars_raw) {
        const int n = static_cast<int>(std::lround(v));
        if (n < 0 || std::abs(v - n) > 1e-9) {
            throw ConfigError("nbar_values must be nonnegative integers for the "
                              "number-state arm");
        }
        nbars.push_back(n);
    }
    std::vector<double> betas = {0.0, 0.5, 1.0, 2.0};
    if (cfg.contains("coherent_sweep")) betas = get_number_array(cfg, "coherent_sweep");
    const double alpha_mag = get_number_or(cfg, "alpha_mag", 2.0);
    const int dim_override = effective_dim(cfg, ctx);
    write_config_echo("entropy", cfg, ctx, 0, dim_override);

    std::ostringstream cmp_csv;
    cmp_csv << "nbar,entropy_squeezed,entropy_number,number_exceeds_squeezed\n";
    for (const int nbar : nbars) {
        const int dim = dim_override > 0
                            ? dim_override
                            : std::max(TruncationPolicy::for_squeezed(
                                           std::asinh(std::sqrt(double(nbar))), 1e-9)
                                           .dim,
                                       nbar + 10);
        const EntropyComparison cmp = entropy_comparison(nbar, dim);
        cmp_csv << nbar << "," << format_g17(cmp.entropy_squeezed) << ","
                << format_g17(cmp.entropy_number) << ","
                << (cmp.entropy_number > cmp.entropy_squeezed ? 1 : 0) << "\n";
    }
    atomic_write_text(ctx.out / "entropy_comparison.csv", cmp_csv.str());

    std::ostringstream prod_csv;
    prod_csv << "beta,entropy_after_bs,cross_moment_abs\n";
    for (const double beta : betas) {
        const TruncationPolicy pol = TruncationPolicy::for_mean_photon(beta * beta);
        const ProductCriterion crit =
            product_criterion(make_coherent(beta, pol), alpha_mag);
        prod_csv << format_g17(beta) << "," << format_g17(crit.entropy_after_bs) << ","
                 << format_g17(std::abs(crit.cross_moment)) << "\n";
    }
    atomic_write_text(ctx.out / "product_criterion.csv", prod_csv.str());

    JsonDoc summary;
    summary.integer("nbar_rows", static_cast<long long>(nbars.size()));
    summary.integer("coherent_rows", static_cast<long long>(betas.size()));
    summary.num("alpha_mag", alpha_mag);
    atomic_write_text(ctx.out / "entropy_summary.json", summary.str());
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Two-mode Fock-space interferometry toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int dim = 0;
    int threads = 1;
    bool seed_set = false, dim_set = false;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "RNG seed (overrides config)")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--dim", dim, "truncation dim (overrides config)")
            ->each([&](const std::string&) { dim_set = true; });
        sub->add_option("--threads", threads, "worker thread cap")->check(CLI::PositiveNumber);
    };

    CLI::App* qfi = app.add_subcommand("qfi", "Fisher-matrix sweep over nbar");
    CLI::App* optimize = app.add_subcommand("optimize", "maximize f_dd over secondary states");
    CLI::App* cfi = app.add_subcommand("cfi", "classical Fisher information over a phase grid");
    CLI::App* estimate = app.add_subcommand("estimate", "Monte Carlo estimator benchmark");
    CLI::App* entropy = app.add_subcommand("entropy", "modal-entanglement tables");
    for (CLI::App* sub : {qfi, optimize, cfi, estimate, entropy}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << R"({"error":{"kind":"validation","message":"invalid command line"}})"
                  << "\n";
        return 1;
    }

    try {
        CliContext ctx;
        ctx.out = out_dir;
        if (seed_set) ctx.seed = seed;
        if (dim_set) ctx.dim = dim;
        ctx.threads = threads;
        std::filesystem::create_directories(ctx.out);
        const std::string config_text = read_text(config_path);
        if (qfi->parsed()) cmd_qfi(config_text, ctx);
        if (optimize->parsed()) cmd_optimize(config_text, ctx);
        if (cfi->parsed()) cmd_cfi(config_text, ctx);
        if (estimate->parsed()) cmd_estimate(config_text, ctx);
        if (entropy->parsed()) cmd_entropy(config_text, ctx);
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << R"({"error":{"kind":"validation","message":")" << e.what()
                  << R"("}})" << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << R"({"error":{"kind":"numerical","message":")" << e.what()
                  << R"("}})" << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << R"({"error":{"kind":"internal","message":")" << e.what()
                  << R"("}})" << "\n";
        return 2;
    }
}

}  // namespace qmetro
