/*
 * Command-line front end.
 *
 *   sdae list
 *   sdae check    --problem NAME [--samples N] [--k-monotone K] ...
 *   sdae simulate --problem NAME --scheme {ll|decomposed|em} --n N --out FILE
 *   sdae converge --problem NAME [--n-ref R] [--levels a..b] [--samples S]
 *                 [--exact] --out FILE
 *
 * Exit codes: 0 success, 1 numerical or check failure, 2 usage/config error.
 * Every output file gets a sibling manifest; rerunning with the same flags
 * reproduces the data files byte for byte.
 */

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "sdae/cli_support.hpp"
#include "sdae/sdae.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
    std::string problem;
    std::string scheme = "ll";
    std::uint64_t seed = 42;
    double horizon = 0.0;  // 0 keeps the problem default
    double tol_identity = 0.0;
    double tol_minsv = 0.0;
    std::string out;
};

sdae::Scheme parse_scheme(const std::string& name) {
    if (name == "ll") return sdae::Scheme::ll;
    if (name == "decomposed") return sdae::Scheme::decomposed;
    if (name == "em") return sdae::Scheme::em;
    throw sdae::ConfigError("unknown scheme '" + name + "'");
}

sdae::ProblemEntry load_problem(const CommonFlags& flags) {
    sdae::ProblemEntry entry = sdae::problems::get(flags.problem);
    if (flags.horizon > 0.0) {
        entry.problem.horizon_T = flags.horizon;
    }
    return entry;
}

sdae::ToleranceConfig tolerances(const CommonFlags& flags, sdae::Index dim) {
    sdae::ToleranceConfig tol = sdae::ToleranceConfig::defaults_for(dim);
    if (flags.tol_identity > 0.0) {
        tol.identity_tol = flags.tol_identity;
    }
    return tol;
}

sdae::SolveOptions solve_options(const CommonFlags& flags, sdae::Index dim) {
    sdae::SolveOptions opts;
    opts.cache_constant_a = true;  // all built-in problems have constant A
    opts.projector_tol = tolerances(flags, dim);
    if (flags.tol_minsv > 0.0) {
        opts.min_sv_tol = flags.tol_minsv;
    }
    return opts;
}

std::map<std::string, std::string> base_parameters(const CommonFlags& flags) {
    std::map<std::string, std::string> params;
    params["seed"] = std::to_string(flags.seed);
    params["scheme"] = flags.scheme;
    if (flags.horizon > 0.0) {
        params["horizon"] = sdae::format_double(flags.horizon);
    }
    if (flags.tol_identity > 0.0) {
        params["tol_identity"] = sdae::format_double(flags.tol_identity);
    }
    if (flags.tol_minsv > 0.0) {
        params["tol_minsv"] = sdae::format_double(flags.tol_minsv);
    }
    return params;
}

int cmd_list() {
    for (const auto& name : sdae::problems::list()) {
        std::cout << name << "\n";
    }
    return kExitOk;
}

int cmd_check(const CommonFlags& flags, int samples, double k_monotone) {
    const sdae::ProblemEntry entry = load_problem(flags);
    const sdae::SdaeProblem& p = entry.problem;
    const sdae::ToleranceConfig tol = tolerances(flags, p.dim_d);
    const std::vector<double> ts = {0.0, 0.5 * p.horizon_T, p.horizon_T};
    const std::vector<sdae::Vector> xs =
        sdae::check_sample_states(p.dim_d, samples, 3.0, flags.seed);
    const sdae::AssumptionReport report =
        sdae::check_assumptions(p, sdae::DerivativeConfig{}, ts, xs, k_monotone, tol);

    std::string text = "problem: " + flags.problem + "\n" + report.details + "\n" +
                       "result: " + (report.all_ok() ? "PASS" : "FAIL") + "\n";
    std::cout << text;
    if (!flags.out.empty()) {
        sdae::RunManifest manifest;
        manifest.command = "check";
        manifest.problem_name = flags.problem;
        manifest.parameters = base_parameters(flags);
        manifest.parameters["samples"] = std::to_string(samples);
        manifest.parameters["k_monotone"] = sdae::format_double(k_monotone);
        manifest.timestamp = sdae::RunManifest::now_utc();
        sdae::write_with_manifest(flags.out, text, manifest);
    }
    return report.all_ok() ? kExitOk : kExitFailure;
}

int cmd_simulate(const CommonFlags& flags, sdae::Index n_steps) {
    const sdae::ProblemEntry entry = load_problem(flags);
    const sdae::SdaeProblem& p = entry.problem;
    const sdae::SolveOptions opts = solve_options(flags, p.dim_d);
    const sdae::BrownianLattice lattice =
        sdae::generate(flags.seed, n_steps, p.dim_noise, p.horizon_T);
    const sdae::Trajectory tr =
        sdae::integrate(p, opts, lattice, parse_scheme(flags.scheme));

    sdae::RunManifest manifest;
    manifest.command = "simulate";
    manifest.problem_name = flags.problem;
    manifest.parameters = base_parameters(flags);
    manifest.parameters["n"] = std::to_string(n_steps);
    manifest.timestamp = sdae::RunManifest::now_utc();
    sdae::write_with_manifest(flags.out, sdae::trajectory_csv(tr), manifest);
    std::cout << "wrote " << tr.states.size() << " rows to " << flags.out << "\n";
    return kExitOk;
}

int cmd_converge(const CommonFlags& flags, sdae::Index n_ref,
                 const std::string& levels_text, int samples, bool use_exact) {
    const sdae::ProblemEntry entry = load_problem(flags);
    const sdae::SdaeProblem& p = entry.problem;
    const sdae::SolveOptions opts = solve_options(flags, p.dim_d);

    sdae::ConvergenceConfig cfg;
    cfg.n_ref = n_ref;
    cfg.levels = sdae::parse_levels(levels_text);
    cfg.n_samples = samples;
    cfg.base_seed = flags.seed;
    cfg.scheme = parse_scheme(flags.scheme);
    if (cfg.scheme == sdae::Scheme::em) {
        throw sdae::ConfigError("convergence studies support ll and decomposed only");
    }
    cfg.validate();
    if (use_exact && !entry.exact) {
        throw sdae::ConfigError("problem '" + flags.problem +
                                "' has no exact-path evaluator");
    }

    const sdae::ConvergenceReport report =
        use_exact ? sdae::compare_exact(p, entry.exact, cfg, opts)
                  : sdae::run_study(p, cfg, opts);

    sdae::RunManifest manifest;
    manifest.command = "converge";
    manifest.problem_name = flags.problem;
    manifest.parameters = base_parameters(flags);
    manifest.parameters["n_ref"] = std::to_string(n_ref);
    manifest.parameters["levels"] = levels_text;
    manifest.parameters["samples"] = std::to_string(samples);
    manifest.parameters["exact"] = use_exact ? "true" : "false";
    manifest.timestamp = sdae::RunManifest::now_utc();

    sdae::write_with_manifest(flags.out, sdae::report_csv(report), manifest);
    std::filesystem::path plot_path(flags.out);
    const std::string ext = plot_path.extension().string();
    plot_path.replace_extension();
    plot_path += "_plot";
    plot_path += ext.empty() ? ".csv" : ext;
    sdae::write_with_manifest(plot_path, sdae::plot_data_csv(report), manifest);

    for (std::size_t s = 0; s < report.samples.size(); ++s) {
        const auto& sample = report.samples[s];
        std::cout << "sample " << s << " (seed " << sample.seed << "): ";
        if (sample.rate) {
            std::cout << "rate " << *sample.rate << "\n";
        } else {
            std::cout << "rate undefined (degenerate regression)\n";
        }
    }
    if (report.mean_rate) {
        std::cout << "mean rate: " << *report.mean_rate << "\n";
    }
    std::cout << "wrote " << flags.out << " and " << plot_path.string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"index-1 SDAE solver based on semi-implicit local linearization"};
    app.require_subcommand(1);

    CommonFlags flags;
    int check_samples = 125;
    double k_monotone = 2.0;
    sdae::Index sim_steps = 1 << 10;
    sdae::Index n_ref = 1 << 16;
    std::string levels_text = "64..4096";
    int study_samples = 3;
    bool use_exact = false;

    auto* list_cmd = app.add_subcommand("list", "list the built-in problems");

    auto* check_cmd =
        app.add_subcommand("check", "run sampled assumption checks on a problem");
    check_cmd->add_option("--problem", flags.problem, "problem name")->required();
    check_cmd->add_option("--samples", check_samples, "number of state samples");
    check_cmd->add_option("--k-monotone", k_monotone, "monotone bound constant");
    check_cmd->add_option("--seed", flags.seed, "sampling seed");
    check_cmd->add_option("--horizon", flags.horizon, "override the time horizon");
    check_cmd->add_option("--tol-identity", flags.tol_identity,
                          "projector/residual tolerance");
    check_cmd->add_option("--out", flags.out, "write the report to this file");

    auto* sim_cmd = app.add_subcommand("simulate", "integrate one trajectory");
    sim_cmd->add_option("--problem", flags.problem, "problem name")->required();
    sim_cmd->add_option("--scheme", flags.scheme, "ll | decomposed | em")
        ->check(CLI::IsMember({"ll", "decomposed", "em"}));
    sim_cmd->add_option("--n", sim_steps, "number of steps (power of two)");
    sim_cmd->add_option("--seed", flags.seed, "Brownian seed");
    sim_cmd->add_option("--horizon", flags.horizon, "override the time horizon");
    sim_cmd->add_option("--tol-minsv", flags.tol_minsv, "near-singularity threshold");
    sim_cmd->add_option("--tol-identity", flags.tol_identity,
                        "projector tolerance (decomposed scheme)");
    sim_cmd->add_option("--out", flags.out, "trajectory CSV path")->required();

    auto* conv_cmd = app.add_subcommand("converge", "pathwise convergence study");
    conv_cmd->add_option("--problem", flags.problem, "problem name")->required();
    conv_cmd->add_option("--scheme", flags.scheme, "ll | decomposed")
        ->check(CLI::IsMember({"ll", "decomposed"}));
    conv_cmd->add_option("--n-ref", n_ref, "reference resolution (power of two)");
    conv_cmd->add_option("--levels", levels_text,
                         "coarse resolutions, e.g. 64..4096 or 64,256");
    conv_cmd->add_option("--samples", study_samples, "number of Brownian samples");
    conv_cmd->add_option("--seed", flags.seed, "base seed; sample i uses seed + i");
    conv_cmd->add_option("--horizon", flags.horizon, "override the time horizon");
    conv_cmd->add_option("--tol-minsv", flags.tol_minsv, "near-singularity threshold");
    conv_cmd->add_option("--tol-identity", flags.tol_identity,
                         "projector tolerance");
    conv_cmd->add_flag("--exact", use_exact,
                       "compare against the problem's exact path");
    conv_cmd->add_option("--out", flags.out, "report CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (list_cmd->parsed()) {
            return cmd_list();
        }
        if (check_cmd->parsed()) {
            return cmd_check(flags, check_samples, k_monotone);
        }
        if (sim_cmd->parsed()) {
            return cmd_simulate(flags, sim_steps);
        }
        if (conv_cmd->parsed()) {
            return cmd_converge(flags, n_ref, levels_text, study_samples, use_exact);
        }
    } catch (const sdae::UnknownProblem& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const sdae::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const sdae::InvalidResolution& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const sdae::SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
