// Command-line driver: solve the contract problem, simulate the
// equilibrium, verify incentive compatibility, or sweep a parameter.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mfpa/runner.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::int64_t seed_override = -1;
    std::int64_t paths_override = -1;
    std::int64_t threads_override = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON configuration file")->required();
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed_override, "override sim.seed");
    cmd->add_option("--paths", opts.paths_override, "override sim.paths");
    cmd->add_option("--threads", opts.threads_override, "override sim.threads");
}

int dispatch(const CommonOpts& opts, int (*fn)(const mfpa::RunConfig&, const std::string&)) {
    try {
        mfpa::RunConfig cfg = mfpa::load_config(opts.config_path);
        if (opts.seed_override >= 0) cfg.sim.seed = std::uint64_t(opts.seed_override);
        if (opts.paths_override > 0) cfg.sim.n_paths = std::size_t(opts.paths_override);
        if (opts.threads_override >= 0) cfg.sim.n_threads = unsigned(opts.threads_override);
        auto issues = mfpa::validate_params(cfg.market);
        if (!issues.empty()) {
            for (const auto& issue : issues)
                std::cerr << "config error: market." << issue.name << " " << issue.reason << "\n";
            return mfpa::kConfigError;
        }
        return fn(cfg, opts.out_dir);
    } catch (const mfpa::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return mfpa::kConfigError;
    } catch (const mfpa::InvalidParameter& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return mfpa::kConfigError;
    } catch (const mfpa::HorizonTooLong& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mfpa::kHorizonError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mfpa::kVerificationFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean-field demand-response contracting: solver and simulator"};
    app.require_subcommand(1);

    CommonOpts solve_opts, sim_opts, ic_opts, sweep_opts, generic_opts;
    CLI::App* solve = app.add_subcommand("solve", "solve coefficient ODEs and export curves");
    add_common(solve, solve_opts);
    CLI::App* simulate =
        app.add_subcommand("simulate", "Monte Carlo equilibrium ensemble with moment checks");
    add_common(simulate, sim_opts);
    CLI::App* verify = app.add_subcommand("verify-ic", "incentive-compatibility verification");
    add_common(verify, ic_opts);
    CLI::App* sweep = app.add_subcommand("sweep", "sweep one market parameter");
    add_common(sweep, sweep_opts);
    CLI::App* generic =
        app.add_subcommand("simulate-generic", "run the model-agnostic engine on the benchmark");
    add_common(generic, generic_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : mfpa::kConfigError;
    }

    if (solve->parsed()) return dispatch(solve_opts, mfpa::run_solve);
    if (simulate->parsed()) return dispatch(sim_opts, mfpa::run_simulate);
    if (verify->parsed()) return dispatch(ic_opts, mfpa::run_verify_ic);
    if (sweep->parsed()) return dispatch(sweep_opts, mfpa::run_sweep);
    if (generic->parsed()) return dispatch(generic_opts, mfpa::run_simulate_generic);
    return mfpa::kConfigError;
}
