// Command-line front end: train, eval, sweep, varmc, power and genmask.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sparsebar/config.hpp"
#include "sparsebar/error.hpp"
#include "sparsebar/experiment.hpp"
#include "sparsebar/rng.hpp"
#include "sparsebar/topology.hpp"

namespace sb = sparsebar;

namespace {

struct CommonArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::size_t threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config, "experiment config (YAML)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", a.seed, "override the config seed");
    cmd->add_option("--out", a.out, "output directory for report.json and CSVs");
    cmd->add_option("--threads", a.threads, "worker threads for sweep points and Monte Carlo trials")
        ->check(CLI::PositiveNumber);
}

sb::ExperimentConfig load(const CommonArgs& a, std::optional<sb::ExperimentKind> kind) {
    auto config = sb::load_config(a.config);
    if (kind) config.kind = *kind;
    if (a.seed) {
        config.seed = *a.seed;
        config.train.seed = *a.seed;
    }
    config.validate();
    return config;
}

void summarize(const nlohmann::json& report) {
    std::cout << report.dump(2) << '\n';
}

int exit_code(const nlohmann::json& report) {
    return report.value("exit_code", 0);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse inverter-based memristive crossbar simulator and trainer"};
    app.set_version_flag("--version", std::string(sb::kToolVersion));
    app.require_subcommand(1);

    CommonArgs train_args, sweep_args, varmc_args, power_args, eval_args;
    auto* train = app.add_subcommand("train", "train and evaluate one network");
    add_common(train, train_args);
    auto* sweep = app.add_subcommand("sweep", "density sweep at the penultimate junction");
    add_common(sweep, sweep_args);
    auto* varmc = app.add_subcommand("varmc", "conductance variation / quantization Monte Carlo");
    add_common(varmc, varmc_args);
    auto* power = app.add_subcommand("power", "FC vs sparse power and memristor-count report");
    add_common(power, power_args);
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the configured test split");
    add_common(eval, eval_args);
    std::string checkpoint;
    eval->add_option("--checkpoint", checkpoint, "checkpoint written by train")->required()->check(CLI::ExistingFile);

    auto* genmask = app.add_subcommand("genmask", "print a junction mask");
    std::size_t n_prev = 0, n_next = 0, junction = 1;
    double density = 1.0;
    std::uint64_t mask_seed = 1;
    bool unstructured = false;
    genmask->add_option("--prev", n_prev, "neurons in the preceding layer")->required();
    genmask->add_option("--next", n_next, "neurons in the succeeding layer")->required();
    genmask->add_option("--density", density, "junction density")->required();
    genmask->add_option("--seed", mask_seed, "mask seed");
    genmask->add_option("--junction", junction, "junction number written in the header (1-based)");
    genmask->add_flag("--unstructured", unstructured, "uniform random mask without fan balance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*genmask) {
            if (n_prev == 0 || n_next == 0) throw sb::ConfigError("genmask: layer sizes must be positive");
            const auto mask = unstructured ? sb::generate_unstructured_mask(n_prev, n_next, density, mask_seed)
                                           : sb::generate_structured_mask(n_prev, n_next, density, mask_seed);
            sb::write_mask(std::cout, mask, junction);
            return 0;
        }
        nlohmann::json report;
        if (*train) {
            report = sb::run(load(train_args, sb::ExperimentKind::train), {train_args.out, train_args.threads, {}});
        } else if (*sweep) {
            report = sb::run(load(sweep_args, sb::ExperimentKind::sweep_sparsity), {sweep_args.out, sweep_args.threads, {}});
        } else if (*varmc) {
            report = sb::run(load(varmc_args, sb::ExperimentKind::variation_mc), {varmc_args.out, varmc_args.threads, {}});
        } else if (*power) {
            report = sb::run(load(power_args, sb::ExperimentKind::power_report), {power_args.out, power_args.threads, {}});
        } else if (*eval) {
            report = sb::run_eval(load(eval_args, std::nullopt), {eval_args.out, eval_args.threads, checkpoint});
        }
        summarize(report);
        const int rc = exit_code(report);
        if (rc == 4) std::cerr << "error: training diverged: " << report.value("error", std::string()) << '\n';
        return rc;
    } catch (const sb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const sb::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const sb::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
