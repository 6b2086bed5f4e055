// Command-line front end for the SLT-GP benchmarks.
//
// Exit codes: 0 success, 1 unexpected failure, 2 usage or configuration error,
// 3 value outside a mathematical domain, 4 numerical failure.

#include "sltgp/datagen.hpp"
#include "sltgp/errors.hpp"
#include "sltgp/experiments.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kDomain = 3, kNumerical = 4 };

// Flags are collected as raw text and applied after the config file so that flags win.
struct FlagSet {
    std::vector<std::pair<std::string, CLI::Option*>> options;
    std::vector<std::unique_ptr<std::string>> values;

    void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        values.push_back(std::make_unique<std::string>());
        options.emplace_back(key, app->add_option(flag, *values.back(), help));
    }

    void apply(sltgp::ExperimentConfig& config) const {
        for (std::size_t i = 0; i < options.size(); ++i) {
            if (options[i].second->count() > 0) {
                sltgp::apply_config_value(options[i].first, *values[i], config);
            }
        }
    }
};

void add_common(CLI::App* app, FlagSet& flags) {
    flags.add(app, "--dataset", "dataset", "generator name");
    flags.add(app, "--methods", "methods", "comma-separated subset of gpc,slt_gp,gpc_reference");
    flags.add(app, "--repeats", "repeats", "number of repeats");
    flags.add(app, "--seed", "seed", "base seed; repeat r uses seed + r");
    flags.add(app, "--kernel", "kernel", "rbf|linear, or per method: gpc=linear,slt_gp=rbf");
    flags.add(app, "--out", "out", "output path (prefix for run)");
    flags.add(app, "--sigma0-sq", "sigma0_sq", "sub-Gaussian variance factor in [0, 1/2)");
    flags.add(app, "--delta", "delta", "bound confidence in (0, 1]");
    flags.add(app, "--csv", "csv", "CSV file to use instead of a generator");
    flags.add(app, "--input-cols", "input_cols", "CSV input columns (names or 0-based indices)");
    flags.add(app, "--priv-cols", "priv_cols", "CSV privileged columns");
    flags.add(app, "--label-col", "label_col", "CSV label column");
    flags.add(app, "--train-fraction", "train_fraction", "CSV training fraction");
    flags.add(app, "--restarts", "restarts", "hyperparameter search restarts");
    flags.add(app, "--max-evals", "max_evals", "objective evaluations per restart");
    flags.add(app, "--threads", "threads", "worker threads (default: SLTGP_THREADS or 1)");
    flags.add(app, "--n-train", "n_train", "training set size");
    flags.add(app, "--n-test", "n_test", "test set size");
}

void write_to(const std::string& path, const std::function<void(std::ostream&)>& writer) {
    if (path.empty() || path == "-") {
        writer(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw sltgp::ConfigError("cannot write '" + path + "'");
    }
    writer(out);
}

int report(const char* kind, const std::exception& e, int code) {
    std::cerr << "sltgp: " << kind << ": " << e.what() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Soft-label-transferred Gaussian process classification benchmarks"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "key = value configuration file (flags override it)");

    FlagSet run_flags;
    FlagSet bound_flags;
    FlagSet sweep_flags;
    FlagSet timing_flags;
    FlagSet gen_flags;
    CLI::App* run = app.add_subcommand("run", "benchmark accuracy over repeats");
    CLI::App* bound = app.add_subcommand("bound", "fit SLT-GP and evaluate the PAC-Bayes risk bound");
    CLI::App* sweep = app.add_subcommand("rho-sweep", "bound-optimal versus risk-optimal rho over noise rates");
    CLI::App* timing = app.add_subcommand("timing", "fit time versus training set size");
    CLI::App* gen = app.add_subcommand("gen", "write generated datasets as CSV");
    add_common(run, run_flags);
    add_common(bound, bound_flags);
    add_common(sweep, sweep_flags);
    sweep_flags.add(sweep, "--r-grid", "r_grid", "comma-separated noise rates");
    add_common(timing, timing_flags);
    timing_flags.add(timing, "--n-grid", "n_grid", "comma-separated training sizes");
    timing_flags.add(timing, "--timing-repeats", "timing_repeats", "fits timed per size and method");
    add_common(gen, gen_flags);
    for (CLI::App* sub : {run, bound, sweep, timing, gen}) {
        sub->add_option("--config", config_path, "key = value configuration file (flags override it)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        sltgp::ExperimentConfig config;
        if (gen->parsed()) {
            config.repeats = 1;
        }
        if (!config_path.empty()) {
            sltgp::apply_config_file(config_path, config);
        }
        if (run->parsed()) {
            run_flags.apply(config);
            const sltgp::RunReport result = sltgp::cmd_run(config);
            if (config.output.empty()) {
                sltgp::write_repeats_csv(result, std::cout);
            } else {
                write_to(config.output + "_repeats.csv", [&](std::ostream& o) { sltgp::write_repeats_csv(result, o); });
                write_to(config.output + "_timing.csv", [&](std::ostream& o) { sltgp::write_timing_csv(result, o); });
                write_to(config.output + "_summary.csv", [&](std::ostream& o) { sltgp::write_summary_csv(result, o); });
            }
            sltgp::write_summary_csv(result, config.output.empty() ? std::cerr : std::cout);
        } else if (bound->parsed()) {
            bound_flags.apply(config);
            const sltgp::BoundReport result = sltgp::cmd_bound(config);
            write_to(config.output, [&](std::ostream& o) { sltgp::write_bound_csv(result, o); });
        } else if (sweep->parsed()) {
            sweep_flags.apply(config);
            const auto rows = sltgp::cmd_rho_sweep(config);
            write_to(config.output, [&](std::ostream& o) { sltgp::write_sweep_csv(rows, o); });
        } else if (timing->parsed()) {
            timing_flags.apply(config);
            const auto rows = sltgp::cmd_timing(config);
            write_to(config.output, [&](std::ostream& o) { sltgp::write_timing_rows_csv(rows, o); });
        } else if (gen->parsed()) {
            gen_flags.apply(config);
            sltgp::validate(config);
            const std::string root = config.output.empty() ? "." : config.output;
            for (int r = 0; r < config.repeats; ++r) {
                const std::string dir = config.repeats == 1 ? root : root + "/repeat_" + std::to_string(r);
                sltgp::write_dataset(sltgp::repeat_dataset(config, r), dir);
            }
        }
    } catch (const sltgp::ConfigError& e) {
        return report("configuration error", e, kUsage);
    } catch (const sltgp::UnknownGenerator& e) {
        return report("configuration error", e, kUsage);
    } catch (const sltgp::ColumnOverlap& e) {
        return report("configuration error", e, kUsage);
    } catch (const sltgp::ParseError& e) {
        return report("input error", e, kUsage);
    } catch (const sltgp::SingleClass& e) {
        return report("input error", e, kUsage);
    } catch (const sltgp::DomainError& e) {
        return report("domain error", e, kDomain);
    } catch (const sltgp::ROutOfRange& e) {
        return report("domain error", e, kDomain);
    } catch (const sltgp::RhoOutOfRange& e) {
        return report("domain error", e, kDomain);
    } catch (const sltgp::NotPositiveDefinite& e) {
        return report("numerical error", e, kNumerical);
    } catch (const std::exception& e) {
        return report("error", e, kFailure);
    }
    return kOk;
}
