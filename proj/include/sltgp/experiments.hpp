#pragma once

#include "sltgp/datagen.hpp"
#include "sltgp/kernels.hpp"
#include "sltgp/model_selection.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace sltgp {

enum class Method { Gpc, SltGp, GpcReference };

std::string_view to_string(Method m);
Method method_from_string(std::string_view name);
/// Comma-separated list such as "gpc,slt_gp". Duplicates are dropped, order is kept.
std::vector<Method> parse_methods(std::string_view list);

struct ExperimentConfig {
    /// Generator name, or "csv" together with `csv`.
    std::string dataset = "clean_soft_label";
    std::optional<CsvOptions> csv;
    std::vector<Method> methods{Method::Gpc, Method::SltGp, Method::GpcReference};
    int repeats = 100;
    std::uint64_t base_seed = 0;
    GeneratorOptions sizes;
    /// Per-method kernel family; methods without an entry use the dataset default.
    std::map<Method, KernelFamily> kernels;
    SearchConfig search;
    /// Output prefix. Empty means the caller handles output.
    std::string output;
    double sigma0_sq = 0.1;
    double delta = 0.05;
    /// Worker threads for repeats; 0 means SLTGP_THREADS or 1.
    int threads = 0;
    /// rho-sweep settings.
    std::vector<double> r_grid{0.0, 0.25, 0.5, 0.75, 1.0};
    /// timing settings.
    std::vector<Eigen::Index> n_grid{20, 40, 60, 80, 100, 120, 140, 160, 180, 200};
    int timing_repeats = 3;
};

/// Throws ConfigError (or DomainError for sigma0_sq / delta) on an unusable configuration.
void validate(const ExperimentConfig& config);

/// Reads "key = value" lines ('#' starts a comment) into `config`. Unknown keys are errors.
void apply_config_file(const std::string& path, ExperimentConfig& config);
void apply_config_value(const std::string& key, const std::string& value, ExperimentConfig& config);

/// Kernel family the benchmark uses on `dataset` when no override is given.
KernelFamily default_kernel_family(std::string_view dataset);
KernelFamily kernel_family_for(const ExperimentConfig& config, Method method);

/// Worker count: explicit value if positive, else SLTGP_THREADS, else 1.
int resolve_threads(int requested);

/// Dataset for one repeat: generator seeded with base_seed + repeat, or a reshuffled CSV split.
PrivilegedDataset repeat_dataset(const ExperimentConfig& config, int repeat);

struct MethodOutcome {
    Method method = Method::Gpc;
    bool ok = false;
    std::string message;
    double accuracy = 0.0;
    double rho = 0.0;           // NaN for methods without a task similarity
    double log_marginal = 0.0;  // conditional log marginal for slt_gp
    bool converged = false;
    int sweeps = 0;
    int evaluations = 0;
    double wall_seconds = 0.0;
};

struct RepeatOutcome {
    int repeat = 0;
    std::uint64_t seed = 0;
    std::vector<MethodOutcome> methods;
};

struct SummaryRow {
    Method method = Method::Gpc;
    int n_ok = 0;
    int n_failed = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;  // sample standard deviation
    bool single_sample = false;
};

struct RunReport {
    std::vector<RepeatOutcome> repeats;
    std::vector<SummaryRow> summary;
};

/// Runs every repeat and method of a benchmark. Per-repeat failures become failure rows.
RunReport cmd_run(const ExperimentConfig& config);
/// One repeat of cmd_run.
RepeatOutcome run_repeat(const ExperimentConfig& config, int repeat);
std::vector<SummaryRow> summarize(const std::vector<RepeatOutcome>& repeats, const std::vector<Method>& methods);

/// Per-repeat rows; wall times are left out so reruns compare byte for byte.
void write_repeats_csv(const RunReport& report, std::ostream& out);
void write_timing_csv(const RunReport& report, std::ostream& out);
void write_summary_csv(const RunReport& report, std::ostream& out);

struct BoundReport {
    std::string dataset;
    std::uint64_t seed = 0;
    long n = 0;
    double rho = 0.0;
    double log_conditional_marginal = 0.0;
    double sigma0_sq = 0.0;
    double delta = 0.0;
    double b = 0.0;
    double c = 0.0;
    double bound = 0.0;
};

/// Fits SLT-GP by empirical Bayes on the dataset of repeat 0 and evaluates the risk bound.
BoundReport cmd_bound(const ExperimentConfig& config);
void write_bound_csv(const BoundReport& report, std::ostream& out);

struct SweepRow {
    double r = 0.0;
    int repeat = 0;
    double rho_bound = 0.0;
    double rho_risk = 0.0;
};

/// For each r and repeat: rho minimizing the risk bound and rho minimizing the test Gibbs risk.
std::vector<SweepRow> cmd_rho_sweep(const ExperimentConfig& config);
SweepRow rho_sweep_cell(const ExperimentConfig& config, double r, int repeat);
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

struct TimingRow {
    Eigen::Index n = 0;
    Method method = Method::Gpc;
    int repeat = 0;
    double fit_seconds = 0.0;
    double accuracy = 0.0;
};

/// Fit time at hyperparameters chosen beforehand by empirical Bayes (search time excluded).
std::vector<TimingRow> cmd_timing(const ExperimentConfig& config);
void write_timing_rows_csv(const std::vector<TimingRow>& rows, std::ostream& out);

/// Least-squares slope of log(median time) on log(n) for one method.
double timing_loglog_slope(const std::vector<TimingRow>& rows, Method method);

/// Shortest "%.17g"-style text that reads back to the same double.
std::string format_double(double v);

}  // namespace sltgp
