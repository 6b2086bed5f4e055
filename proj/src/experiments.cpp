#include "sltgp/experiments.hpp"

#include "sltgp/errors.hpp"
#include "sltgp/gpc.hpp"
#include "sltgp/pacbayes.hpp"
#include "sltgp/rng.hpp"
#include "sltgp/slt.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace sltgp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::size_t end = comma == std::string_view::npos ? text.size() : comma;
        std::string item = trim(text.substr(start, end - start));
        if (!item.empty()) {
            out.push_back(std::move(item));
        }
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError("bad value '" + text + "' for " + key);
    }
    return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "1" || text == "true" || text == "yes") return true;
    if (text == "0" || text == "false" || text == "no") return false;
    throw ConfigError("bad boolean '" + text + "' for " + key);
}

// Each item is run exactly once; results land in slot i regardless of which worker ran it.
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const int workers = std::clamp(threads, 1, std::max(count, 1));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

KernelSpec kernel_template(KernelFamily family) {
    return family == KernelFamily::Rbf ? KernelSpec::rbf(1.0, 1.0) : KernelSpec::linear(1.0);
}

SearchConfig search_for(const ExperimentConfig& config, std::uint64_t seed, std::uint64_t salt) {
    SearchConfig search = config.search;
    std::uint64_t state = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
    search.seed = splitmix64(state);
    return search;
}

bool needs_privileged(const std::vector<Method>& methods) {
    return std::any_of(methods.begin(), methods.end(), [](Method m) { return m != Method::Gpc; });
}

std::string csv_quote(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) {
        return text;
    }
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"') out += '"';
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

struct Extractor {
    GpcSelection selection;
    GpcPosterior posterior;
    double seconds = 0.0;
};

Extractor fit_extractor(const PrivilegedDataset& data, KernelFamily family, const SearchConfig& search) {
    const auto start = std::chrono::steady_clock::now();
    Extractor out;
    out.selection = optimize_gpc(data.train_privileged, data.train_labels, kernel_template(family), search);
    out.posterior = fit_gpc(data.train_privileged, data.train_labels, out.selection.kernel, search.ep);
    out.seconds = seconds_since(start);
    return out;
}

MethodOutcome failed(Method method, const std::string& message) {
    MethodOutcome out;
    out.method = method;
    out.ok = false;
    out.message = message;
    out.accuracy = kNaN;
    out.rho = kNaN;
    out.log_marginal = kNaN;
    return out;
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::Gpc:
            return "gpc";
        case Method::SltGp:
            return "slt_gp";
        case Method::GpcReference:
            return "gpc_reference";
    }
    return "unknown";
}

Method method_from_string(std::string_view name) {
    for (Method m : {Method::Gpc, Method::SltGp, Method::GpcReference}) {
        if (to_string(m) == name) return m;
    }
    throw ConfigError("unknown method '" + std::string(name) + "' (expected gpc, slt_gp or gpc_reference)");
}

std::vector<Method> parse_methods(std::string_view list) {
    std::vector<Method> out;
    for (const std::string& item : split_list(list)) {
        const Method m = method_from_string(item);
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

KernelFamily default_kernel_family(std::string_view dataset) {
    if (dataset == "clean_soft_label" || dataset == "clean_feature" || dataset == "relevant_feature" ||
        dataset == "independent_feature") {
        return KernelFamily::Linear;
    }
    return KernelFamily::Rbf;
}

KernelFamily kernel_family_for(const ExperimentConfig& config, Method method) {
    const auto it = config.kernels.find(method);
    return it != config.kernels.end() ? it->second : default_kernel_family(config.dataset);
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SLTGP_THREADS")) {
        int value = 0;
        const std::string text = trim(env);
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec == std::errc() && ptr == text.data() + text.size() && value > 0) return value;
        throw ConfigError("SLTGP_THREADS must be a positive integer, got '" + text + "'");
    }
    return 1;
}

void validate(const ExperimentConfig& config) {
    if (config.repeats < 1) throw ConfigError("repeats must be at least 1");
    if (config.methods.empty()) throw ConfigError("at least one method is required");
    if (config.dataset == "csv") {
        if (!config.csv) throw ConfigError("dataset 'csv' needs a CSV path and column selection");
        if (needs_privileged(config.methods) && config.csv->privileged_columns.empty()) {
            throw ConfigError("slt_gp and gpc_reference need privileged columns");
        }
    } else if (config.dataset != "rho_sweep") {
        generator_from_string(config.dataset);
    }
    if (config.sizes.n_train < 2 || config.sizes.n_test < 1) {
        throw ConfigError("need n_train >= 2 and n_test >= 1");
    }
    if (config.search.restarts < 1) throw ConfigError("restarts must be at least 1");
    if (config.timing_repeats < 1) throw ConfigError("timing repeats must be at least 1");
    if (config.threads < 0) throw ConfigError("threads must be non-negative");
    validate(BoundInputs{config.sigma0_sq, config.delta, 1, 0.0});
}

void apply_config_value(const std::string& key, const std::string& value, ExperimentConfig& config) {
    auto ensure_csv = [&config]() -> CsvOptions& {
        if (!config.csv) config.csv.emplace();
        return *config.csv;
    };
    if (key == "dataset") {
        config.dataset = value;
    } else if (key == "methods") {
        config.methods = parse_methods(value);
    } else if (key == "repeats") {
        config.repeats = parse_number<int>(key, value);
    } else if (key == "seed") {
        config.base_seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "kernel") {
        // "rbf" for every method, or "gpc=linear,slt_gp=rbf".
        auto family_of = [](const std::string& text) {
            try {
                return kernel_family_from_string(text);
            } catch (const InvalidArgument& e) {
                throw ConfigError(e.what());
            }
        };
        for (const std::string& item : split_list(value)) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) {
                const KernelFamily family = family_of(item);
                for (Method m : {Method::Gpc, Method::SltGp, Method::GpcReference}) config.kernels[m] = family;
            } else {
                config.kernels[method_from_string(trim(item.substr(0, eq)))] =
                    family_of(trim(item.substr(eq + 1)));
            }
        }
    } else if (key == "out") {
        config.output = value;
    } else if (key == "sigma0_sq") {
        config.sigma0_sq = parse_number<double>(key, value);
    } else if (key == "delta") {
        config.delta = parse_number<double>(key, value);
    } else if (key == "restarts") {
        config.search.restarts = parse_number<int>(key, value);
    } else if (key == "max_evals") {
        config.search.max_evals = parse_number<int>(key, value);
    } else if (key == "threads") {
        config.threads = parse_number<int>(key, value);
    } else if (key == "n_train") {
        config.sizes.n_train = parse_number<Eigen::Index>(key, value);
    } else if (key == "n_test") {
        config.sizes.n_test = parse_number<Eigen::Index>(key, value);
    } else if (key == "csv") {
        ensure_csv().path = value;
        config.dataset = "csv";
    } else if (key == "input_cols") {
        ensure_csv().input_columns = split_list(value);
    } else if (key == "priv_cols") {
        ensure_csv().privileged_columns = split_list(value);
    } else if (key == "label_col") {
        ensure_csv().label_column = value;
    } else if (key == "train_fraction") {
        ensure_csv().train_fraction = parse_number<double>(key, value);
    } else if (key == "balance") {
        ensure_csv().balance_classes = parse_bool(key, value);
    } else if (key == "r_grid") {
        config.r_grid.clear();
        for (const std::string& item : split_list(value)) config.r_grid.push_back(parse_number<double>(key, item));
    } else if (key == "n_grid") {
        config.n_grid.clear();
        for (const std::string& item : split_list(value))
            config.n_grid.push_back(parse_number<Eigen::Index>(key, item));
    } else if (key == "timing_repeats") {
        config.timing_repeats = parse_number<int>(key, value);
    } else {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
}

void apply_config_file(const std::string& path, ExperimentConfig& config) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string content = trim(line.substr(0, line.find('#')));
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(number) + ": expected key = value");
        }
        apply_config_value(trim(content.substr(0, eq)), trim(content.substr(eq + 1)), config);
    }
}

PrivilegedDataset repeat_dataset(const ExperimentConfig& config, int repeat) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(repeat);
    if (config.dataset == "csv") {
        CsvOptions options = *config.csv;
        options.seed = seed;
        return load_csv(options).data;
    }
    return generate(config.dataset, seed, config.sizes);
}

RepeatOutcome run_repeat(const ExperimentConfig& config, int repeat) {
    RepeatOutcome out;
    out.repeat = repeat;
    out.seed = config.base_seed + static_cast<std::uint64_t>(repeat);

    PrivilegedDataset data;
    try {
        data = repeat_dataset(config, repeat);
    } catch (const std::exception& e) {
        for (Method m : config.methods) out.methods.push_back(failed(m, std::string("dataset: ") + e.what()));
        return out;
    }

    std::optional<Extractor> extractor;
    std::string extractor_error;
    if (needs_privileged(config.methods)) {
        try {
            extractor = fit_extractor(data, kernel_family_for(config, Method::GpcReference),
                                      search_for(config, out.seed, 3));
        } catch (const std::exception& e) {
            extractor_error = std::string("soft labels: ") + e.what();
        }
    }

    for (Method method : config.methods) {
        try {
            if (method != Method::Gpc && !extractor) {
                out.methods.push_back(failed(method, extractor_error));
                continue;
            }
            MethodOutcome result;
            result.method = method;
            result.rho = kNaN;
            const auto start = std::chrono::steady_clock::now();
            if (method == Method::Gpc) {
                const SearchConfig search = search_for(config, out.seed, 1);
                const GpcSelection sel = optimize_gpc(data.train_inputs, data.train_labels,
                                                      kernel_template(kernel_family_for(config, method)), search);
                const GpcPosterior post = fit_gpc(data.train_inputs, data.train_labels, sel.kernel, search.ep);
                result.accuracy = accuracy(predict_prob(post, data.test_inputs), data.test_labels);
                result.log_marginal = post.log_marginal;
                result.converged = post.converged;
                result.sweeps = post.sweeps_used;
                result.evaluations = sel.evaluations;
                result.wall_seconds = seconds_since(start);
            } else if (method == Method::GpcReference) {
                const GpcPosterior& post = extractor->posterior;
                result.accuracy = accuracy(predict_prob(post, data.test_privileged), data.test_labels);
                result.log_marginal = post.log_marginal;
                result.converged = post.converged;
                result.sweeps = post.sweeps_used;
                result.evaluations = extractor->selection.evaluations;
                result.wall_seconds = extractor->seconds + seconds_since(start);
            } else {
                const SearchConfig search = search_for(config, out.seed, 2);
                const Eigen::VectorXd& s = extractor->posterior.mean;
                const SltSelection sel = optimize_slt(data.train_inputs, data.train_labels, s,
                                                      kernel_template(kernel_family_for(config, method)), search);
                const SltModel model = fit_slt(data.train_inputs, data.train_labels, s, sel.kernel, sel.rho, search.ep);
                result.accuracy = accuracy(predict_prob_slt(model, data.test_inputs), data.test_labels);
                result.rho = sel.rho;
                result.log_marginal = conditional_log_marginal(model);
                result.converged = model.converged;
                result.sweeps = model.sweeps_used;
                result.evaluations = sel.evaluations;
                result.wall_seconds = extractor->seconds + seconds_since(start);
            }
            result.ok = true;
            out.methods.push_back(std::move(result));
        } catch (const std::exception& e) {
            out.methods.push_back(failed(method, e.what()));
        }
    }
    return out;
}

std::vector<SummaryRow> summarize(const std::vector<RepeatOutcome>& repeats, const std::vector<Method>& methods) {
    std::vector<SummaryRow> rows;
    for (Method method : methods) {
        SummaryRow row;
        row.method = method;
        std::vector<double> values;
        for (const RepeatOutcome& rep : repeats) {
            for (const MethodOutcome& m : rep.methods) {
                if (m.method != method) continue;
                if (m.ok) {
                    values.push_back(m.accuracy);
                } else {
                    ++row.n_failed;
                }
            }
        }
        row.n_ok = static_cast<int>(values.size());
        if (values.empty()) {
            row.mean_accuracy = kNaN;
            row.std_accuracy = kNaN;
        } else {
            double sum = 0.0;
            for (double v : values) sum += v;
            row.mean_accuracy = sum / static_cast<double>(values.size());
            double ss = 0.0;
            for (double v : values) ss += (v - row.mean_accuracy) * (v - row.mean_accuracy);
            row.single_sample = values.size() == 1;
            row.std_accuracy = row.single_sample ? 0.0 : std::sqrt(ss / static_cast<double>(values.size() - 1));
        }
        rows.push_back(row);
    }
    return rows;
}

RunReport cmd_run(const ExperimentConfig& config) {
    validate(config);
    RunReport report;
    report.repeats.resize(static_cast<std::size_t>(config.repeats));
    parallel_for(config.repeats, resolve_threads(config.threads),
                 [&](int r) { report.repeats[static_cast<std::size_t>(r)] = run_repeat(config, r); });
    report.summary = summarize(report.repeats, config.methods);
    return report;
}

void write_repeats_csv(const RunReport& report, std::ostream& out) {
    out << "repeat,seed,method,status,accuracy,rho,log_marginal,converged,sweeps,evaluations,message\n";
    for (const RepeatOutcome& rep : report.repeats) {
        for (const MethodOutcome& m : rep.methods) {
            out << rep.repeat << ',' << rep.seed << ',' << to_string(m.method) << ',' << (m.ok ? "ok" : "failed")
                << ',' << format_double(m.accuracy) << ',' << format_double(m.rho) << ','
                << format_double(m.log_marginal) << ',' << (m.converged ? 1 : 0) << ',' << m.sweeps << ','
                << m.evaluations << ',' << csv_quote(m.message) << '\n';
        }
    }
}

void write_timing_csv(const RunReport& report, std::ostream& out) {
    out << "repeat,method,wall_seconds\n";
    for (const RepeatOutcome& rep : report.repeats) {
        for (const MethodOutcome& m : rep.methods) {
            out << rep.repeat << ',' << to_string(m.method) << ',' << format_double(m.wall_seconds) << '\n';
        }
    }
}

void write_summary_csv(const RunReport& report, std::ostream& out) {
    out << "method,n_ok,n_failed,mean_accuracy,std_accuracy,single_sample\n";
    for (const SummaryRow& row : report.summary) {
        out << to_string(row.method) << ',' << row.n_ok << ',' << row.n_failed << ','
            << format_double(row.mean_accuracy) << ',' << format_double(row.std_accuracy) << ','
            << (row.single_sample ? 1 : 0) << '\n';
    }
}

BoundReport cmd_bound(const ExperimentConfig& config) {
    validate(config);
    const PrivilegedDataset data = repeat_dataset(config, 0);
    const Extractor extractor =
        fit_extractor(data, kernel_family_for(config, Method::GpcReference), search_for(config, config.base_seed, 3));
    const Eigen::VectorXd& s = extractor.posterior.mean;
    const SearchConfig search = search_for(config, config.base_seed, 2);
    const SltSelection sel = optimize_slt(data.train_inputs, data.train_labels, s,
                                          kernel_template(kernel_family_for(config, Method::SltGp)), search);
    const SltModel model = fit_slt(data.train_inputs, data.train_labels, s, sel.kernel, sel.rho, search.ep);

    BoundReport report;
    report.dataset = config.dataset;
    report.seed = config.base_seed;
    report.n = static_cast<long>(data.train_labels.size());
    report.rho = sel.rho;
    report.log_conditional_marginal = conditional_log_marginal(model);
    report.sigma0_sq = config.sigma0_sq;
    report.delta = config.delta;
    report.b = b_constant(config.sigma0_sq);
    report.c = c_threshold(config.sigma0_sq);
    report.bound = risk_bound(BoundInputs{config.sigma0_sq, config.delta, report.n, report.log_conditional_marginal},
                              report.b);
    return report;
}

void write_bound_csv(const BoundReport& report, std::ostream& out) {
    out << "dataset,seed,n,rho,log_conditional_marginal,sigma0_sq,delta,b,c,bound\n";
    out << csv_quote(report.dataset) << ',' << report.seed << ',' << report.n << ',' << format_double(report.rho)
        << ',' << format_double(report.log_conditional_marginal) << ',' << format_double(report.sigma0_sq) << ','
        << format_double(report.delta) << ',' << format_double(report.b) << ',' << format_double(report.c) << ','
        << format_double(report.bound) << '\n';
}

SweepRow rho_sweep_cell(const ExperimentConfig& config, double r, int repeat) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(repeat);
    const PrivilegedDataset data = generate_rho_sweep(r, seed, config.sizes.n_train, config.sizes.n_test);
    const Extractor extractor = fit_extractor(data, KernelFamily::Rbf, search_for(config, seed, 3));
    const Eigen::VectorXd& s = extractor.posterior.mean;

    // Amplitude fixed at 1/4; the length scale is chosen by empirical Bayes jointly with rho.
    SearchConfig search = search_for(config, seed, 2);
    search.optimize_amplitude = false;
    const SltSelection sel = optimize_slt(data.train_inputs, data.train_labels, s, KernelSpec::rbf(1.0, 0.25), search);

    SweepRow row;
    row.r = r;
    row.repeat = repeat;
    row.rho_bound = optimize_rho_by_bound(data.train_inputs, data.train_labels, s, sel.kernel, config.sigma0_sq,
                                          config.delta, search.ep)
                        .search.rho;
    row.rho_risk = optimize_rho_by_risk(data.train_inputs, data.train_labels, s, sel.kernel, data.test_inputs,
                                        data.test_labels, search.ep)
                       .rho;
    return row;
}

std::vector<SweepRow> cmd_rho_sweep(const ExperimentConfig& config) {
    validate(config);
    if (config.r_grid.empty()) throw ConfigError("r grid is empty");
    for (double r : config.r_grid) {
        if (!(r >= 0.0 && r <= 1.0)) throw ROutOfRange("noise rate r must lie in [0, 1]");
    }
    const int cells = static_cast<int>(config.r_grid.size()) * config.repeats;
    std::vector<SweepRow> rows(static_cast<std::size_t>(cells));
    parallel_for(cells, resolve_threads(config.threads), [&](int k) {
        const double r = config.r_grid[static_cast<std::size_t>(k / config.repeats)];
        rows[static_cast<std::size_t>(k)] = rho_sweep_cell(config, r, k % config.repeats);
    });
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "r,repeat,rho_bound,rho_risk\n";
    for (const SweepRow& row : rows) {
        out << format_double(row.r) << ',' << row.repeat << ',' << format_double(row.rho_bound) << ','
            << format_double(row.rho_risk) << '\n';
    }
}

std::vector<TimingRow> cmd_timing(const ExperimentConfig& config) {
    validate(config);
    if (config.dataset == "csv") throw ConfigError("timing runs on generated datasets only");
    if (config.n_grid.empty()) throw ConfigError("n grid is empty");
    std::vector<TimingRow> rows;
    for (Eigen::Index n : config.n_grid) {
        if (n < 2) throw ConfigError("timing sizes must be at least 2");
        const PrivilegedDataset data = generate(config.dataset, config.base_seed, {n, config.sizes.n_test});
        const Extractor extractor = fit_extractor(data, kernel_family_for(config, Method::GpcReference),
                                                  search_for(config, config.base_seed, 3));
        const Eigen::VectorXd& s = extractor.posterior.mean;
        const SearchConfig gpc_search = search_for(config, config.base_seed, 1);
        const SearchConfig slt_search = search_for(config, config.base_seed, 2);
        const GpcSelection gsel =
            optimize_gpc(data.train_inputs, data.train_labels,
                         kernel_template(kernel_family_for(config, Method::Gpc)), gpc_search);
        const SltSelection ssel =
            optimize_slt(data.train_inputs, data.train_labels, s,
                         kernel_template(kernel_family_for(config, Method::SltGp)), slt_search);

        for (int rep = 0; rep < config.timing_repeats; ++rep) {
            for (Method method : config.methods) {
                if (method == Method::GpcReference) continue;
                TimingRow row;
                row.n = n;
                row.method = method;
                row.repeat = rep;
                const auto start = std::chrono::steady_clock::now();
                if (method == Method::Gpc) {
                    const GpcPosterior post = fit_gpc(data.train_inputs, data.train_labels, gsel.kernel, gpc_search.ep);
                    row.fit_seconds = seconds_since(start);
                    row.accuracy = accuracy(predict_prob(post, data.test_inputs), data.test_labels);
                } else {
                    const SltModel model =
                        fit_slt(data.train_inputs, data.train_labels, s, ssel.kernel, ssel.rho, slt_search.ep);
                    row.fit_seconds = seconds_since(start);
                    row.accuracy = accuracy(predict_prob_slt(model, data.test_inputs), data.test_labels);
                }
                rows.push_back(row);
            }
        }
    }
    return rows;
}

void write_timing_rows_csv(const std::vector<TimingRow>& rows, std::ostream& out) {
    out << "n,method,repeat,fit_seconds,accuracy\n";
    for (const TimingRow& row : rows) {
        out << row.n << ',' << to_string(row.method) << ',' << row.repeat << ',' << format_double(row.fit_seconds)
            << ',' << format_double(row.accuracy) << '\n';
    }
}

double timing_loglog_slope(const std::vector<TimingRow>& rows, Method method) {
    std::map<Eigen::Index, std::vector<double>> by_n;
    for (const TimingRow& row : rows) {
        if (row.method == method) by_n[row.n].push_back(row.fit_seconds);
    }
    if (by_n.size() < 2) throw InvalidArgument("slope needs timings at two or more sizes");
    std::vector<double> lx;
    std::vector<double> ly;
    for (auto& [n, times] : by_n) {
        auto mid = times.begin() + static_cast<std::ptrdiff_t>(times.size() / 2);
        std::nth_element(times.begin(), mid, times.end());
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(*mid));
    }
    const auto m = static_cast<double>(lx.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i] / m;
        my += ly[i] / m;
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace sltgp
