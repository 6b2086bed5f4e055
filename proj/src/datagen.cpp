#include "sltgp/datagen.hpp"

#include "sltgp/errors.hpp"
#include "sltgp/kernels.hpp"
#include "sltgp/numerics.hpp"
#include "sltgp/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace sltgp {

namespace {

constexpr Eigen::Index kInputDim = 50;        // d
constexpr Eigen::Index kRelevantDim = 3;      // d*
constexpr Eigen::Index kSpatialDim = 2;       // c, c*
constexpr double kGeneratorAmplitude = 10.0;  // k0 amplitude
constexpr double kGpMaxJitter = 1e-2;

// Independent substreams per dataset component.
enum Stream : std::uint64_t {
    kAlpha = 1,
    kInputs = 2,
    kNoise = 3,
    kPrivileged = 4,
    kSubsets = 5,
    kLatent = 6,
    kLatentAux = 7,
    kSplit = 11,
};

double sign_label(double v) {
    return v >= 0.0 ? 1.0 : -1.0;
}

struct Pool {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd privileged;
    Eigen::VectorXd labels;
};

PrivilegedDataset split(Pool pool, Eigen::Index n_train, std::string name, std::uint64_t seed) {
    const Eigen::Index n_test = pool.inputs.rows() - n_train;
    PrivilegedDataset out;
    out.train_inputs = pool.inputs.topRows(n_train);
    out.train_privileged = pool.privileged.topRows(n_train);
    out.train_labels = pool.labels.head(n_train);
    out.test_inputs = pool.inputs.bottomRows(n_test);
    out.test_privileged = pool.privileged.bottomRows(n_test);
    out.test_labels = pool.labels.tail(n_test);
    out.generator_name = std::move(name);
    out.seed = seed;
    return out;
}

// One joint draw from N(0, K) over the rows of `points`.
Eigen::VectorXd gp_draw(const KernelSpec& kernel, const Eigen::MatrixXd& points, Rng& rng) {
    const numerics::PsdFactor factor = numerics::psd_factorize(kernels::gram(kernel, points), kGpMaxJitter);
    return factor.lower.triangularView<Eigen::Lower>() * rng.normal_vector(points.rows());
}

void check_sizes(const GeneratorOptions& options) {
    if (options.n_train < 1 || options.n_test < 0) {
        throw InvalidArgument("generator needs n_train >= 1 and n_test >= 0");
    }
}

}  // namespace

std::string_view to_string(Generator g) {
    switch (g) {
        case Generator::CleanSoftLabel:
            return "clean_soft_label";
        case Generator::CleanFeature:
            return "clean_feature";
        case Generator::RelevantFeature:
            return "relevant_feature";
        case Generator::IndependentFeature:
            return "independent_feature";
        case Generator::LatentGp:
            return "latent_gp";
        case Generator::NoiseVariance:
            return "noise_variance";
    }
    return "unknown";
}

const std::vector<Generator>& all_generators() {
    static const std::vector<Generator> all{Generator::CleanSoftLabel,     Generator::CleanFeature,
                                            Generator::RelevantFeature,    Generator::IndependentFeature,
                                            Generator::LatentGp,           Generator::NoiseVariance};
    return all;
}

Generator generator_from_string(std::string_view name) {
    for (Generator g : all_generators()) {
        if (to_string(g) == name) {
            return g;
        }
    }
    throw UnknownGenerator("unknown generator '" + std::string(name) + "'");
}

PrivilegedDataset generate(std::string_view name, std::uint64_t seed, const GeneratorOptions& options) {
    return generate(generator_from_string(name), seed, options);
}

PrivilegedDataset generate(Generator name, std::uint64_t seed, const GeneratorOptions& options,
                           GeneratorTrace* trace) {
    check_sizes(options);
    const Eigen::Index n = options.n_train + options.n_test;
    Rng alpha_rng(seed, kAlpha);
    Rng input_rng(seed, kInputs);
    Rng noise_rng(seed, kNoise);
    Rng priv_rng(seed, kPrivileged);
    Pool pool;
    pool.labels.resize(n);

    switch (name) {
        case Generator::CleanSoftLabel: {
            const Eigen::VectorXd alpha = alpha_rng.normal_vector(kInputDim);
            pool.inputs = input_rng.normal_matrix(n, kInputDim);
            pool.privileged = pool.inputs * alpha;
            for (Eigen::Index i = 0; i < n; ++i) {
                pool.labels(i) = sign_label(pool.privileged(i, 0) + noise_rng.normal());
            }
            if (trace != nullptr) trace->latent = pool.privileged.col(0);
            break;
        }
        case Generator::CleanFeature: {
            const Eigen::VectorXd alpha = alpha_rng.normal_vector(kInputDim);
            pool.privileged = priv_rng.normal_matrix(n, kInputDim);
            pool.inputs = pool.privileged + noise_rng.normal_matrix(n, kInputDim);
            const Eigen::VectorXd score = pool.privileged * alpha;
            for (Eigen::Index i = 0; i < n; ++i) {
                pool.labels(i) = sign_label(score(i));
            }
            break;
        }
        case Generator::RelevantFeature: {
            const Eigen::VectorXd alpha_star = alpha_rng.normal_vector(kRelevantDim);
            pool.inputs = input_rng.normal_matrix(n, kInputDim);
            pool.privileged = pool.inputs.leftCols(kRelevantDim);
            const Eigen::VectorXd score = pool.privileged * alpha_star;
            for (Eigen::Index i = 0; i < n; ++i) {
                pool.labels(i) = sign_label(score(i));
            }
            break;
        }
        case Generator::IndependentFeature: {
            const Eigen::VectorXd alpha_star = alpha_rng.normal_vector(kRelevantDim);
            pool.inputs = input_rng.normal_matrix(n, kInputDim);
            pool.privileged.resize(n, kRelevantDim);
            Rng subset_rng(seed, kSubsets);
            std::vector<Eigen::Index> columns(static_cast<std::size_t>(kInputDim));
            for (Eigen::Index i = 0; i < n; ++i) {
                std::iota(columns.begin(), columns.end(), Eigen::Index{0});
                // Partial Fisher-Yates: the first d* slots form a uniform d*-subset.
                for (Eigen::Index k = 0; k < kRelevantDim; ++k) {
                    const auto pick = static_cast<Eigen::Index>(subset_rng.below(static_cast<std::uint64_t>(kInputDim - k)));
                    std::swap(columns[static_cast<std::size_t>(k)], columns[static_cast<std::size_t>(k + pick)]);
                }
                std::sort(columns.begin(), columns.begin() + kRelevantDim);
                for (Eigen::Index k = 0; k < kRelevantDim; ++k) {
                    pool.privileged(i, k) = pool.inputs(i, columns[static_cast<std::size_t>(k)]);
                }
                pool.labels(i) = sign_label(pool.privileged.row(i).dot(alpha_star.transpose()));
            }
            break;
        }
        case Generator::LatentGp: {
            pool.inputs = input_rng.uniform_matrix(n, kSpatialDim, 0.0, 10.0);
            Rng latent_rng(seed, kLatent);
            pool.privileged = gp_draw(KernelSpec::rbf(1.0, kGeneratorAmplitude), pool.inputs, latent_rng);
            for (Eigen::Index i = 0; i < n; ++i) {
                pool.labels(i) = sign_label(pool.privileged(i, 0) + noise_rng.normal());
            }
            if (trace != nullptr) trace->latent = pool.privileged.col(0);
            break;
        }
        case Generator::NoiseVariance: {
            pool.inputs = input_rng.uniform_matrix(n, kSpatialDim, 0.0, 10.0);
            pool.privileged = priv_rng.uniform_matrix(n, kSpatialDim, 0.0, 10.0);
            const KernelSpec k0 = KernelSpec::rbf(1.0, kGeneratorAmplitude);
            Rng latent_rng(seed, kLatent);
            Rng aux_rng(seed, kLatentAux);
            const Eigen::VectorXd f = gp_draw(k0, pool.inputs, latent_rng);
            const Eigen::VectorXd g = gp_draw(k0, pool.privileged, aux_rng);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double eps = std::exp(0.5 * g(i)) * noise_rng.normal();
                pool.labels(i) = sign_label(f(i) + eps);
            }
            if (trace != nullptr) {
                trace->latent = f;
                trace->log_noise_variance = g;
            }
            break;
        }
    }
    return split(std::move(pool), options.n_train, std::string(to_string(name)), seed);
}

PrivilegedDataset generate_rho_sweep(double r, std::uint64_t seed, Eigen::Index n_train, Eigen::Index n_test) {
    if (!(r >= 0.0 && r <= 1.0)) {
        throw ROutOfRange("noise rate r must lie in [0, 1]");
    }
    check_sizes({n_train, n_test});
    const Eigen::Index n = n_train + n_test;
    Rng input_rng(seed, kInputs);
    Rng latent_rng(seed, kLatent);
    Rng aux_rng(seed, kLatentAux);
    Rng noise_rng(seed, kNoise);

    Pool pool;
    pool.inputs = input_rng.uniform_matrix(n, kSpatialDim, 0.0, 10.0);
    const Eigen::VectorXd f = gp_draw(KernelSpec::rbf(1.0, kGeneratorAmplitude), pool.inputs, latent_rng);
    pool.privileged.resize(n, 1);
    pool.labels.resize(n);
    const double g_scale = std::sqrt(kGeneratorAmplitude);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double g = g_scale * aux_rng.normal();
        pool.privileged(i, 0) = (1.0 - r) * f(i) + r * g;
        pool.labels(i) = sign_label(f(i) + noise_rng.normal());
    }
    return split(std::move(pool), n_train, "rho_sweep", seed);
}

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

bool parse_number(const std::string& text, double& value) {
    if (text.empty()) {
        return false;
    }
    char* end = nullptr;
    value = std::strtod(text.c_str(), &end);
    return end != text.c_str() && *end == '\0' && std::isfinite(value);
}

std::size_t resolve_column(const std::string& ref, const std::vector<std::string>& header) {
    const auto it = std::find(header.begin(), header.end(), ref);
    if (it != header.end()) {
        return static_cast<std::size_t>(it - header.begin());
    }
    if (!ref.empty() && std::all_of(ref.begin(), ref.end(), [](unsigned char c) { return std::isdigit(c); })) {
        const std::size_t index = std::stoul(ref);
        if (index < header.size()) {
            return index;
        }
    }
    throw ConfigError("unknown column '" + ref + "'");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_split(const std::string& path, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& privileged,
                 const Eigen::VectorXd& labels) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) out << "input_" << j << ',';
    for (Eigen::Index j = 0; j < privileged.cols(); ++j) out << "priv_" << j << ',';
    out << "label\n";
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        for (Eigen::Index j = 0; j < inputs.cols(); ++j) out << format_double(inputs(i, j)) << ',';
        for (Eigen::Index j = 0; j < privileged.cols(); ++j) out << format_double(privileged(i, j)) << ',';
        out << (labels(i) > 0 ? 1 : -1) << '\n';
    }
}

}  // namespace

CsvDataset load_csv(const CsvOptions& options) {
    std::ifstream in(options.path);
    if (!in) {
        throw ConfigError("cannot open '" + options.path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("missing header row", 1, 0);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_fields(line);

    std::vector<std::size_t> input_cols;
    std::vector<std::size_t> priv_cols;
    for (const auto& ref : options.input_columns) input_cols.push_back(resolve_column(ref, header));
    for (const auto& ref : options.privileged_columns) priv_cols.push_back(resolve_column(ref, header));
    const std::size_t label_col = resolve_column(options.label_column, header);
    if (input_cols.empty()) {
        throw ConfigError("at least one input column is required");
    }
    std::set<std::size_t> seen{label_col};
    for (std::size_t c : input_cols) {
        if (!seen.insert(c).second) throw ColumnOverlap("column '" + header[c] + "' is used twice");
    }
    for (std::size_t c : priv_cols) {
        if (!seen.insert(c).second) throw ColumnOverlap("column '" + header[c] + "' is used twice");
    }

    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> privileged;
    std::vector<std::string> raw_labels;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             row, static_cast<long>(std::min(fields.size(), header.size())));
        }
        auto numeric_row = [&](const std::vector<std::size_t>& cols) {
            std::vector<double> values;
            for (std::size_t c : cols) {
                double v = 0.0;
                if (!parse_number(fields[c], v)) {
                    throw ParseError("not a number: '" + fields[c] + "'", row, static_cast<long>(c));
                }
                values.push_back(v);
            }
            return values;
        };
        inputs.push_back(numeric_row(input_cols));
        privileged.push_back(numeric_row(priv_cols));
        if (fields[label_col].empty()) {
            throw ParseError("empty label", row, static_cast<long>(label_col));
        }
        raw_labels.push_back(fields[label_col]);
    }

    std::vector<std::string> classes(raw_labels.begin(), raw_labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.size() < 2) {
        throw SingleClass("label column '" + header[label_col] + "' has fewer than two classes");
    }
    if (classes.size() > 2) {
        throw ParseError("label column has " + std::to_string(classes.size()) + " distinct values, expected 2", 0,
                         static_cast<long>(label_col));
    }
    double a = 0.0;
    double b = 0.0;
    if (parse_number(classes[0], a) && parse_number(classes[1], b) && b < a) {
        std::swap(classes[0], classes[1]);
    }

    const auto total = static_cast<Eigen::Index>(raw_labels.size());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(total));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(options.seed, kSplit);
    for (Eigen::Index i = total - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    Eigen::Index n_train = 0;
    Eigen::Index n_test = 0;
    if (options.explicit_split) {
        std::tie(n_train, n_test) = *options.explicit_split;
    } else {
        if (!(options.train_fraction > 0.0 && options.train_fraction <= 1.0)) {
            throw ConfigError("train fraction must lie in (0, 1]");
        }
        n_train = static_cast<Eigen::Index>(std::llround(options.train_fraction * static_cast<double>(total)));
        n_train = std::clamp<Eigen::Index>(n_train, 1, total);
        n_test = total - n_train;
    }
    if (n_train < 1 || n_test < 0 || n_train + n_test > total) {
        throw ConfigError("requested split does not fit the " + std::to_string(total) + " rows");
    }

    auto label_of = [&](Eigen::Index idx) {
        return raw_labels[static_cast<std::size_t>(idx)] == classes[1] ? 1.0 : -1.0;
    };
    std::vector<Eigen::Index> train_rows;
    std::vector<Eigen::Index> test_rows;
    if (options.balance_classes) {
        if (n_train % 2 != 0 || n_test % 2 != 0) {
            throw ConfigError("balanced splits need even split sizes");
        }
        std::vector<Eigen::Index> pos;
        std::vector<Eigen::Index> neg;
        for (Eigen::Index idx : order) (label_of(idx) > 0 ? pos : neg).push_back(idx);
        const auto half_train = static_cast<std::size_t>(n_train / 2);
        const auto half_test = static_cast<std::size_t>(n_test / 2);
        if (pos.size() < half_train + half_test || neg.size() < half_train + half_test) {
            throw ConfigError("not enough examples of each class for a balanced split");
        }
        for (std::size_t k = 0; k < half_train; ++k) {
            train_rows.push_back(pos[k]);
            train_rows.push_back(neg[k]);
        }
        for (std::size_t k = half_train; k < half_train + half_test; ++k) {
            test_rows.push_back(pos[k]);
            test_rows.push_back(neg[k]);
        }
    } else {
        train_rows.assign(order.begin(), order.begin() + n_train);
        test_rows.assign(order.begin() + n_train, order.begin() + n_train + n_test);
    }

    auto gather = [&](const std::vector<Eigen::Index>& rows, Eigen::MatrixXd& x, Eigen::MatrixXd& xp,
                      Eigen::VectorXd& y) {
        const auto m = static_cast<Eigen::Index>(rows.size());
        x.resize(m, static_cast<Eigen::Index>(input_cols.size()));
        xp.resize(m, static_cast<Eigen::Index>(priv_cols.size()));
        y.resize(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto src = static_cast<std::size_t>(rows[static_cast<std::size_t>(i)]);
            for (std::size_t j = 0; j < input_cols.size(); ++j) x(i, static_cast<Eigen::Index>(j)) = inputs[src][j];
            for (std::size_t j = 0; j < priv_cols.size(); ++j) xp(i, static_cast<Eigen::Index>(j)) = privileged[src][j];
            y(i) = label_of(static_cast<Eigen::Index>(src));
        }
    };

    CsvDataset out;
    gather(train_rows, out.data.train_inputs, out.data.train_privileged, out.data.train_labels);
    gather(test_rows, out.data.test_inputs, out.data.test_privileged, out.data.test_labels);
    out.data.generator_name = "csv:" + options.path;
    out.data.seed = options.seed;
    out.negative_label = classes[0];
    out.positive_label = classes[1];
    return out;
}

void write_dataset(const PrivilegedDataset& data, const std::string& directory) {
    std::filesystem::create_directories(directory);
    const std::filesystem::path dir(directory);
    write_split((dir / "train.csv").string(), data.train_inputs, data.train_privileged, data.train_labels);
    write_split((dir / "test.csv").string(), data.test_inputs, data.test_privileged, data.test_labels);
    nlohmann::json meta;
    meta["generator"] = data.generator_name;
    meta["seed"] = data.seed;
    meta["input_dim"] = data.input_dim();
    meta["privileged_dim"] = data.privileged_dim();
    meta["n_train"] = data.train_labels.size();
    meta["n_test"] = data.test_labels.size();
    std::ofstream out((dir / "meta.json").string());
    out << meta.dump(2) << '\n';
}

}  // namespace sltgp
