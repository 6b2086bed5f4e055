#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sltgp {

/// Inputs, privileged features and +/-1 labels for a train/test split. Rows are examples.
struct PrivilegedDataset {
    Eigen::MatrixXd train_inputs;
    Eigen::MatrixXd train_privileged;
    Eigen::VectorXd train_labels;
    Eigen::MatrixXd test_inputs;
    Eigen::MatrixXd test_privileged;
    Eigen::VectorXd test_labels;
    std::string generator_name;
    std::uint64_t seed = 0;

    [[nodiscard]] Eigen::Index input_dim() const { return train_inputs.cols(); }
    [[nodiscard]] Eigen::Index privileged_dim() const { return train_privileged.cols(); }
};

enum class Generator { CleanSoftLabel, CleanFeature, RelevantFeature, IndependentFeature, LatentGp, NoiseVariance };

std::string_view to_string(Generator g);
Generator generator_from_string(std::string_view name);
const std::vector<Generator>& all_generators();

struct GeneratorOptions {
    Eigen::Index n_train = 200;
    Eigen::Index n_test = 1000;
};

/// Synthetic benchmark datasets with d = 50, d* = 3, c = c* = 2, J = {1, 2, 3}, and
/// k0(x, x') = 10 exp(-|x - x'|^2 / 2). Coefficient vectors are drawn once per call and shared by
/// both splits; GP-based generators draw one joint sample over train and test inputs.
/// Hidden draws behind a generated dataset, train rows first then test rows. Filled only for
/// the generators that have them: clean_soft_label, latent_gp and noise_variance set `latent`;
/// noise_variance also sets `log_noise_variance` (label noise variance is its exponential).
struct GeneratorTrace {
    Eigen::VectorXd latent;
    Eigen::VectorXd log_noise_variance;
};

PrivilegedDataset generate(Generator name, std::uint64_t seed, const GeneratorOptions& options = {},
                           GeneratorTrace* trace = nullptr);
PrivilegedDataset generate(std::string_view name, std::uint64_t seed, const GeneratorOptions& options = {});

/// Privileged feature (1 - r) f* + r g* with f* ~ N(0, 10 K0), g* ~ N(0, 10), y = sign(f* + eps),
/// inputs uniform on [0, 10]^2.
PrivilegedDataset generate_rho_sweep(double r, std::uint64_t seed, Eigen::Index n_train = 200,
                                     Eigen::Index n_test = 1000);

struct CsvOptions {
    std::string path;
    /// Column names from the header, or 0-based indices.
    std::vector<std::string> input_columns;
    std::vector<std::string> privileged_columns;
    std::string label_column;
    double train_fraction = 0.8;
    /// Overrides train_fraction when set: (n_train, n_test).
    std::optional<std::pair<Eigen::Index, Eigen::Index>> explicit_split;
    /// Equal numbers of positive and negative examples in each split.
    bool balance_classes = false;
    std::uint64_t seed = 0;
};

struct CsvDataset {
    PrivilegedDataset data;
    std::string negative_label;  // raw value mapped to -1
    std::string positive_label;  // raw value mapped to +1
};

CsvDataset load_csv(const CsvOptions& options);

/// Writes <dir>/train.csv, <dir>/test.csv (columns input_*, priv_*, label) and <dir>/meta.json.
void write_dataset(const PrivilegedDataset& data, const std::string& directory);

}  // namespace sltgp
