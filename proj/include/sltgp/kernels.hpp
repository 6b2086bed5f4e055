#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace sltgp {

enum class KernelFamily { Rbf, Linear };

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

/// Covariance function with all positive hyperparameters held in log space.
///   Rbf:    amplitude * exp(-|x - x'|^2 / (2 l^2)),  l^2 = exp(2 log_length_scale)
///   Linear: sigma^2 * x^T x',                         sigma^2 = exp(log_signal_variance)
struct KernelSpec {
    KernelFamily family = KernelFamily::Rbf;
    double log_length_scale = 0.0;
    double log_amplitude = 0.0;
    double log_signal_variance = 0.0;

    static KernelSpec rbf(double length_scale = 1.0, double amplitude = 1.0);
    static KernelSpec linear(double signal_variance = 1.0);

    [[nodiscard]] double length_scale() const;
    [[nodiscard]] double amplitude() const;
    [[nodiscard]] double signal_variance() const;

    bool operator==(const KernelSpec&) const = default;
};

std::string describe(const KernelSpec& spec);

namespace kernels {

/// Rows of X and Z are points.
double eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
            const Eigen::Ref<const Eigen::VectorXd>& x_prime);

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& x);

/// |X| x |Z| block of covariances; an empty Z yields a 0-column matrix.
Eigen::MatrixXd cross(const KernelSpec& spec, const Eigen::MatrixXd& x, const Eigen::MatrixXd& z);

/// k(z_j, z_j) for every row of Z.
Eigen::VectorXd diagonal(const KernelSpec& spec, const Eigen::MatrixXd& z);

}  // namespace kernels
}  // namespace sltgp
