#pragma once

#include "sltgp/ep.hpp"
#include "sltgp/kernels.hpp"
#include "sltgp/numerics.hpp"

#include <Eigen/Dense>

#include <optional>
#include <utility>

namespace sltgp {

/// Prior of the target latent function after conditioning on soft labels s observed with unit
/// noise through a task correlated by rho:
///   mean(x)   = rho k(x)^T (K + I)^{-1} s
///   cov(x,x') = k(x,x') - rho^2 k(x)^T (K + I)^{-1} k(x')
struct SoftLabelConditioning {
    double rho = 0.0;
    Eigen::VectorXd soft_labels;
    Eigen::VectorXd soft_weights;    // (K + I)^{-1} s
    numerics::PsdFactor noisy_gram;  // K + I
};

/// Single-task probit EP posterior at the training inputs, plus what prediction needs.
struct GpcPosterior {
    SiteState sites;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    numerics::PsdFactor b_factor;
    KernelSpec kernel;
    Eigen::MatrixXd training_inputs;
    Eigen::VectorXd labels;
    double log_marginal = 0.0;
    bool converged = false;
    int sweeps_used = 0;

    Eigen::VectorXd prior_mean;
    Eigen::VectorXd sqrt_tau;
    Eigen::VectorXd predictive_weights;
    double incremental_drift = 0.0;
    /// Present for posteriors built by modified_prior_fit.
    std::optional<SoftLabelConditioning> conditioning;
};

struct LatentPrediction {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

/// Checks that labels are +1/-1 and that the sizes agree; throws InvalidArgument otherwise.
void validate_labels(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

GpcPosterior fit_gpc(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const KernelSpec& kernel,
                     const EpConfig& config = {});

LatentPrediction predict_latent(const GpcPosterior& post, const Eigen::MatrixXd& x_new);
std::pair<double, double> predict_latent(const GpcPosterior& post, const Eigen::VectorXd& x_new);

/// Phi(mu / sqrt(1 + sigma^2)), kept strictly inside (0, 1).
double probit_predictive(double mu_hat, double sigma2_hat);

Eigen::VectorXd predict_prob(const GpcPosterior& post, const Eigen::MatrixXd& x_new);
double predict_prob(const GpcPosterior& post, const Eigen::VectorXd& x_new);

double log_marginal_gpc(const GpcPosterior& post);

/// Fraction of rows where the predicted class (p >= 0.5 -> +1) equals the label.
double accuracy(const Eigen::VectorXd& probabilities, const Eigen::VectorXd& labels);

struct SoftLabels {
    Eigen::VectorXd values;
    KernelSpec kernel;
    double log_marginal = 0.0;
    bool converged = false;
};

/// Posterior latent means of a GPC fitted on the privileged features.
SoftLabels extract_soft_labels(const Eigen::MatrixXd& x_privileged, const Eigen::VectorXd& y,
                               const KernelSpec& kernel_privileged, const EpConfig& config = {});

}  // namespace sltgp
