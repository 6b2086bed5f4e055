#pragma once

#include "sltgp/ep.hpp"
#include "sltgp/gpc.hpp"
#include "sltgp/kernels.hpp"
#include "sltgp/numerics.hpp"

#include <Eigen/Dense>

#include <utility>

namespace sltgp {

/// Two-task prior over (f_target, f_source) at the training inputs: [[1, rho], [rho, 1]] (x) K_X,
/// target block first.
struct JointPrior {
    double rho = 0.0;
    Eigen::MatrixXd k_x_gram;
    Eigen::MatrixXd joint_cov;
};

/// Fitted soft-label-transferred GP. Coordinates [0, n) are the target latents, [n, 2n) the
/// source latents; source sites are the exact unit-noise Gaussian likelihoods of s.
struct SltModel {
    JointPrior prior;
    Eigen::VectorXd soft_labels;
    Eigen::VectorXd labels;
    SiteState target_sites;
    Eigen::VectorXd joint_mean;
    Eigen::MatrixXd joint_cov_post;
    numerics::PsdFactor b_factor;
    KernelSpec kernel;
    Eigen::MatrixXd training_inputs;
    double joint_log_marginal = 0.0;
    double soft_log_marginal = 0.0;
    bool converged = false;
    int sweeps_used = 0;

    Eigen::VectorXd sqrt_tau;            // 2n
    Eigen::VectorXd predictive_weights;  // 2n

    [[nodiscard]] Eigen::Index size() const { return labels.size(); }
};

void check_rho(double rho);

JointPrior build_joint_prior(const Eigen::MatrixXd& k_x_gram, double rho);

SltModel fit_slt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                 const KernelSpec& kernel, double rho, const EpConfig& config = {});

/// Rebuilds a model from stored target sites without rerunning EP.
SltModel slt_from_sites(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                        const KernelSpec& kernel, double rho, const Eigen::VectorXd& nu_tilde,
                        const Eigen::VectorXd& tau_tilde, bool converged, int sweeps_used);

LatentPrediction predict_latent_slt(const SltModel& model, const Eigen::MatrixXd& x_new);
std::pair<double, double> predict_latent_slt(const SltModel& model, const Eigen::VectorXd& x_new);

Eigen::VectorXd predict_prob_slt(const SltModel& model, const Eigen::MatrixXd& x_new);
double predict_prob_slt(const SltModel& model, const Eigen::VectorXd& x_new);

/// log N(s | 0, K_X + I).
double soft_label_log_marginal(const Eigen::MatrixXd& k_x_gram, const Eigen::VectorXd& s);

/// log p(y | s, X) = log p(y, s | X) - log p(s | X).
double conditional_log_marginal(const SltModel& model);

/// Probit EP on the target task alone under the prior conditioned on s. Mathematically the
/// target marginal of fit_slt; its log_marginal is the conditional log marginal directly.
GpcPosterior modified_prior_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                                const KernelSpec& kernel, double rho, const EpConfig& config = {});

}  // namespace sltgp
