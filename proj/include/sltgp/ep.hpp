#pragma once

#include "sltgp/numerics.hpp"

#include <Eigen/Dense>

#include <vector>

namespace sltgp {

/// Gaussian site factors t_i(f) = exp(log_z_tilde_i + nu_tilde_i f - tau_tilde_i f^2 / 2).
/// log_z_tilde is the scale in natural form, so it stays finite when tau_tilde_i = 0.
struct SiteState {
    Eigen::VectorXd nu_tilde;
    Eigen::VectorXd tau_tilde;
    Eigen::VectorXd log_z_tilde;

    [[nodiscard]] Eigen::Index size() const { return nu_tilde.size(); }
};

struct EpConfig {
    double tol = 1e-6;
    int max_sweeps = 100;
    /// Weight of the freshly moment-matched site; the remainder stays on the previous value.
    double damping = 0.8;
    /// Optional permutation of the probit sites; empty means natural order.
    std::vector<Eigen::Index> update_order;
    double max_jitter = numerics::kDefaultMaxJitter;
};

namespace ep {

/// A Gaussian prior N(prior_mean, prior_cov) over N latent values. Indices [0, labels.size())
/// carry probit likelihoods Phi(y_i f_i); the remaining ones carry fixed Gaussian sites.
struct Problem {
    Eigen::VectorXd prior_mean;  // empty means zero mean
    Eigen::MatrixXd prior_cov;
    Eigen::VectorXd labels;
    Eigen::VectorXd fixed_nu;
    Eigen::VectorXd fixed_tau;
    Eigen::VectorXd fixed_log_scale;

    [[nodiscard]] Eigen::Index size() const { return prior_cov.rows(); }
    [[nodiscard]] Eigen::Index probit_count() const { return labels.size(); }
};

struct Result {
    SiteState sites;  // probit sites only
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    numerics::PsdFactor b_factor;  // B = I + S C S, S = diag(sqrt(tau))
    Eigen::VectorXd sqrt_tau;      // over all N sites
    /// alpha with posterior mean = prior mean + C alpha; predictions use k_hat^T alpha.
    Eigen::VectorXd predictive_weights;
    double log_marginal = 0.0;
    bool converged = false;
    int sweeps_used = 0;
    /// max |Sigma_incremental - Sigma_recomputed| after the last sweep.
    double incremental_drift = 0.0;
};

/// Runs sequential EP from flat probit sites.
Result run(const Problem& problem, const EpConfig& config);

/// Rebuilds the posterior and the marginal likelihood from given probit sites without iterating.
Result from_sites(const Problem& problem, const Eigen::VectorXd& nu_tilde, const Eigen::VectorXd& tau_tilde,
                  double max_jitter = numerics::kDefaultMaxJitter);

struct TiltedMoments {
    double log_z = 0.0;
    double nu_site = 0.0;
    double tau_site = 0.0;
};

/// Probit moment matching against the cavity N(nu/tau, 1/tau); returns the site that reproduces
/// the tilted mean and variance.
TiltedMoments probit_site_update(double label, double cavity_nu, double cavity_tau);

}  // namespace ep
}  // namespace sltgp
