#include "sltgp/gpc.hpp"

#include "sltgp/errors.hpp"

#include <cfloat>
#include <cmath>

namespace sltgp {

void validate_labels(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (y.size() == 0) {
        throw InvalidArgument("need at least one training point");
    }
    if (x.rows() != y.size()) {
        throw DimensionMismatch("inputs have " + std::to_string(x.rows()) + " rows but there are " +
                                std::to_string(y.size()) + " labels");
    }
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) != 1.0 && y(i) != -1.0) {
            throw InvalidArgument("labels must be +1 or -1");
        }
    }
}

GpcPosterior fit_gpc(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const KernelSpec& kernel,
                     const EpConfig& config) {
    validate_labels(x, y);
    ep::Problem problem;
    problem.prior_cov = kernels::gram(kernel, x);
    problem.labels = y;
    problem.fixed_nu.resize(0);
    problem.fixed_tau.resize(0);
    problem.fixed_log_scale.resize(0);

    ep::Result fit = ep::run(problem, config);

    GpcPosterior post;
    post.sites = std::move(fit.sites);
    post.mean = std::move(fit.mean);
    post.cov = std::move(fit.cov);
    post.b_factor = std::move(fit.b_factor);
    post.kernel = kernel;
    post.training_inputs = x;
    post.labels = y;
    post.log_marginal = fit.log_marginal;
    post.converged = fit.converged;
    post.sweeps_used = fit.sweeps_used;
    post.prior_mean = Eigen::VectorXd::Zero(y.size());
    post.sqrt_tau = std::move(fit.sqrt_tau);
    post.predictive_weights = std::move(fit.predictive_weights);
    post.incremental_drift = fit.incremental_drift;
    return post;
}

LatentPrediction predict_latent(const GpcPosterior& post, const Eigen::MatrixXd& x_new) {
    const Eigen::MatrixXd k_cross = kernels::cross(post.kernel, post.training_inputs, x_new);
    Eigen::VectorXd prior_var = kernels::diagonal(post.kernel, x_new);

    LatentPrediction out;
    Eigen::MatrixXd c_cross;
    if (post.conditioning) {
        const SoftLabelConditioning& cond = *post.conditioning;
        const double rho2 = cond.rho * cond.rho;
        // K (K + I)^{-1} k_hat = k_hat - (K + I)^{-1} k_hat
        const Eigen::MatrixXd w = cond.noisy_gram.solve(k_cross);
        c_cross = (1.0 - rho2) * k_cross + rho2 * w;
        prior_var -= rho2 * k_cross.cwiseProduct(w).colwise().sum().transpose();
        out.mean = cond.rho * (k_cross.transpose() * cond.soft_weights);
    } else {
        c_cross = k_cross;
        out.mean = Eigen::VectorXd::Zero(x_new.rows());
    }
    out.mean.noalias() += c_cross.transpose() * post.predictive_weights;

    const Eigen::MatrixXd v = post.b_factor.solve_lower(Eigen::MatrixXd(post.sqrt_tau.asDiagonal() * c_cross));
    out.variance = (prior_var - v.colwise().squaredNorm().transpose()).cwiseMax(0.0);
    return out;
}

std::pair<double, double> predict_latent(const GpcPosterior& post, const Eigen::VectorXd& x_new) {
    const LatentPrediction p = predict_latent(post, Eigen::MatrixXd(x_new.transpose()));
    return {p.mean(0), p.variance(0)};
}

double probit_predictive(double mu_hat, double sigma2_hat) {
    const double p = numerics::norm_cdf(mu_hat / std::sqrt(1.0 + std::max(sigma2_hat, 0.0)));
    return std::clamp(p, DBL_TRUE_MIN, 1.0 - DBL_EPSILON / 2.0);
}

Eigen::VectorXd predict_prob(const GpcPosterior& post, const Eigen::MatrixXd& x_new) {
    const LatentPrediction latent = predict_latent(post, x_new);
    Eigen::VectorXd p(latent.mean.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        p(i) = probit_predictive(latent.mean(i), latent.variance(i));
    }
    return p;
}

double predict_prob(const GpcPosterior& post, const Eigen::VectorXd& x_new) {
    const auto [mu, var] = predict_latent(post, x_new);
    return probit_predictive(mu, var);
}

double log_marginal_gpc(const GpcPosterior& post) {
    return post.log_marginal;
}

double accuracy(const Eigen::VectorXd& probabilities, const Eigen::VectorXd& labels) {
    if (probabilities.size() != labels.size()) {
        throw DimensionMismatch("accuracy: prediction and label counts differ");
    }
    if (labels.size() == 0) {
        return 0.0;
    }
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        const double predicted = probabilities(i) >= 0.5 ? 1.0 : -1.0;
        correct += predicted == labels(i) ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

SoftLabels extract_soft_labels(const Eigen::MatrixXd& x_privileged, const Eigen::VectorXd& y,
                               const KernelSpec& kernel_privileged, const EpConfig& config) {
    const GpcPosterior post = fit_gpc(x_privileged, y, kernel_privileged, config);
    return SoftLabels{post.mean, kernel_privileged, post.log_marginal, post.converged};
}

}  // namespace sltgp
