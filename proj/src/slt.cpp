#include "sltgp/slt.hpp"

#include "sltgp/errors.hpp"

#include <cmath>
#include <numbers>

namespace sltgp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s) {
    validate_labels(x, y);
    if (s.size() != y.size()) {
        throw DimensionMismatch("soft labels and hard labels differ in length");
    }
    if (!s.allFinite()) {
        throw InvalidArgument("soft labels must be finite");
    }
}

ep::Problem joint_problem(const JointPrior& prior, const Eigen::VectorXd& y, const Eigen::VectorXd& s) {
    ep::Problem problem;
    problem.prior_cov = prior.joint_cov;
    problem.labels = y;
    problem.fixed_nu = s;
    problem.fixed_tau = Eigen::VectorXd::Ones(s.size());
    // N(s_i | f, 1) = exp(-log(2 pi)/2 - s_i^2/2 + s_i f - f^2/2)
    problem.fixed_log_scale = (-0.5 * kLog2Pi - 0.5 * s.array().square()).matrix();
    return problem;
}

SltModel make_model(JointPrior prior, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                    const KernelSpec& kernel, ep::Result fit) {
    SltModel model;
    model.soft_log_marginal = soft_label_log_marginal(prior.k_x_gram, s);
    model.prior = std::move(prior);
    model.soft_labels = s;
    model.labels = y;
    model.target_sites = std::move(fit.sites);
    model.joint_mean = std::move(fit.mean);
    model.joint_cov_post = std::move(fit.cov);
    model.b_factor = std::move(fit.b_factor);
    model.kernel = kernel;
    model.training_inputs = x;
    model.joint_log_marginal = fit.log_marginal;
    model.converged = fit.converged;
    model.sweeps_used = fit.sweeps_used;
    model.sqrt_tau = std::move(fit.sqrt_tau);
    model.predictive_weights = std::move(fit.predictive_weights);
    return model;
}

}  // namespace

void check_rho(double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
        throw RhoOutOfRange("task similarity rho must lie in [0, 1], got " + std::to_string(rho));
    }
}

JointPrior build_joint_prior(const Eigen::MatrixXd& k_x_gram, double rho) {
    check_rho(rho);
    if (k_x_gram.rows() != k_x_gram.cols()) {
        throw DimensionMismatch("build_joint_prior: K_X must be square");
    }
    const Eigen::Index n = k_x_gram.rows();
    JointPrior prior;
    prior.rho = rho;
    prior.k_x_gram = k_x_gram;
    prior.joint_cov.resize(2 * n, 2 * n);
    prior.joint_cov.topLeftCorner(n, n) = k_x_gram;
    prior.joint_cov.bottomRightCorner(n, n) = k_x_gram;
    prior.joint_cov.topRightCorner(n, n) = rho * k_x_gram;
    prior.joint_cov.bottomLeftCorner(n, n) = rho * k_x_gram;
    return prior;
}

SltModel fit_slt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                 const KernelSpec& kernel, double rho, const EpConfig& config) {
    check_rho(rho);
    check_inputs(x, y, s);
    JointPrior prior = build_joint_prior(kernels::gram(kernel, x), rho);
    ep::Result fit = ep::run(joint_problem(prior, y, s), config);
    return make_model(std::move(prior), x, y, s, kernel, std::move(fit));
}

SltModel slt_from_sites(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                        const KernelSpec& kernel, double rho, const Eigen::VectorXd& nu_tilde,
                        const Eigen::VectorXd& tau_tilde, bool converged, int sweeps_used) {
    check_rho(rho);
    check_inputs(x, y, s);
    JointPrior prior = build_joint_prior(kernels::gram(kernel, x), rho);
    ep::Result fit = ep::from_sites(joint_problem(prior, y, s), nu_tilde, tau_tilde);
    fit.converged = converged;
    fit.sweeps_used = sweeps_used;
    return make_model(std::move(prior), x, y, s, kernel, std::move(fit));
}

LatentPrediction predict_latent_slt(const SltModel& model, const Eigen::MatrixXd& x_new) {
    const Eigen::Index n = model.size();
    const Eigen::MatrixXd k_cross = kernels::cross(model.kernel, model.training_inputs, x_new);
    Eigen::MatrixXd k_hat(2 * n, x_new.rows());
    k_hat.topRows(n) = k_cross;
    k_hat.bottomRows(n) = model.prior.rho * k_cross;

    LatentPrediction out;
    out.mean = k_hat.transpose() * model.predictive_weights;
    const Eigen::MatrixXd v = model.b_factor.solve_lower(Eigen::MatrixXd(model.sqrt_tau.asDiagonal() * k_hat));
    out.variance =
        (kernels::diagonal(model.kernel, x_new) - v.colwise().squaredNorm().transpose()).cwiseMax(0.0);
    return out;
}

std::pair<double, double> predict_latent_slt(const SltModel& model, const Eigen::VectorXd& x_new) {
    const LatentPrediction p = predict_latent_slt(model, Eigen::MatrixXd(x_new.transpose()));
    return {p.mean(0), p.variance(0)};
}

Eigen::VectorXd predict_prob_slt(const SltModel& model, const Eigen::MatrixXd& x_new) {
    const LatentPrediction latent = predict_latent_slt(model, x_new);
    Eigen::VectorXd p(latent.mean.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        p(i) = probit_predictive(latent.mean(i), latent.variance(i));
    }
    return p;
}

double predict_prob_slt(const SltModel& model, const Eigen::VectorXd& x_new) {
    const auto [mu, var] = predict_latent_slt(model, x_new);
    return probit_predictive(mu, var);
}

double soft_label_log_marginal(const Eigen::MatrixXd& k_x_gram, const Eigen::VectorXd& s) {
    if (k_x_gram.rows() != s.size() || k_x_gram.cols() != s.size()) {
        throw DimensionMismatch("soft_label_log_marginal: K_X and s disagree in size");
    }
    Eigen::MatrixXd noisy = k_x_gram;
    noisy.diagonal().array() += 1.0;
    const numerics::PsdFactor factor = numerics::psd_factorize(noisy);
    const Eigen::VectorXd white = factor.solve_lower(s);
    return -0.5 * white.squaredNorm() - 0.5 * factor.log_determinant - 0.5 * static_cast<double>(s.size()) * kLog2Pi;
}

double conditional_log_marginal(const SltModel& model) {
    return model.joint_log_marginal - model.soft_log_marginal;
}

GpcPosterior modified_prior_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                                const KernelSpec& kernel, double rho, const EpConfig& config) {
    check_rho(rho);
    check_inputs(x, y, s);
    const Eigen::Index n = y.size();
    const Eigen::MatrixXd k = kernels::gram(kernel, x);

    SoftLabelConditioning cond;
    cond.rho = rho;
    cond.soft_labels = s;
    Eigen::MatrixXd noisy = k;
    noisy.diagonal().array() += 1.0;
    cond.noisy_gram = numerics::psd_factorize(noisy, config.max_jitter);
    cond.soft_weights = cond.noisy_gram.solve(s);

    // K (K + I)^{-1} K = K - I + (K + I)^{-1}
    const double rho2 = rho * rho;
    const Eigen::MatrixXd noisy_inv = cond.noisy_gram.solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)));
    Eigen::MatrixXd c = (1.0 - rho2) * k - rho2 * noisy_inv;
    c.diagonal().array() += rho2;
    c = 0.5 * (c + c.transpose()).eval();

    ep::Problem problem;
    problem.prior_mean = rho * (s - cond.soft_weights);
    problem.prior_cov = std::move(c);
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
    post.prior_mean = std::move(problem.prior_mean);
    post.sqrt_tau = std::move(fit.sqrt_tau);
    post.predictive_weights = std::move(fit.predictive_weights);
    post.incremental_drift = fit.incremental_drift;
    post.conditioning = std::move(cond);
    return post;
}

}  // namespace sltgp
