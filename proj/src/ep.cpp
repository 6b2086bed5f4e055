#include "sltgp/ep.hpp"

#include "sltgp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sltgp::ep {

namespace {

struct Posterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    numerics::PsdFactor b_factor;
    Eigen::VectorXd sqrt_tau;
    Eigen::VectorXd alpha;
};

Eigen::VectorXd prior_mean_of(const Problem& problem) {
    if (problem.prior_mean.size() == 0) {
        return Eigen::VectorXd::Zero(problem.size());
    }
    return problem.prior_mean;
}

void validate(const Problem& problem) {
    const Eigen::Index n_total = problem.size();
    if (problem.prior_cov.cols() != n_total || n_total == 0) {
        throw DimensionMismatch("ep: prior covariance must be square and nonempty");
    }
    if (problem.prior_mean.size() != 0 && problem.prior_mean.size() != n_total) {
        throw DimensionMismatch("ep: prior mean length does not match covariance");
    }
    const Eigen::Index n_fixed = n_total - problem.probit_count();
    if (n_fixed < 0 || problem.fixed_nu.size() != n_fixed || problem.fixed_tau.size() != n_fixed ||
        problem.fixed_log_scale.size() != n_fixed) {
        throw DimensionMismatch("ep: fixed site vectors must cover the non-probit coordinates");
    }
    for (Eigen::Index i = 0; i < problem.probit_count(); ++i) {
        if (problem.labels(i) != 1.0 && problem.labels(i) != -1.0) {
            throw InvalidArgument("ep: labels must be +1 or -1");
        }
    }
    if ((problem.fixed_tau.array() < 0.0).any()) {
        throw InvalidArgument("ep: fixed site precisions must be non-negative");
    }
}

// Sigma = C - C S B^{-1} S C and mu = m + Sigma (nu - T m), computed from scratch.
Posterior recompute(const Problem& problem, const Eigen::VectorXd& m, const Eigen::VectorXd& nu,
                    const Eigen::VectorXd& tau, double max_jitter) {
    const Eigen::MatrixXd& c = problem.prior_cov;
    const Eigen::Index n_total = c.rows();
    Posterior post;
    post.sqrt_tau = tau.cwiseMax(0.0).cwiseSqrt();
    const auto s = post.sqrt_tau.asDiagonal();

    Eigen::MatrixXd sc = s * c;
    Eigen::MatrixXd b = sc * s;
    b.diagonal().array() += 1.0;
    post.b_factor = numerics::psd_factorize(b, max_jitter);

    const Eigen::MatrixXd v = post.b_factor.solve_lower(sc);
    post.cov = c;
    post.cov.selfadjointView<Eigen::Lower>().rankUpdate(v.transpose(), -1.0);
    post.cov.triangularView<Eigen::StrictlyUpper>() = post.cov.transpose();

    const Eigen::VectorXd p = nu - tau.cwiseProduct(m);
    const Eigen::VectorXd cp = c * p;
    post.alpha = p - post.sqrt_tau.cwiseProduct(post.b_factor.solve(Eigen::VectorXd(post.sqrt_tau.cwiseProduct(cp))));
    post.mean = m + c * post.alpha;
    (void)n_total;
    return post;
}

// Log normalizer of N(f | nu_c/tau_c, 1/tau_c) exp(nu f - tau f^2 / 2).
double log_gaussian_overlap(double cavity_nu, double cavity_tau, double nu, double tau) {
    const double total_tau = cavity_tau + tau;
    const double total_nu = cavity_nu + nu;
    return 0.5 * std::log(cavity_tau / total_tau) + 0.5 * total_nu * total_nu / total_tau -
           0.5 * cavity_nu * cavity_nu / cavity_tau;
}

Result assemble(const Problem& problem, const Eigen::VectorXd& m, const Eigen::VectorXd& nu,
                const Eigen::VectorXd& tau, Posterior post) {
    const Eigen::Index n = problem.probit_count();
    Result result;
    result.sites.nu_tilde = nu.head(n);
    result.sites.tau_tilde = tau.head(n);
    result.sites.log_z_tilde.resize(n);

    constexpr double kMinCavityTau = 1e-12;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sii = post.cov(i, i);
        const double cavity_tau = std::max(1.0 / sii - tau(i), kMinCavityTau);
        const double cavity_nu = post.mean(i) / sii - nu(i);
        const TiltedMoments tilted = probit_site_update(problem.labels(i), cavity_nu, cavity_tau);
        result.sites.log_z_tilde(i) = tilted.log_z - log_gaussian_overlap(cavity_nu, cavity_tau, nu(i), tau(i));
    }

    // log Z = sum c_i - log|B| / 2 + p^T Sigma p / 2 + nu^T m - m^T T m / 2
    const Eigen::VectorXd p = nu - tau.cwiseProduct(m);
    double log_z = result.sites.log_z_tilde.sum() + problem.fixed_log_scale.sum();
    log_z -= 0.5 * post.b_factor.log_determinant;
    log_z += 0.5 * p.dot(post.mean - m);
    log_z += nu.dot(m) - 0.5 * m.dot(tau.cwiseProduct(m));

    result.mean = std::move(post.mean);
    result.cov = std::move(post.cov);
    result.b_factor = std::move(post.b_factor);
    result.sqrt_tau = std::move(post.sqrt_tau);
    result.predictive_weights = std::move(post.alpha);
    result.log_marginal = log_z;
    return result;
}

std::vector<Eigen::Index> site_order(const Problem& problem, const EpConfig& config) {
    const Eigen::Index n = problem.probit_count();
    if (config.update_order.empty()) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        return order;
    }
    std::vector<Eigen::Index> sorted = config.update_order;
    std::sort(sorted.begin(), sorted.end());
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(sorted.size()); ++i) {
        if (sorted[static_cast<std::size_t>(i)] != i || static_cast<Eigen::Index>(sorted.size()) != n) {
            throw InvalidArgument("ep: update_order must be a permutation of the probit sites");
        }
    }
    return config.update_order;
}

}  // namespace

TiltedMoments probit_site_update(double label, double cavity_nu, double cavity_tau) {
    const double var = 1.0 / cavity_tau;
    const double mu = cavity_nu / cavity_tau;
    const double denom = std::sqrt(1.0 + var);
    const double z = label * mu / denom;
    const double ratio = numerics::norm_pdf_cdf_ratio(z);
    // Variance shrink factor r (z + r) lies in (0, 1) for the probit likelihood.
    const double shrink = std::clamp(ratio * (z + ratio), 0.0, 1.0 - 1e-15);
    const double a = label * ratio / denom;
    const double b = shrink / (1.0 + var);
    const double keep = (1.0 + var * (1.0 - shrink)) / (1.0 + var);  // 1 - var * b
    TiltedMoments out;
    out.log_z = numerics::log_norm_cdf(z);
    out.tau_site = b / keep;
    out.nu_site = (a + mu * b) / keep;
    return out;
}

Result run(const Problem& problem, const EpConfig& config) {
    validate(problem);
    if (!(config.damping > 0.0 && config.damping <= 1.0)) {
        throw InvalidArgument("ep: damping must lie in (0, 1]");
    }
    const Eigen::Index n_total = problem.size();
    const Eigen::Index n = problem.probit_count();
    const Eigen::VectorXd m = prior_mean_of(problem);

    Eigen::VectorXd nu = Eigen::VectorXd::Zero(n_total);
    Eigen::VectorXd tau = Eigen::VectorXd::Zero(n_total);
    nu.tail(n_total - n) = problem.fixed_nu;
    tau.tail(n_total - n) = problem.fixed_tau;

    Posterior post = recompute(problem, m, nu, tau, config.max_jitter);
    const std::vector<Eigen::Index> order = site_order(problem, config);
    const double eta = config.damping;

    bool converged = false;
    int sweeps = 0;
    double drift = 0.0;
    Eigen::VectorXd column(n_total);
    while (sweeps < config.max_sweeps) {
        ++sweeps;
        double max_delta = 0.0;
        for (const Eigen::Index i : order) {
            const double sii = post.cov(i, i);
            const double cavity_tau = 1.0 / sii - tau(i);
            if (!(cavity_tau > 0.0) || !std::isfinite(cavity_tau)) {
                continue;
            }
            const double cavity_nu = post.mean(i) / sii - nu(i);
            const TiltedMoments matched = probit_site_update(problem.labels(i), cavity_nu, cavity_tau);

            double tau_new = eta * matched.tau_site + (1.0 - eta) * tau(i);
            double nu_new = eta * matched.nu_site + (1.0 - eta) * nu(i);
            if (tau_new < 0.0) {
                tau_new = 0.0;
                nu_new = 0.0;
            }
            const double d_tau = tau_new - tau(i);
            const double d_nu = nu_new - nu(i);
            max_delta = std::max({max_delta, std::abs(d_tau), std::abs(d_nu)});
            tau(i) = tau_new;
            nu(i) = nu_new;

            column = post.cov.col(i);
            const double kappa = d_tau / (1.0 + d_tau * sii);
            const double mean_shift = -kappa * (post.mean(i) - m(i)) + (d_nu - d_tau * m(i)) * (1.0 - kappa * sii);
            post.mean.noalias() += mean_shift * column;
            post.cov.noalias() -= kappa * column * column.transpose();
        }
        const Eigen::MatrixXd incremental = std::move(post.cov);
        post = recompute(problem, m, nu, tau, config.max_jitter);
        drift = (incremental - post.cov).cwiseAbs().maxCoeff();
        if (max_delta < config.tol) {
            converged = true;
            break;
        }
    }

    Result result = assemble(problem, m, nu, tau, std::move(post));
    result.converged = converged;
    result.sweeps_used = sweeps;
    result.incremental_drift = drift;
    return result;
}

Result from_sites(const Problem& problem, const Eigen::VectorXd& nu_tilde, const Eigen::VectorXd& tau_tilde,
                  double max_jitter) {
    validate(problem);
    const Eigen::Index n_total = problem.size();
    const Eigen::Index n = problem.probit_count();
    if (nu_tilde.size() != n || tau_tilde.size() != n) {
        throw DimensionMismatch("ep: site vectors must match the number of probit sites");
    }
    const Eigen::VectorXd m = prior_mean_of(problem);
    Eigen::VectorXd nu(n_total);
    Eigen::VectorXd tau(n_total);
    nu << nu_tilde, problem.fixed_nu;
    tau << tau_tilde, problem.fixed_tau;
    return assemble(problem, m, nu, tau, recompute(problem, m, nu, tau, max_jitter));
}

}  // namespace sltgp::ep
