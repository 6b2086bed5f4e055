#pragma once

// Brute-force reference computations shared by the unit and acceptance tests. Nothing here
// calls into the library's normal-distribution or EP code.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double log_phi_cdf(double z) {
    return std::log(0.5 * std::erfc(-z / std::sqrt(2.0)));
}

struct ProbitPosterior {
    double log_z = 0.0;     // log of integral N(f | m, C) prod_i Phi(y_i f_i)
    Eigen::VectorXd mean;  // posterior mean of f
};

/// Tensor-product midpoint rule in whitened coordinates f = m + L z, z ~ N(0, I), with
/// `points` nodes per axis on z in [-7, 7], for n <= 3. Whitening keeps strongly correlated
/// priors (nearly coincident inputs) as accurate as independent ones.
inline ProbitPosterior probit_quadrature(const Eigen::VectorXd& m, const Eigen::MatrixXd& c, const Eigen::VectorXd& y,
                                         int points = 200) {
    const int n = static_cast<int>(m.size());
    const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(c).matrixL();
    const double h = 14.0 / points;
    std::vector<double> nodes(static_cast<std::size_t>(points));
    std::vector<double> weights(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) {
        const double z = -7.0 + (k + 0.5) * h;
        nodes[static_cast<std::size_t>(k)] = z;
        weights[static_cast<std::size_t>(k)] = h * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    }
    double total = 0.0;
    Eigen::VectorXd first = Eigen::VectorXd::Zero(n);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    Eigen::VectorXd z(n);
    while (true) {
        double w = 1.0;
        for (int i = 0; i < n; ++i) {
            z(i) = nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
            w *= weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        }
        const Eigen::VectorXd f = m + l * z;
        double ll = 0.0;
        for (int i = 0; i < n; ++i) ll += log_phi_cdf(y(i) * f(i));
        const double mass = w * std::exp(ll);
        total += mass;
        first += mass * f;
        int axis = n - 1;
        while (axis >= 0 && ++idx[static_cast<std::size_t>(axis)] == points) {
            idx[static_cast<std::size_t>(axis)] = 0;
            --axis;
        }
        if (axis < 0) break;
    }
    ProbitPosterior out;
    out.log_z = std::log(total);
    out.mean = first / total;
    return out;
}

struct GaussianConditional {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    Eigen::MatrixXd gain;  // mean = mu_a + gain (b - mu_b)
};

/// Distribution of the first `na` coordinates of a zero-mean Gaussian given the rest equal b.
inline GaussianConditional condition(const Eigen::MatrixXd& joint, Eigen::Index na, const Eigen::VectorXd& b) {
    const Eigen::Index nb = joint.rows() - na;
    const Eigen::MatrixXd saa = joint.topLeftCorner(na, na);
    const Eigen::MatrixXd sab = joint.topRightCorner(na, nb);
    const Eigen::MatrixXd sbb = joint.bottomRightCorner(nb, nb);
    GaussianConditional out;
    out.gain = sbb.ldlt().solve(sab.transpose()).transpose();
    out.mean = out.gain * b;
    out.cov = saa - out.gain * sab.transpose();
    return out;
}

/// log N(x | 0, S) by direct evaluation.
inline double log_gaussian(const Eigen::VectorXd& x, const Eigen::MatrixXd& s) {
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
    const double logdet = ldlt.vectorD().array().log().sum();
    return -0.5 * x.size() * std::log(2.0 * M_PI) - 0.5 * logdet - 0.5 * x.dot(ldlt.solve(x));
}

/// Quantities of the two-task model for small n computed by exact conditioning plus quadrature.
struct SltReference {
    Eigen::VectorXd target_mean;  // E[f_T | y, s]
    double log_conditional = 0.0;  // log p(y | s)
    double log_soft = 0.0;         // log p(s)
};

/// k is the n x n input Gram matrix; soft labels carry unit Gaussian noise on the source task.
inline SltReference slt_reference(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                                  double rho, int points = 400) {
    const Eigen::Index n = k.rows();
    // Joint of (f_T, s): [[K, rho K], [rho K, K + I]].
    Eigen::MatrixXd joint(2 * n, 2 * n);
    joint << k, rho * k, rho * k, k + Eigen::MatrixXd::Identity(n, n);
    const GaussianConditional cond = condition(joint, n, s);
    const ProbitPosterior q = probit_quadrature(cond.mean, cond.cov, y, points);
    SltReference out;
    out.target_mean = q.mean;
    out.log_conditional = q.log_z;
    out.log_soft = log_gaussian(s, k + Eigen::MatrixXd::Identity(n, n));
    return out;
}

/// E[f(x_new) | y, s]: f(x_new) given (f_T, s) is affine, so its mean follows from E[f_T | y, s].
/// `k_all` is the (n+1) x (n+1) Gram over training points then the new point.
inline double slt_predictive_mean(const Eigen::MatrixXd& k_all, const Eigen::VectorXd& s,
                                  const Eigen::VectorXd& target_mean, double rho) {
    const Eigen::Index n = k_all.rows() - 1;
    const Eigen::MatrixXd k = k_all.topLeftCorner(n, n);
    const Eigen::VectorXd kx = k_all.col(n).head(n);
    // Joint of (f_new, f_T, s).
    Eigen::MatrixXd joint(1 + 2 * n, 1 + 2 * n);
    joint(0, 0) = k_all(n, n);
    joint.block(0, 1, 1, n) = kx.transpose();
    joint.block(0, 1 + n, 1, n) = rho * kx.transpose();
    joint.block(1, 0, n, 1) = kx;
    joint.block(1 + n, 0, n, 1) = rho * kx;
    joint.block(1, 1, n, n) = k;
    joint.block(1, 1 + n, n, n) = rho * k;
    joint.block(1 + n, 1, n, n) = rho * k;
    joint.block(1 + n, 1 + n, n, n) = k + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b(2 * n);
    b << target_mean, s;
    return condition(joint, 1, b).mean(0);
}

/// Brute-force minimum over a uniform grid of `points` nodes on [lo, hi].
inline double grid_min(const std::function<double(double)>& f, double lo, double hi, int points) {
    double best = f(lo);
    for (int k = 1; k < points; ++k) {
        best = std::min(best, f(lo + (hi - lo) * k / (points - 1)));
    }
    return best;
}

/// Integrand of the risk-bound constant, written out term by term.
inline double b_integrand(double a, double s2) {
    const double r = (a + 5.0) / (a + 4.0);
    return 0.5 * std::log(2.0 * M_PI * (a + 4.0)) - a / (2.0 * (a + 4.0)) + 4.0 * s2 * s2 * r * r;
}

/// Minimum of b_integrand over 1e5 uniform points on (c, c + 60], where every minimizer lies
/// for sigma0^2 < 1/2.
inline double grid_b(double s2) {
    const double c = (10.0 * s2 - 4.0) / (1.0 - 2.0 * s2);
    return grid_min([&](double a) { return b_integrand(a, s2); }, c + 1e-9, c + 60.0, 100000);
}

}  // namespace oracle
