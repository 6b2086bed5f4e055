#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <utility>

namespace sltgp::numerics {

/// Lower Cholesky factor of a symmetric matrix, possibly after adding jitter to its diagonal.
struct PsdFactor {
    Eigen::MatrixXd lower;
    double log_determinant = 0.0;
    double jitter_used = 0.0;

    [[nodiscard]] Eigen::Index size() const { return lower.rows(); }

    /// Solves (M + jitter I) x = b.
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;

    /// Solves L x = b (forward substitution only).
    [[nodiscard]] Eigen::VectorXd solve_lower(const Eigen::VectorXd& b) const;
    [[nodiscard]] Eigen::MatrixXd solve_lower(const Eigen::MatrixXd& b) const;
};

inline constexpr double kDefaultMaxJitter = 1e-4;

/// Factorizes a symmetric matrix, walking the jitter ladder {0, 1e-10, 1e-8, ...} up to max_jitter.
/// Throws NotPositiveDefinite when every rung fails and InvalidArgument for non-square or
/// visibly asymmetric input.
PsdFactor psd_factorize(const Eigen::MatrixXd& m, double max_jitter = kDefaultMaxJitter);

double norm_pdf(double z);
double norm_cdf(double z);

/// log Phi(z). Below z = -6 the value comes from the continued fraction for the Mills ratio.
double log_norm_cdf(double z);

/// phi(z) / Phi(z), finite for every finite z.
double norm_pdf_cdf_ratio(double z);

/// Inverse of the standard normal CDF (Wichura's AS241, about 1e-16 relative accuracy).
double norm_quantile(double p);

struct Minimum1d {
    double argmin = 0.0;
    double min_value = 0.0;
};

/// Derivative-free bounded minimization on (lower, upper]. A 128-point scan brackets the best
/// cell and golden-section search refines inside it. The lower end itself is never evaluated.
Minimum1d minimize_1d(const std::function<double(double)>& f, double lower, double upper, double tol);

/// Plain golden-section search on [lower, upper]; neither end point is evaluated.
Minimum1d golden_section(const std::function<double(double)>& f, double lower, double upper, double tol);

/// Gauss-Hermite rule for expectations under N(mean, var): sum_k w_k g(mean + sqrt(var) x_k).
/// Every call bumps the process-wide quadrature counter.
double gauss_hermite_expectation(const std::function<double(double)>& g, double mean, double variance,
                                 int order = 32);

/// Number of numerical-quadrature calls made by the library so far.
std::uint64_t quadrature_call_count();
void reset_quadrature_call_count();

}  // namespace sltgp::numerics
