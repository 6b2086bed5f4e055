#pragma once

#include "sltgp/ep.hpp"
#include "sltgp/kernels.hpp"
#include "sltgp/model_selection.hpp"

#include <Eigen/Dense>

namespace sltgp {

/// Inputs to the risk bound. lambda is fixed to n.
struct BoundInputs {
    double sigma0_sq = 0.1;  // sub-Gaussian variance factor, in [0, 1/2)
    double delta = 0.05;     // confidence, in (0, 1]
    long n = 1;
    double log_conditional_marginal = 0.0;
};

void validate(const BoundInputs& inputs);

/// (10 s - 4) / (1 - 2 s) for s = sigma0^2; the infimum defining b runs over a > this value.
double c_threshold(double sigma0_sq);

/// The summand whose infimum over a > c_threshold(sigma0_sq) is b(sigma0_sq):
///   log(2 pi (a + 4)) / 2 - a / (2 (a + 4)) + 4 sigma0^4 ((a + 5) / (a + 4))^2
double b_integrand(double a, double sigma0_sq);

/// Numerical infimum of b_integrand over (c + 1e-9, c + 1e6], searched in log(a - c).
double b_constant(double sigma0_sq);

/// -(log delta + log Z) / n + b.
double risk_bound(const BoundInputs& inputs, double b);

struct RhoByBound {
    RhoSearch search;  // objective = bound value
    double b = 0.0;
    double c = 0.0;
};

/// Task similarity minimizing the risk bound over the rho grid, with refinement. Throws
/// std::logic_error if the grid argmin ever differs from the argmax of the conditional log marginal.
RhoByBound optimize_rho_by_bound(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                                 const KernelSpec& kernel, double sigma0_sq, double delta, const EpConfig& ep = {});

}  // namespace sltgp
