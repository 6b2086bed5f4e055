#pragma once

#include "sltgp/ep.hpp"
#include "sltgp/gpc.hpp"
#include "sltgp/kernels.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace sltgp {

/// Bounded derivative-free search settings. All bounds live in the transformed (log / logit) space.
struct SearchConfig {
    int restarts = 5;
    int max_evals = 200;
    std::uint64_t seed = 0;

    /// RBF: log length scale searched in heuristic +/- this many log units, where the heuristic
    /// is the log of the median pairwise distance.
    double length_scale_halfwidth = 3.0;
    std::pair<double, double> log_amplitude_bounds{-3.0, 3.0};
    /// Linear: log sigma^2 searched in -log(mean |x|^2) + [first, second].
    std::pair<double, double> linear_log_variance_offsets{-4.0, 6.0};
    bool optimize_length_scale = true;
    bool optimize_amplitude = true;

    double rho_min = 1e-4;
    double rho_max = 1.0 - 1e-4;

    /// Nelder-Mead stops when the simplex spread drops below both tolerances.
    double f_tol = 1e-5;
    double x_tol = 1e-3;

    EpConfig ep;
};

struct GpcSelection {
    KernelSpec kernel;
    double log_marginal = 0.0;
    int evaluations = 0;
};

struct SltSelection {
    KernelSpec kernel;
    double rho = 0.0;
    double conditional_log_marginal = 0.0;
    int evaluations = 0;
};

struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

struct BoxOptimum {
    Eigen::VectorXd argmax;
    double value = 0.0;
    int evaluations = 0;
};

/// Maximizes f over a box with restarted, projected Nelder-Mead. The first restart starts at
/// the box center, later ones at seeded uniform points. Non-finite values count as -infinity.
BoxOptimum maximize_in_box(const std::function<double(const Eigen::VectorXd&)>& f, const Box& box,
                           const SearchConfig& config);

/// Log of the median pairwise Euclidean distance between rows (0 for fewer than two rows).
double log_median_distance(const Eigen::MatrixXd& x);

/// Search box for the free kernel hyperparameters of `kernel_template` on inputs x.
Box kernel_box(const KernelSpec& kernel_template, const Eigen::MatrixXd& x, const SearchConfig& config);

/// Writes the free hyperparameters in `params` (ordered as in kernel_box) into a copy of the template.
KernelSpec apply_kernel_params(const KernelSpec& kernel_template, const Eigen::VectorXd& params,
                               const SearchConfig& config);

GpcSelection optimize_gpc(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const KernelSpec& kernel_template,
                          const SearchConfig& config = {});

/// Conditional log marginal log p(y | s, X) evaluated through the n x n conditioned-prior EP.
double slt_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                     const KernelSpec& kernel, double rho, const EpConfig& ep = {});

double rho_from_logit(double t);
double logit_from_rho(double rho);

SltSelection optimize_slt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                          const KernelSpec& kernel_template, const SearchConfig& config = {});

/// Result of a 1-D search over rho on a uniform grid followed by golden-section refinement.
struct RhoSearch {
    double rho = 0.0;
    double objective = 0.0;  // minimized quantity at rho
    double grid_rho = 0.0;
    std::vector<double> grid;
    std::vector<double> grid_values;
};

inline constexpr int kRhoGridPoints = 33;

/// Minimizes `objective` over rho in [0, 1]: grid of `grid_points` values, then golden-section
/// inside the neighbouring cells of the best grid point.
RhoSearch minimize_over_rho(const std::function<double(double)>& objective, int grid_points = kRhoGridPoints,
                            double tol = 1e-3);

/// Gibbs risk E_{f ~ Q} mean_j[-log Phi(y_j f(x_j))] of the posterior over a labelled test set.
double expected_nll_risk(const GpcPosterior& post, const Eigen::MatrixXd& x_test, const Eigen::VectorXd& y_test);

/// Task similarity minimizing the test-set Gibbs risk (experiment harness only).
RhoSearch optimize_rho_by_risk(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                               const KernelSpec& kernel, const Eigen::MatrixXd& x_test,
                               const Eigen::VectorXd& y_test, const EpConfig& ep = {});

}  // namespace sltgp
