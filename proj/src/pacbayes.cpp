#include "sltgp/pacbayes.hpp"

#include "sltgp/errors.hpp"
#include "sltgp/numerics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sltgp {

namespace {

void check_sigma(double sigma0_sq) {
    if (!(sigma0_sq >= 0.0 && sigma0_sq < 0.5)) {
        throw DomainError("sigma0^2 must lie in [0, 1/2), got " + std::to_string(sigma0_sq));
    }
}

constexpr double kLowerGap = 1e-9;
constexpr double kUpperSpan = 1e6;

}  // namespace

void validate(const BoundInputs& inputs) {
    check_sigma(inputs.sigma0_sq);
    if (!(inputs.delta > 0.0 && inputs.delta <= 1.0)) {
        throw DomainError("delta must lie in (0, 1]");
    }
    if (inputs.n < 1) {
        throw DomainError("n must be at least 1");
    }
}

double c_threshold(double sigma0_sq) {
    check_sigma(sigma0_sq);
    return (10.0 * sigma0_sq - 4.0) / (1.0 - 2.0 * sigma0_sq);
}

double b_integrand(double a, double sigma0_sq) {
    const double u = a + 4.0;
    const double ratio = (a + 5.0) / u;
    return 0.5 * std::log(2.0 * std::numbers::pi * u) - a / (2.0 * u) +
           4.0 * sigma0_sq * sigma0_sq * ratio * ratio;
}

double b_constant(double sigma0_sq) {
    const double c = c_threshold(sigma0_sq);
    auto in_log_gap = [c, sigma0_sq](double t) { return b_integrand(c + std::exp(t), sigma0_sq); };
    const numerics::Minimum1d best =
        numerics::minimize_1d(in_log_gap, std::log(kLowerGap), std::log(kUpperSpan), 1e-10);
    return best.min_value;
}

double risk_bound(const BoundInputs& inputs, double b) {
    validate(inputs);
    return -(std::log(inputs.delta) + inputs.log_conditional_marginal) / static_cast<double>(inputs.n) + b;
}

RhoByBound optimize_rho_by_bound(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                                 const KernelSpec& kernel, double sigma0_sq, double delta, const EpConfig& ep) {
    RhoByBound out;
    out.c = c_threshold(sigma0_sq);
    out.b = b_constant(sigma0_sq);
    BoundInputs inputs{sigma0_sq, delta, static_cast<long>(y.size()), 0.0};
    validate(inputs);

    std::vector<double> log_z_grid;
    auto bound_at = [&](double rho) {
        inputs.log_conditional_marginal = slt_objective(x, y, s, kernel, rho, ep);
        return risk_bound(inputs, out.b);
    };
    auto recording = [&](double rho) {
        const double value = bound_at(rho);
        if (log_z_grid.size() < static_cast<std::size_t>(kRhoGridPoints)) {
            log_z_grid.push_back(inputs.log_conditional_marginal);
        }
        return value;
    };
    out.search = minimize_over_rho(recording);

    std::size_t argmax = 0;
    for (std::size_t k = 1; k < log_z_grid.size(); ++k) {
        if (log_z_grid[k] > log_z_grid[argmax]) {
            argmax = k;
        }
    }
    if (out.search.grid[argmax] != out.search.grid_rho) {
        throw std::logic_error("risk-bound argmin and marginal-likelihood argmax disagree on the rho grid");
    }
    return out;
}

}  // namespace sltgp
