#include "sltgp/numerics.hpp"

#include "sltgp/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cfloat>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

namespace sltgp::numerics {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kMillsSwitch = -6.0;

std::atomic<std::uint64_t> g_quadrature_calls{0};

// Phi(-x) / phi(x) for x >= 6 by backward evaluation of Laplace's continued fraction.
double mills_ratio(double x) {
    double t = x;
    for (int k = 100; k >= 1; --k) {
        t = x + k / t;
    }
    return 1.0 / t;
}

struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
GaussHermiteRule make_rule(int order) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    GaussHermiteRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int k = 0; k < order; ++k) {
        rule.nodes[k] = solver.eigenvalues()(k);
        const double v = solver.eigenvectors()(0, k);
        rule.weights[k] = v * v;
    }
    return rule;
}

const GaussHermiteRule& rule_for(int order) {
    static std::mutex mutex;
    static std::map<int, GaussHermiteRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) {
        it = cache.emplace(order, make_rule(order)).first;
    }
    return it->second;
}

}  // namespace

Eigen::VectorXd PsdFactor::solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = lower.triangularView<Eigen::Lower>().solve(b);
    lower.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
}

Eigen::MatrixXd PsdFactor::solve(const Eigen::MatrixXd& b) const {
    Eigen::MatrixXd x = lower.triangularView<Eigen::Lower>().solve(b);
    lower.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
}

Eigen::VectorXd PsdFactor::solve_lower(const Eigen::VectorXd& b) const {
    return lower.triangularView<Eigen::Lower>().solve(b);
}

Eigen::MatrixXd PsdFactor::solve_lower(const Eigen::MatrixXd& b) const {
    return lower.triangularView<Eigen::Lower>().solve(b);
}

PsdFactor psd_factorize(const Eigen::MatrixXd& m, double max_jitter) {
    if (m.rows() != m.cols()) {
        throw InvalidArgument("psd_factorize: matrix is not square");
    }
    const Eigen::Index n = m.rows();
    if (!m.allFinite()) {
        throw NotPositiveDefinite("psd_factorize: matrix has non-finite entries");
    }
    const double scale = std::max(m.cwiseAbs().maxCoeff(), DBL_MIN);
    const double asymmetry = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asymmetry > 1e-10 * scale) {
        throw InvalidArgument("psd_factorize: matrix is not symmetric");
    }
    Eigen::MatrixXd sym = 0.5 * (m + m.transpose());

    std::vector<double> ladder{0.0};
    for (double j = 1e-10; j <= max_jitter * (1.0 + 1e-12); j *= 100.0) {
        ladder.push_back(j);
    }
    for (double jitter : ladder) {
        Eigen::MatrixXd shifted = sym;
        shifted.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() != Eigen::Success) {
            continue;
        }
        PsdFactor factor;
        factor.lower = llt.matrixL();
        const auto diag = factor.lower.diagonal().array();
        if (!(diag > 0.0).all() || !diag.isFinite().all()) {
            continue;
        }
        factor.log_determinant = 2.0 * diag.log().sum();
        factor.jitter_used = jitter;
        return factor;
    }
    throw NotPositiveDefinite("psd_factorize: factorization failed for every jitter up to " +
                              std::to_string(max_jitter) + " (n=" + std::to_string(n) + ")");
}

double norm_pdf(double z) {
    return std::exp(-0.5 * z * z - kLogSqrt2Pi);
}

double norm_cdf(double z) {
    const double p = 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0);
    return std::clamp(p, DBL_TRUE_MIN, 1.0 - DBL_EPSILON / 2.0);
}

double log_norm_cdf(double z) {
    if (z < kMillsSwitch) {
        return -0.5 * z * z - kLogSqrt2Pi + std::log(mills_ratio(-z));
    }
    return std::log(0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0));
}

double norm_pdf_cdf_ratio(double z) {
    if (z < kMillsSwitch) {
        return 1.0 / mills_ratio(-z);
    }
    return norm_pdf(z) / (0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0));
}

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -HUGE_VAL;
        if (p == 1.0) return HUGE_VAL;
        throw InvalidArgument("norm_quantile: probability outside [0, 1]");
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r +
                    45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) * r +
                    21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                     1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
                  4.6303378461565452959) * r + 1.42343711074968357734) /
                (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                     0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
                  2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                     0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
                  5.4637849111641143699) * r + 6.6579046435011037772) /
                (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                     7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                  0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -value : value;
}

Minimum1d minimize_1d(const std::function<double(double)>& f, double lower, double upper, double tol) {
    if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper)) {
        throw InvalidBracket("minimize_1d: requires finite lower < upper");
    }
    if (!(tol > 0.0)) {
        throw InvalidArgument("minimize_1d: tolerance must be positive");
    }
    auto eval = [&f](double x) {
        const double v = f(x);
        return std::isnan(v) ? HUGE_VAL : v;
    };

    constexpr int kGrid = 128;
    const double step = (upper - lower) / kGrid;
    int best = 1;
    double best_value = HUGE_VAL;
    for (int k = 1; k <= kGrid; ++k) {
        const double v = eval(lower + k * step);
        if (v < best_value) {
            best_value = v;
            best = k;
        }
    }
    Minimum1d result{lower + best * step, best_value};

    const double a = lower + (best - 1) * step;
    const double b = std::min(upper, lower + (best + 1) * step);
    const Minimum1d refined = golden_section(eval, a, b, tol);
    if (refined.min_value <= result.min_value) {
        result = refined;
    }
    return result;
}

Minimum1d golden_section(const std::function<double(double)>& f, double lower, double upper, double tol) {
    if (!(lower < upper)) {
        throw InvalidBracket("golden_section: requires lower < upper");
    }
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lower;
    double b = upper;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? Minimum1d{c, fc} : Minimum1d{d, fd};
}

double gauss_hermite_expectation(const std::function<double(double)>& g, double mean, double variance, int order) {
    if (order < 1) {
        throw InvalidArgument("gauss_hermite_expectation: order must be positive");
    }
    g_quadrature_calls.fetch_add(1, std::memory_order_relaxed);
    const GaussHermiteRule& rule = rule_for(order);
    const double sd = std::sqrt(std::max(variance, 0.0));
    double total = 0.0;
    for (int k = 0; k < order; ++k) {
        total += rule.weights[k] * g(mean + sd * rule.nodes[k]);
    }
    return total;
}

std::uint64_t quadrature_call_count() {
    return g_quadrature_calls.load(std::memory_order_relaxed);
}

void reset_quadrature_call_count() {
    g_quadrature_calls.store(0, std::memory_order_relaxed);
}

}  // namespace sltgp::numerics
