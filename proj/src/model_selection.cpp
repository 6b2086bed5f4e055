#include "sltgp/model_selection.hpp"

#include "sltgp/errors.hpp"
#include "sltgp/numerics.hpp"
#include "sltgp/rng.hpp"
#include "sltgp/slt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sltgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kRestartStream = 0x5e4c4;

Eigen::VectorXd clamp_to(const Eigen::VectorXd& x, const Box& box) {
    return x.cwiseMax(box.lower).cwiseMin(box.upper);
}

struct Vertex {
    Eigen::VectorXd x;
    double value;
};

// Projected Nelder-Mead minimizing g; returns the best vertex and adds to `evaluations`.
Vertex nelder_mead(const std::function<double(const Eigen::VectorXd&)>& g, const Eigen::VectorXd& start,
                   const Box& box, const SearchConfig& config, int& evaluations) {
    const Eigen::Index dim = start.size();
    std::vector<Vertex> simplex;
    simplex.reserve(static_cast<std::size_t>(dim + 1));
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evaluations;
        return Vertex{x, g(x)};
    };
    simplex.push_back(eval(start));
    for (Eigen::Index i = 0; i < dim; ++i) {
        Eigen::VectorXd x = start;
        const double h = 0.1 * (box.upper(i) - box.lower(i));
        x(i) = start(i) + h <= box.upper(i) ? start(i) + h : start(i) - h;
        simplex.push_back(eval(clamp_to(x, box)));
    }

    const int budget = evaluations + config.max_evals - static_cast<int>(dim + 1);
    auto by_value = [](const Vertex& a, const Vertex& b) { return a.value < b.value; };
    while (evaluations < budget) {
        std::stable_sort(simplex.begin(), simplex.end(), by_value);
        const Vertex& best = simplex.front();
        const Vertex& worst = simplex.back();
        double extent = 0.0;
        for (const Vertex& v : simplex) {
            extent = std::max(extent, (v.x - best.x).cwiseAbs().maxCoeff());
        }
        if (worst.value - best.value <= config.f_tol && extent <= config.x_tol) {
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            centroid += simplex[static_cast<std::size_t>(i)].x;
        }
        centroid /= static_cast<double>(dim);

        const Vertex reflected = eval(clamp_to(centroid + (centroid - worst.x), box));
        if (reflected.value < best.value) {
            const Vertex expanded = eval(clamp_to(centroid + 2.0 * (centroid - worst.x), box));
            simplex.back() = expanded.value < reflected.value ? expanded : reflected;
            continue;
        }
        if (reflected.value < simplex[static_cast<std::size_t>(dim - 1)].value) {
            simplex.back() = reflected;
            continue;
        }
        const bool outside = reflected.value < worst.value;
        const Eigen::VectorXd toward = outside ? reflected.x : worst.x;
        const Vertex contracted = eval(clamp_to(centroid + 0.5 * (toward - centroid), box));
        if (contracted.value < std::min(reflected.value, worst.value)) {
            simplex.back() = contracted;
            continue;
        }
        for (std::size_t k = 1; k < simplex.size(); ++k) {
            simplex[k] = eval(clamp_to(best.x + 0.5 * (simplex[k].x - best.x), box));
        }
    }
    return *std::min_element(simplex.begin(), simplex.end(), by_value);
}

template <typename Fit>
double guarded(Fit&& fit) {
    try {
        const double v = fit();
        return std::isfinite(v) ? v : -kInf;
    } catch (const Error&) {
        return -kInf;
    }
}

}  // namespace

BoxOptimum maximize_in_box(const std::function<double(const Eigen::VectorXd&)>& f, const Box& box,
                           const SearchConfig& config) {
    if (config.restarts < 1) {
        throw InvalidArgument("search needs at least one restart");
    }
    const Eigen::Index dim = box.lower.size();
    if (box.upper.size() != dim || !(box.lower.array() <= box.upper.array()).all() || !box.lower.allFinite() ||
        !box.upper.allFinite()) {
        throw InvalidArgument("search box must be finite with lower <= upper");
    }
    BoxOptimum best;
    best.value = -kInf;
    if (dim == 0) {
        best.argmax = Eigen::VectorXd(0);
        best.value = f(best.argmax);
        best.evaluations = 1;
        return best;
    }
    auto g = [&f](const Eigen::VectorXd& x) {
        const double v = f(x);
        return std::isfinite(v) ? -v : kInf;
    };
    int evaluations = 0;
    best.argmax = 0.5 * (box.lower + box.upper);
    for (int r = 0; r < config.restarts; ++r) {
        Eigen::VectorXd start = 0.5 * (box.lower + box.upper);
        if (r > 0) {
            Rng rng(config.seed, kRestartStream + static_cast<std::uint64_t>(r));
            for (Eigen::Index i = 0; i < dim; ++i) {
                start(i) = rng.uniform(box.lower(i), box.upper(i));
            }
        }
        const Vertex found = nelder_mead(g, start, box, config, evaluations);
        const double value = -found.value;
        if (value > best.value || (r == 0 && best.value == -kInf)) {
            best.value = value;
            best.argmax = found.x;
        }
    }
    best.evaluations = evaluations;
    return best;
}

double log_median_distance(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    if (n < 2) {
        return 0.0;
    }
    std::vector<double> distances;
    distances.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            distances.push_back((x.row(i) - x.row(j)).norm());
        }
    }
    auto mid = distances.begin() + static_cast<std::ptrdiff_t>(distances.size() / 2);
    std::nth_element(distances.begin(), mid, distances.end());
    const double median = *mid;
    return median > 0.0 ? std::log(median) : 0.0;
}

Box kernel_box(const KernelSpec& kernel_template, const Eigen::MatrixXd& x, const SearchConfig& config) {
    std::vector<double> lo;
    std::vector<double> hi;
    if (kernel_template.family == KernelFamily::Rbf) {
        if (config.optimize_length_scale) {
            const double center = log_median_distance(x);
            lo.push_back(center - config.length_scale_halfwidth);
            hi.push_back(center + config.length_scale_halfwidth);
        }
        if (config.optimize_amplitude) {
            lo.push_back(config.log_amplitude_bounds.first);
            hi.push_back(config.log_amplitude_bounds.second);
        }
    } else if (config.optimize_amplitude) {
        const double mean_sq = x.rows() > 0 ? x.rowwise().squaredNorm().mean() : 1.0;
        const double center = mean_sq > 0.0 ? -std::log(mean_sq) : 0.0;
        lo.push_back(center + config.linear_log_variance_offsets.first);
        hi.push_back(center + config.linear_log_variance_offsets.second);
    }
    Box box;
    box.lower = Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
    box.upper = Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
    return box;
}

KernelSpec apply_kernel_params(const KernelSpec& kernel_template, const Eigen::VectorXd& params,
                               const SearchConfig& config) {
    KernelSpec k = kernel_template;
    Eigen::Index i = 0;
    if (k.family == KernelFamily::Rbf) {
        if (config.optimize_length_scale) k.log_length_scale = params(i++);
        if (config.optimize_amplitude) k.log_amplitude = params(i++);
    } else if (config.optimize_amplitude) {
        k.log_signal_variance = params(i++);
    }
    return k;
}

GpcSelection optimize_gpc(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const KernelSpec& kernel_template,
                          const SearchConfig& config) {
    validate_labels(x, y);
    if (y.size() < 2) {
        throw InvalidArgument("optimize_gpc needs at least two data points");
    }
    const Box box = kernel_box(kernel_template, x, config);
    auto objective = [&](const Eigen::VectorXd& params) {
        const KernelSpec k = apply_kernel_params(kernel_template, params, config);
        return guarded([&] { return fit_gpc(x, y, k, config.ep).log_marginal; });
    };
    const BoxOptimum best = maximize_in_box(objective, box, config);
    return GpcSelection{apply_kernel_params(kernel_template, best.argmax, config), best.value, best.evaluations};
}

double slt_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                     const KernelSpec& kernel, double rho, const EpConfig& ep) {
    return modified_prior_fit(x, y, s, kernel, rho, ep).log_marginal;
}

double rho_from_logit(double t) {
    return 1.0 / (1.0 + std::exp(-t));
}

double logit_from_rho(double rho) {
    return std::log(rho / (1.0 - rho));
}

SltSelection optimize_slt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                          const KernelSpec& kernel_template, const SearchConfig& config) {
    validate_labels(x, y);
    if (y.size() < 2) {
        throw InvalidArgument("optimize_slt needs at least two data points");
    }
    if (!(config.rho_min > 0.0 && config.rho_max < 1.0 && config.rho_min < config.rho_max)) {
        throw InvalidArgument("rho search bounds must satisfy 0 < rho_min < rho_max < 1");
    }
    const Box kbox = kernel_box(kernel_template, x, config);
    const Eigen::Index dim = kbox.lower.size() + 1;
    Box box;
    box.lower.resize(dim);
    box.upper.resize(dim);
    box.lower << kbox.lower, logit_from_rho(config.rho_min);
    box.upper << kbox.upper, logit_from_rho(config.rho_max);

    auto objective = [&](const Eigen::VectorXd& params) {
        const KernelSpec k = apply_kernel_params(kernel_template, params.head(dim - 1), config);
        const double rho = rho_from_logit(params(dim - 1));
        return guarded([&] { return slt_objective(x, y, s, k, rho, config.ep); });
    };
    const BoxOptimum best = maximize_in_box(objective, box, config);
    SltSelection out;
    out.kernel = apply_kernel_params(kernel_template, best.argmax.head(dim - 1), config);
    out.rho = rho_from_logit(best.argmax(dim - 1));
    out.conditional_log_marginal = best.value;
    out.evaluations = best.evaluations;
    return out;
}

RhoSearch minimize_over_rho(const std::function<double(double)>& objective, int grid_points, double tol) {
    if (grid_points < 2) {
        throw InvalidArgument("rho grid needs at least two points");
    }
    auto eval = [&objective](double rho) {
        const double v = objective(rho);
        return std::isfinite(v) ? v : kInf;
    };
    RhoSearch out;
    out.grid.resize(static_cast<std::size_t>(grid_points));
    out.grid_values.resize(out.grid.size());
    std::size_t best = 0;
    for (std::size_t k = 0; k < out.grid.size(); ++k) {
        out.grid[k] = static_cast<double>(k) / static_cast<double>(grid_points - 1);
        out.grid_values[k] = eval(out.grid[k]);
        if (out.grid_values[k] < out.grid_values[best]) {
            best = k;
        }
    }
    out.grid_rho = out.grid[best];
    out.rho = out.grid_rho;
    out.objective = out.grid_values[best];

    const double lo = out.grid[best == 0 ? 0 : best - 1];
    const double hi = out.grid[std::min(best + 1, out.grid.size() - 1)];
    const numerics::Minimum1d refined = numerics::golden_section(eval, lo, hi, tol);
    if (refined.min_value < out.objective) {
        out.rho = refined.argmin;
        out.objective = refined.min_value;
    }
    return out;
}

double expected_nll_risk(const GpcPosterior& post, const Eigen::MatrixXd& x_test, const Eigen::VectorXd& y_test) {
    if (x_test.rows() != y_test.size() || y_test.size() == 0) {
        throw DimensionMismatch("expected_nll_risk: need a nonempty test set with one label per row");
    }
    const LatentPrediction latent = predict_latent(post, x_test);
    double total = 0.0;
    for (Eigen::Index j = 0; j < y_test.size(); ++j) {
        const double label = y_test(j);
        total += numerics::gauss_hermite_expectation(
            [label](double f) { return -numerics::log_norm_cdf(label * f); }, latent.mean(j), latent.variance(j));
    }
    return total / static_cast<double>(y_test.size());
}

RhoSearch optimize_rho_by_risk(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                               const KernelSpec& kernel, const Eigen::MatrixXd& x_test,
                               const Eigen::VectorXd& y_test, const EpConfig& ep) {
    auto risk = [&](double rho) {
        return expected_nll_risk(modified_prior_fit(x, y, s, kernel, rho, ep), x_test, y_test);
    };
    return minimize_over_rho(risk);
}

}  // namespace sltgp
