#include "sltgp/kernels.hpp"

#include "sltgp/errors.hpp"

#include <cmath>
#include <sstream>

namespace sltgp {

std::string_view to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::Rbf:
            return "rbf";
        case KernelFamily::Linear:
            return "linear";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
    if (name == "rbf") return KernelFamily::Rbf;
    if (name == "linear") return KernelFamily::Linear;
    throw InvalidArgument("unknown kernel family '" + std::string(name) + "'");
}

KernelSpec KernelSpec::rbf(double length_scale, double amplitude) {
    if (!(length_scale > 0.0) || !(amplitude > 0.0)) {
        throw InvalidArgument("rbf kernel needs positive length scale and amplitude");
    }
    KernelSpec spec;
    spec.family = KernelFamily::Rbf;
    spec.log_length_scale = std::log(length_scale);
    spec.log_amplitude = std::log(amplitude);
    return spec;
}

KernelSpec KernelSpec::linear(double signal_variance) {
    if (!(signal_variance > 0.0)) {
        throw InvalidArgument("linear kernel needs a positive signal variance");
    }
    KernelSpec spec;
    spec.family = KernelFamily::Linear;
    spec.log_signal_variance = std::log(signal_variance);
    return spec;
}

double KernelSpec::length_scale() const { return std::exp(log_length_scale); }
double KernelSpec::amplitude() const { return std::exp(log_amplitude); }
double KernelSpec::signal_variance() const { return std::exp(log_signal_variance); }

std::string describe(const KernelSpec& spec) {
    std::ostringstream out;
    out.precision(6);
    if (spec.family == KernelFamily::Rbf) {
        out << "rbf(l=" << spec.length_scale() << ", amp=" << spec.amplitude() << ")";
    } else {
        out << "linear(s2=" << spec.signal_variance() << ")";
    }
    return out.str();
}

namespace kernels {

namespace {

// Both argument orders must produce bit-identical values, so the squared distance and the dot
// product are accumulated in a fixed, argument-symmetric way.
double eval_unchecked(const KernelSpec& spec, const double* a, const double* b, Eigen::Index dim) {
    if (spec.family == KernelFamily::Rbf) {
        double sq = 0.0;
        for (Eigen::Index k = 0; k < dim; ++k) {
            const double diff = a[k] - b[k];
            sq += diff * diff;
        }
        const double inv_two_l2 = 0.5 * std::exp(-2.0 * spec.log_length_scale);
        return std::exp(spec.log_amplitude - sq * inv_two_l2);
    }
    double dot = 0.0;
    for (Eigen::Index k = 0; k < dim; ++k) {
        dot += a[k] * b[k];
    }
    return std::exp(spec.log_signal_variance) * dot;
}

void check_same_dim(Eigen::Index a, Eigen::Index b) {
    if (a != b) {
        throw DimensionMismatch("kernel inputs have dimensions " + std::to_string(a) + " and " +
                                std::to_string(b));
    }
}

}  // namespace

double eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
            const Eigen::Ref<const Eigen::VectorXd>& x_prime) {
    check_same_dim(x.size(), x_prime.size());
    const Eigen::VectorXd a = x;
    const Eigen::VectorXd b = x_prime;
    return eval_unchecked(spec, a.data(), b.data(), a.size());
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& x) {
    if (x.rows() == 0) {
        throw InvalidArgument("gram: empty input set");
    }
    const Eigen::Index n = x.rows();
    const Eigen::Index dim = x.cols();
    // Row-major copy so each point is contiguous.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pts = x;
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            const double v = eval_unchecked(spec, pts.row(i).data(), pts.row(j).data(), dim);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

Eigen::MatrixXd cross(const KernelSpec& spec, const Eigen::MatrixXd& x, const Eigen::MatrixXd& z) {
    if (x.rows() > 0 && z.rows() > 0) {
        check_same_dim(x.cols(), z.cols());
    }
    const Eigen::Index dim = x.cols();
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a = x;
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> b = z;
    Eigen::MatrixXd k(x.rows(), z.rows());
    for (Eigen::Index j = 0; j < z.rows(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            k(i, j) = eval_unchecked(spec, a.row(i).data(), b.row(j).data(), dim);
        }
    }
    return k;
}

Eigen::VectorXd diagonal(const KernelSpec& spec, const Eigen::MatrixXd& z) {
    Eigen::VectorXd d(z.rows());
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pts = z;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        d(i) = eval_unchecked(spec, pts.row(i).data(), pts.row(i).data(), z.cols());
    }
    return d;
}

}  // namespace kernels
}  // namespace sltgp
