#include "sltgp/errors.hpp"
#include "sltgp/kernels.hpp"
#include "sltgp/numerics.hpp"
#include "sltgp/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace sltgp;

TEST_CASE("kernel evaluation") {
    const KernelSpec rbf = KernelSpec::rbf(1.0, 1.0);
    Eigen::VectorXd x(2);
    x << 0.3, -1.2;
    CHECK(kernels::eval(rbf, x, x) == 1.0);
    Eigen::VectorXd z = x;
    z(0) += 1.0;
    z(1) -= 1.0;
    CHECK(kernels::eval(rbf, x, z) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

    Eigen::VectorXd a(2);
    Eigen::VectorXd b(2);
    a << 1, 2;
    b << 3, -1;
    CHECK(kernels::eval(KernelSpec::linear(2.0), a, b) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(kernels::eval(KernelSpec::rbf(2.0, 10.0), a, a) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK_THROWS_AS(kernels::eval(rbf, a, Eigen::VectorXd::Zero(3)), DimensionMismatch);
}

TEST_CASE("kernel hyperparameters are stored in log space") {
    const KernelSpec k = KernelSpec::rbf(0.5, 4.0);
    CHECK(k.log_length_scale == doctest::Approx(std::log(0.5)));
    CHECK(k.length_scale() == doctest::Approx(0.5));
    CHECK(k.amplitude() == doctest::Approx(4.0));
    CHECK(KernelSpec::linear(3.0).signal_variance() == doctest::Approx(3.0));
    CHECK_THROWS_AS(KernelSpec::rbf(-1.0, 1.0), InvalidArgument);
    CHECK(kernel_family_from_string(to_string(KernelFamily::Linear)) == KernelFamily::Linear);
    CHECK_THROWS_AS(kernel_family_from_string("matern"), InvalidArgument);
}

TEST_CASE("gram and cross matrices") {
    const KernelSpec rbf = KernelSpec::rbf(1.3, 2.0);
    Eigen::MatrixXd one(1, 2);
    one << 4, 5;
    CHECK(kernels::gram(KernelSpec::rbf(1.0, 1.0), one)(0, 0) == 1.0);
    Eigen::MatrixXd twin(2, 2);
    twin << 1, 1, 1, 1;
    CHECK(kernels::gram(KernelSpec::rbf(1.0, 1.0), twin) == Eigen::MatrixXd::Ones(2, 2));

    Rng rng(3, 0);
    const Eigen::MatrixXd x = rng.normal_matrix(3, 4);
    const Eigen::MatrixXd g = kernels::gram(rbf, x);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            CHECK(std::abs(g(i, j) - kernels::eval(rbf, x.row(i).transpose(), x.row(j).transpose())) <= 1e-15);
            CHECK(g(i, j) == g(j, i));
        }
    }
    CHECK(kernels::cross(rbf, x, x) == g);
    const Eigen::MatrixXd col = kernels::cross(rbf, x, x.topRows(1));
    CHECK(col.cols() == 1);
    CHECK(col.col(0).isApprox(g.col(0)));
    const Eigen::MatrixXd empty = kernels::cross(rbf, x, Eigen::MatrixXd(0, 4));
    CHECK(empty.rows() == 3);
    CHECK(empty.cols() == 0);
    CHECK(kernels::diagonal(rbf, x).isApprox(g.diagonal()));
    CHECK_THROWS_AS(kernels::cross(rbf, x, Eigen::MatrixXd::Zero(2, 3)), DimensionMismatch);
}

TEST_CASE("RBF properties") {
    const KernelSpec rbf = KernelSpec::rbf(1.0, 1.0);
    Rng rng(11, 0);
    const Eigen::MatrixXd pts = rng.uniform_matrix(500, 2, 0.0, 10.0);
    const numerics::PsdFactor f = numerics::psd_factorize(kernels::gram(rbf, pts), 1e-6);
    CHECK(f.jitter_used <= 1e-6);

    Eigen::VectorXd a = rng.normal_vector(3);
    Eigen::VectorXd b = rng.normal_vector(3);
    CHECK(kernels::eval(rbf, a, b) == kernels::eval(rbf, b, a));
    double previous = 2.0;
    for (double d = 0.0; d < 5.0; d += 0.25) {
        Eigen::VectorXd shifted = a;
        shifted(0) += d;
        const double k = kernels::eval(rbf, a, shifted);
        CHECK(k < previous);
        previous = k;
    }
}
