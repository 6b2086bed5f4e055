#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>

namespace sltgp {

/// xoshiro256** seeded through splitmix64. The stream is fully specified by (seed, stream id),
/// so results do not depend on the platform's <random> implementation.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);

    /// Uniform on the open interval (0, 1).
    double uniform_open();

    /// Standard normal draw by inverse CDF.
    double normal();

    /// Uniform integer in [0, bound) without modulo bias.
    std::uint64_t below(std::uint64_t bound);

    Eigen::VectorXd normal_vector(Eigen::Index n);
    Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);
    Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi);

private:
    std::array<std::uint64_t, 4> state_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace sltgp
