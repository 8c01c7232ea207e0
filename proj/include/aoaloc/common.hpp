#ifndef AOALOC_COMMON_HPP
#define AOALOC_COMMON_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace aoaloc {

using cplx = std::complex<double>;
using Eigen::Matrix2d;
using Eigen::Matrix3d;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Deterministic stream splitting: every RNG in the project is seeded from a
// master seed plus a few purpose tags, so toggling one randomized component
// never shifts the draws of another.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t a,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
    return std::mt19937_64(derive_seed(master, a, b, c));
}

// Circularly symmetric complex Gaussian with E{|v|^2} = variance.
inline cplx complex_normal(std::mt19937_64& rng, double variance) {
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    return {n(rng), n(rng)};
}

inline double wrap_two_pi(double phi) {
    phi = std::fmod(phi, 2.0 * kPi);
    return phi < 0.0 ? phi + 2.0 * kPi : phi;
}

// Wraps an angle difference to (-pi, pi].
inline double wrap_pi(double d) {
    d = std::fmod(d, 2.0 * kPi);
    if (d <= -kPi) d += 2.0 * kPi;
    if (d > kPi) d -= 2.0 * kPi;
    return d;
}

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Runs fn(begin..end) split across threads; fn(lo, hi) handles [lo, hi).
// Work is partitioned statically so results are thread-count independent.
void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace aoaloc

#endif
