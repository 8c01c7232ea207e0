#include <doctest.h>

#include <random>

#include "aoaloc/baselines.hpp"

using namespace aoaloc;

namespace {

// Reference ln I0 by direct series summation, valid through x ~ 700.
double ln_i0_series(double x) {
    double q = x * x / 4.0;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 2000; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-20) break;
    }
    return std::log(sum);
}

VectorXcd column_from(std::initializer_list<double> mags) {
    VectorXcd v(static_cast<Eigen::Index>(mags.size()));
    Eigen::Index i = 0;
    for (double m : mags) v(i++) = cplx(m, 0.0);
    return v;
}

}  // namespace

TEST_CASE("ln I0 matches the series oracle to 1e-9 through the crossover") {
    for (double x = 0.0; x <= 30.0; x += 0.37)
        CHECK(std::fabs(log_bessel_i0(x) - ln_i0_series(x)) < 1e-9);
    // Beyond the crossover the asymptotic branch stays close to the series.
    for (double x : {31.0, 40.0, 80.0, 200.0})
        CHECK(std::fabs(log_bessel_i0(x) - ln_i0_series(x)) < 1e-6 * ln_i0_series(x));
}

TEST_CASE("binary detector counts exceedances") {
    VectorXcd col = column_from({3.0, 0.1, 0.1, 0.1, 0.1, 0.1});
    CHECK(!binary_detector(col, 1.0, 2));  // only one element above 1
    CHECK(binary_detector(col, 1.0, 1));
    CHECK(binary_detector(col, 0.0, 6));  // zero threshold keeps everything
}

TEST_CASE("GLRT statistic behavior") {
    VectorXcd zero = VectorXcd::Zero(6);
    CHECK(glrt_statistic(zero, 1.0, 1.0) == 0.0);
    CHECK(glrt_detector(zero, 0.0, 1.0, 1.0));
    CHECK(!glrt_detector(zero, 0.1, 1.0, 1.0));

    // Monotone in each element modulus.
    VectorXcd a = column_from({1.0, 2.0, 0.5});
    VectorXcd b = column_from({1.0, 2.5, 0.5});
    CHECK(glrt_statistic(b, 2.0, 0.7) > glrt_statistic(a, 2.0, 0.7));
}

TEST_CASE("SLD is the energy test") {
    VectorXcd col = column_from({3.0, 2.0, 1.0});
    CHECK(sld_statistic(col) == doctest::Approx(14.0).epsilon(1e-14));
    CHECK(sld_detector(col, 10.0));
    CHECK(sld_detector(col, 14.0));  // boundary: >= convention
    CHECK(!sld_detector(col, 14.0000001));
    CHECK(sld_statistic(col * cplx(0.0, 2.0)) == doctest::Approx(56.0).epsilon(1e-12));
}

TEST_CASE("all detectors are monotone in their threshold") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        VectorXcd col(6);
        for (int k = 0; k < 6; ++k) col(k) = cplx(n(rng), n(rng));
        double lo = 0.3, hi = 0.9;
        CHECK((binary_detector(col, hi, 2) ? binary_detector(col, lo, 2) : true));
        CHECK((glrt_detector(col, 6.0, 2.0, 0.5) ? glrt_detector(col, 4.0, 2.0, 0.5) : true));
        CHECK((sld_detector(col, 5.0) ? sld_detector(col, 2.0) : true));
    }
}

TEST_CASE("SLD agrees with GLRT in the small-argument regime") {
    // For x <= 0.1, ln I0(x) = x^2/4 - x^4/64 + ...; mapping thresholds by
    // T_sld = 4 T_glrt / c^2 aligns the decisions away from the boundary.
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 0.01);
    double gamma = 1.0, noise_var = 16.0;  // c = 2 sqrt(gamma / sigma^2) = 0.5
    double c = 2.0 * std::sqrt(gamma / noise_var);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        VectorXcd col(6);
        for (int k = 0; k < 6; ++k) col(k) = cplx(n(rng), n(rng));
        double xmax = c * col.cwiseAbs().maxCoeff();
        if (xmax > 0.1) continue;
        double t_glrt = 1e-6;
        double t_sld = 4.0 * t_glrt / (c * c);
        double stat = glrt_statistic(col, gamma, noise_var);
        // Taylor remainder bound per element: x^4/64.
        double margin = 6.0 * std::pow(xmax, 4) / 64.0;
        if (std::fabs(stat - t_glrt) <= margin) continue;  // boundary: skip
        CHECK(glrt_detector(col, t_glrt, gamma, noise_var) == sld_detector(col, t_sld));
        ++checked;
    }
    CHECK(checked > 100);
}

TEST_CASE("matched output size follows the order statistics") {
    std::vector<double> stats = {5.0, 1.0, 4.0, 2.0, 3.0};
    auto t0 = match_output_size(stats, 0);
    CHECK(t0.achieved == 0);
    CHECK(t0.threshold > 5.0);

    auto t_all = match_output_size(stats, 5);
    CHECK(t_all.achieved == 5);
    CHECK(t_all.threshold <= 1.0);

    auto t2 = match_output_size(stats, 2);
    CHECK(t2.achieved == 2);
    CHECK(t2.exact);
    CHECK(t2.threshold == 4.0);

    // Monotonicity: larger n_out never raises the threshold.
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= 5; ++n) {
        auto t = match_output_size(stats, n);
        CHECK(t.threshold <= prev);
        prev = t.threshold;
    }

    // Ties straddling the cut are flagged.
    std::vector<double> tied = {3.0, 3.0, 3.0, 1.0};
    auto tt = match_output_size(tied, 2);
    CHECK(!tt.exact);
    CHECK((tt.achieved == 3 || tt.achieved == 0));
}
