#include <doctest.h>

#include <random>

#include "aoaloc/rough_aoa.hpp"
#include "aoaloc/signal.hpp"

using namespace aoaloc;

namespace {

// Footnote MDL transcription, kept separate from the implementation.
int mdl_oracle(const VectorXd& eig, Eigen::Index g) {
    const int m = static_cast<int>(eig.size());
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int k = 0; k < m; ++k) {
        double geo = 1.0, arith = 0.0;
        for (int i = k; i < m; ++i) {
            geo *= std::pow(std::max(eig(i), 1e-30), 1.0 / (m - k));
            arith += eig(i) / (m - k);
        }
        double rho = geo / std::max(arith, 1e-30);
        double mdl = -2.0 * static_cast<double>(g) * (m - k) * std::log(rho) +
                     k * (2.0 * m - k) * std::log(static_cast<double>(g));
        if (mdl < best) {
            best = mdl;
            arg = k;
        }
    }
    return arg;
}

}  // namespace

TEST_CASE("sample covariance of small blocks") {
    MatrixXcd y(2, 1);
    y(0, 0) = cplx(1, 0);
    y(1, 0) = cplx(0, 1);
    MatrixXcd r = sample_covariance(y);
    CHECK(std::abs(r(0, 0) - cplx(1, 0)) < 1e-14);
    CHECK(std::abs(r(0, 1) - cplx(0, -1)) < 1e-14);
    CHECK(std::abs(r(1, 0) - cplx(0, 1)) < 1e-14);
    CHECK(std::abs(r(1, 1) - cplx(1, 0)) < 1e-14);

    // Orthogonal rows scaled by sqrt(G) give the identity.
    const int g = 8;
    MatrixXcd q(2, g);
    for (int c = 0; c < g; ++c) {
        q(0, c) = std::polar(1.0, 2.0 * kPi * c / g);
        q(1, c) = std::polar(1.0, 4.0 * kPi * c / g);
    }
    MatrixXcd rq = sample_covariance(q);
    CHECK((rq - MatrixXcd::Identity(2, 2)).norm() < 1e-12);

    CHECK_THROWS_AS(sample_covariance(MatrixXcd(3, 0)), std::runtime_error);
}

TEST_CASE("sample covariance is Hermitian for random blocks") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        MatrixXcd y(4, 50);
        for (int c = 0; c < 50; ++c)
            for (int r = 0; r < 4; ++r) y(r, c) = cplx(n(rng), n(rng));
        MatrixXcd r = sample_covariance(y);
        CHECK((r - r.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("MDL order estimates") {
    VectorXd flat(6);
    flat << 1, 1, 1, 1, 1, 1;
    CHECK(mdl_order(flat, 1000) == 0);

    VectorXd one(6);
    one << 100, 1, 1, 1, 1, 1;
    CHECK(mdl_order(one, 1000) == 1);
    CHECK(mdl_order(one, 1000) == mdl_oracle(one, 1000));

    // Rank-2 synthetic covariance plus a small noise floor.
    VectorXd two(6);
    two << 80, 40, 0.5, 0.5, 0.5, 0.5;
    CHECK(mdl_order(two, 2000) == 2);
    CHECK(mdl_order(two, 2000) == mdl_oracle(two, 2000));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
        VectorXd eig(6);
        for (int i = 0; i < 6; ++i) eig(i) = u(rng);
        std::sort(eig.data(), eig.data() + 6, std::greater<double>());
        CHECK(mdl_order(eig, 500) == mdl_oracle(eig, 500));
        CHECK(mdl_order(eig, 500) <= 5);
    }
}

namespace {

// One hemisphere only: a planar array aliases theta onto pi - theta, so the
// scope range stays below the horizon like the simulated receiver's.
AngleGrid coarse_grid() {
    return AngleGrid::regular(deg2rad(90.0), deg2rad(150.0), deg2rad(2.0), 0.0, 2.0 * kPi,
                              deg2rad(2.0));
}

}  // namespace

TEST_CASE("MUSIC spectrum peaks at planted directions") {
    ArrayGeometry geom = uniform_circular_array(6, 0.2, 0.5e9);
    AngleGrid grid = coarse_grid();

    double th0 = deg2rad(120.0), ph0 = deg2rad(40.0);
    VectorXcd a0 = steering_vector(geom, th0, ph0);
    MatrixXcd r = a0 * a0.adjoint() + 1e-4 * MatrixXcd::Identity(6, 6);

    MusicSpectrum spec = music_spectrum(r, 1, geom, grid);
    Eigen::Index bu, bv;
    spec.values.maxCoeff(&bu, &bv);
    CHECK(spec.grid.elevations[bu] == doctest::Approx(th0).epsilon(1e-9));
    CHECK(spec.grid.azimuths[bv] == doctest::Approx(ph0).epsilon(1e-9));

    // Order zero: the noise subspace spans everything and the spectrum is the
    // constant 1/M.
    MusicSpectrum flat = music_spectrum(r, 0, geom, grid);
    CHECK(std::fabs(flat.values.maxCoeff() - 1.0 / 6.0) < 1e-9);
    CHECK(std::fabs(flat.values.minCoeff() - 1.0 / 6.0) < 1e-9);

    CHECK_THROWS_AS(music_spectrum(r, 6, geom, grid), std::invalid_argument);
}

TEST_CASE("two separated sources give two dominant peaks") {
    ArrayGeometry geom = uniform_circular_array(6, 0.2, 0.5e9);
    AngleGrid grid = coarse_grid();
    double th1 = deg2rad(100.0), ph1 = deg2rad(60.0);
    double th2 = deg2rad(140.0), ph2 = deg2rad(250.0);
    VectorXcd a1 = steering_vector(geom, th1, ph1);
    VectorXcd a2 = steering_vector(geom, th2, ph2);
    MatrixXcd r = a1 * a1.adjoint() + a2 * a2.adjoint() + 1e-4 * MatrixXcd::Identity(6, 6);

    MusicSpectrum spec = music_spectrum(r, 2, geom, grid);
    PeakList peaks = pick_peaks(spec, 2);
    REQUIRE(peaks.angles.size() == 2);
    auto near = [&](std::pair<double, double> got, double th, double ph) {
        return std::fabs(got.first - th) < deg2rad(2.1) && std::fabs(wrap_pi(got.second - ph)) < deg2rad(2.1);
    };
    bool found1 = near(peaks.angles[0], th1, ph1) || near(peaks.angles[1], th1, ph1);
    bool found2 = near(peaks.angles[0], th2, ph2) || near(peaks.angles[1], th2, ph2);
    CHECK(found1);
    CHECK(found2);
}

TEST_CASE("spectrum scaling invariance") {
    ArrayGeometry geom = uniform_circular_array(6, 0.2, 0.5e9);
    AngleGrid grid = AngleGrid::regular(deg2rad(90.0), deg2rad(150.0), deg2rad(3.0), 0.0,
                                        2.0 * kPi, deg2rad(3.0));
    VectorXcd a0 = steering_vector(geom, deg2rad(120.0), deg2rad(99.0));
    MatrixXcd r = a0 * a0.adjoint() + 1e-3 * MatrixXcd::Identity(6, 6);

    MusicSpectrum s1 = music_spectrum(r, 1, geom, grid);
    MusicSpectrum s5 = music_spectrum(5.0 * r, 1, geom, grid);
    Eigen::Index u1, v1, u5, v5;
    s1.values.maxCoeff(&u1, &v1);
    s5.values.maxCoeff(&u5, &v5);
    CHECK(u1 == u5);
    CHECK(v1 == v5);
    // The noise projector only sees the subspace, so the whole spectrum is
    // unchanged; near-singular peak cells are excluded since 1/(a^H W a)
    // there amplifies round-off without bound.
    for (Eigen::Index u = 0; u < s1.values.rows(); ++u)
        for (Eigen::Index v = 0; v < s1.values.cols(); ++v) {
            if (s1.values(u, v) > 1e6) continue;
            CHECK(std::fabs(s5.values(u, v) / s1.values(u, v) - 1.0) < 1e-6);
        }
}

TEST_CASE("peak picking on synthetic surfaces") {
    AngleGrid grid = AngleGrid::regular(0.0, deg2rad(40.0), deg2rad(10.0), 0.0, 2.0 * kPi,
                                        deg2rad(45.0));
    MusicSpectrum spec;
    spec.grid = grid;
    spec.values = MatrixXd::Constant(grid.elevations.size(), grid.azimuths.size(), 1.0);

    // Constant surface: no strict maxima at all.
    PeakList none = pick_peaks(spec, 3);
    CHECK(none.angles.empty());
    CHECK(none.shortfall);

    // Two bumps.
    spec.values(1, 2) = 5.0;
    spec.values(3, 6) = 4.0;
    PeakList two = pick_peaks(spec, 2);
    REQUIRE(two.angles.size() == 2);
    CHECK(two.angles[0].first == doctest::Approx(grid.elevations[1]));
    CHECK(two.angles[0].second == doctest::Approx(grid.azimuths[2]));
    CHECK(two.angles[1].first == doctest::Approx(grid.elevations[3]));
    CHECK(two.angles[1].second == doctest::Approx(grid.azimuths[6]));

    // Azimuth wrap: a ridge crossing phi = 0 is one maximum, not two.
    MusicSpectrum wrapped;
    wrapped.grid = grid;
    wrapped.values = MatrixXd::Constant(grid.elevations.size(), grid.azimuths.size(), 1.0);
    wrapped.values(2, 0) = 7.0;
    wrapped.values(2, static_cast<Eigen::Index>(grid.azimuths.size()) - 1) = 6.0;
    PeakList w = pick_peaks(wrapped, 2);
    REQUIRE(!w.angles.empty());
    CHECK(w.angles[0].second == doctest::Approx(0.0));
    // The neighbor across the wrap is not a separate strict maximum.
    CHECK(w.shortfall);
}

TEST_CASE("single peak surface returns that cell") {
    AngleGrid grid = AngleGrid::regular(0.0, deg2rad(20.0), deg2rad(5.0), 0.0, kPi, deg2rad(30.0));
    MusicSpectrum spec;
    spec.grid = grid;
    spec.values = MatrixXd::Zero(grid.elevations.size(), grid.azimuths.size()).array() + 0.5;
    spec.values(2, 3) = 2.0;
    PeakList p = pick_peaks(spec, 1);
    REQUIRE(p.angles.size() == 1);
    CHECK(p.angles[0].first == doctest::Approx(grid.elevations[2]));
    CHECK(p.angles[0].second == doctest::Approx(grid.azimuths[3]));
}
