#include <doctest.h>

#include "aoaloc/scene.hpp"
#include "aoaloc/signal.hpp"

using namespace aoaloc;

TEST_CASE("city map heights stay in the configured band") {
    CityMapParams p;
    p.extent = 400.0;
    p.height_min = 3.5;
    p.height_max = 20.0;
    p.cell_size = 2.0;
    CityMap map = build_city_map(7, p);

    double jitter = p.height_jitter_frac * (p.height_max - p.height_min);
    bool saw_building = false;
    for (double h : map.raw()) {
        CHECK(h >= 0.0);
        if (h > 0.0) {
            saw_building = true;
            CHECK(h >= p.height_min - jitter - 1e-12);
            CHECK(h <= p.height_max + jitter + 1e-12);
        }
    }
    CHECK(saw_building);
}

TEST_CASE("degenerate height range produces a flat map") {
    CityMapParams p;
    p.extent = 200.0;
    p.height_min = 0.0;
    p.height_max = 0.0;
    p.cell_size = 2.0;
    CityMap map = build_city_map(3, p);
    for (double h : map.raw()) CHECK(h == 0.0);
}

TEST_CASE("city map generation is deterministic in the seed") {
    CityMapParams p;
    p.extent = 300.0;
    CityMap a = build_city_map(42, p);
    CityMap b = build_city_map(42, p);
    CHECK(a.raw() == b.raw());
    CityMap c = build_city_map(43, p);
    CHECK(a.raw() != c.raw());
}

TEST_CASE("invalid map parameters are rejected") {
    CityMapParams p;
    p.extent = -5.0;
    CHECK_THROWS_AS(build_city_map(1, p), std::invalid_argument);
    p.extent = 100.0;
    p.height_min = 10.0;
    p.height_max = 5.0;
    CHECK_THROWS_AS(build_city_map(1, p), std::invalid_argument);
}

TEST_CASE("height queries sample the containing cell and clamp outside") {
    // Two cells: street at 0, building at 15.
    CityMap map({0.0, 15.0}, 2, 1, Vector2d(0.0, 0.0), 10.0);
    CHECK(map.height_at(5.0, 5.0) == 0.0);
    CHECK(map.height_at(15.0, 5.0) == 15.0);
    // 1 cm either side of the boundary: the step survives.
    CHECK(map.height_at(10.01, 5.0) == 15.0);
    CHECK(map.height_at(9.99, 5.0) == 0.0);
    // Clamped queries outside the extent.
    CHECK(map.height_at(-100.0, 5.0) == 0.0);
    CHECK(map.height_at(500.0, 5.0) == 15.0);

    CityMap flat = flat_map(100.0, 0.0);
    CHECK(flat.height_at(3.0, -7.0) == 0.0);

    // A direct lookup at a cell center returns the stored height.
    CityMap single({12.0}, 1, 1, Vector2d(0.0, 0.0), 1.0);
    CHECK(single.height_at(0.5, 0.5) == 12.0);
}

TEST_CASE("array position moves linearly") {
    Trajectory traj(Vector3d(27, 11, 500), Vector3d(44, 33, 0), 0.1, 0.03, 10);
    CHECK(array_position_at(traj, 0.0) == Vector3d(27, 11, 500));
    CHECK(array_position_at(traj, 1.0).isApprox(Vector3d(71, 44, 500)));
    Trajectory still(Vector3d(1, 2, 3), Vector3d::Zero(), 0.0, 1.0, 2);
    CHECK(array_position_at(still, 17.0) == Vector3d(1, 2, 3));
    CHECK_THROWS_AS(array_position_at(traj, -1.0), std::invalid_argument);
}

TEST_CASE("window midpoints follow t0 + (i-1)T + T/2") {
    Trajectory traj(Vector3d::Zero(), Vector3d::Zero(), 0.1, 0.03, 5);
    CHECK(window_midpoint(traj, 1) == doctest::Approx(0.115).epsilon(1e-12));
    CHECK(window_midpoint(traj, 2) == doctest::Approx(0.145).epsilon(1e-12));
    for (int i = 1; i < 5; ++i)
        CHECK(window_midpoint(traj, i + 1) - window_midpoint(traj, i) ==
              doctest::Approx(0.03).epsilon(1e-12));
    CHECK_THROWS_AS(window_midpoint(traj, 0), std::out_of_range);
    CHECK_THROWS_AS(window_midpoint(traj, 6), std::out_of_range);
}

TEST_CASE("stamped sources sit exactly on the map surface") {
    CityMapParams p;
    p.extent = 800.0;
    p.cell_size = 2.0;
    CityMap map = build_city_map(7, p);
    SourceSet sources = make_source_set(default_source_positions(), 3e-6, 3.0, 3e-3);
    CityMap stamped = stamp_sources(map, sources);
    for (const auto& r : sources.positions) {
        if (std::abs(r.x()) > 390 || std::abs(r.y()) > 390) continue;  // outside this small map
        CHECK(std::fabs(stamped.height_at(r.x(), r.y()) - r.z()) <= 1e-6);
    }
}

TEST_CASE("rooftop sources land on rooftops") {
    CityMapParams p;
    p.extent = 400.0;
    p.cell_size = 2.0;
    CityMap map = build_city_map(11, p);
    SourceSet s = sample_rooftop_sources(map, 6, 99, 3e-6, 3.0, 3e-3);
    REQUIRE(s.count() == 6);
    for (const auto& r : s.positions) {
        CHECK(r.z() > 0.0);
        CHECK(std::fabs(map.height_at(r.x(), r.y()) - r.z()) <= 1e-6);
    }
}

TEST_CASE("uniform circular array geometry") {
    ArrayGeometry geom = uniform_circular_array(6, 0.2, 0.5e9);
    CHECK(geom.num_elements() == 6);
    CHECK(geom.wave_number() == doctest::Approx(2.0 * kPi * 0.5e9 / kSpeedOfLight).epsilon(1e-15));
    for (int m = 0; m < 6; ++m) {
        CHECK(geom.element_offsets().col(m).norm() == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(geom.element_offsets()(2, m) == 0.0);
    }
    // Yaw rotation preserves radii and the plane.
    ArrayGeometry rot = geom.rotated_z(deg2rad(31.0));
    for (int m = 0; m < 6; ++m)
        CHECK(rot.element_offsets().col(m).norm() == doctest::Approx(0.2).epsilon(1e-12));
}
