#ifndef AOALOC_SCENE_HPP
#define AOALOC_SCENE_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "aoaloc/common.hpp"

namespace aoaloc {

// Raster of ground/rooftop heights sampled nearest-cell. Building edges stay
// sharp: no interpolation across cell boundaries.
class CityMap {
public:
    CityMap(std::vector<double> heights, int nx, int ny, Vector2d origin, double cell_size);

    double height_at(const Vector2d& xy) const;  // clamps out-of-extent queries
    double height_at(double x, double y) const { return height_at(Vector2d(x, y)); }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double cell_size() const { return cell_size_; }
    const Vector2d& origin() const { return origin_; }
    double extent_x() const { return nx_ * cell_size_; }
    double extent_y() const { return ny_ * cell_size_; }
    double cell(int ix, int iy) const { return heights_[static_cast<std::size_t>(iy) * nx_ + ix]; }
    const std::vector<double>& raw() const { return heights_; }
    double max_height() const;
    double min_height() const;

    // New map whose cells inside the rectangle centered at xy are set to z.
    CityMap stamped(const Vector2d& xy, double z, double half_w, double half_d) const;

private:
    std::vector<double> heights_;  // row-major, iy * nx + ix
    int nx_, ny_;
    Vector2d origin_;
    double cell_size_;
};

struct CityMapParams {
    double extent = 2000.0;          // square side, meters
    double building_w = 10.0;        // footprint along x
    double building_d = 20.0;        // footprint along y
    double height_min = 3.5;
    double height_max = 20.0;
    double cell_size = 1.0;
    double street_min = 6.0, street_max = 14.0;  // gap between building rows
    double alley_min = 3.0, alley_max = 9.0;     // gap between buildings in a row
    double height_jitter_frac = 0.02;            // of (height_max - height_min)
};

// Procedural block-and-street city; pure function of (seed, params).
CityMap build_city_map(std::uint64_t seed, const CityMapParams& params);
CityMap flat_map(double extent, double height = 0.0, double cell_size = 10.0);

class ArrayGeometry {
public:
    // element_offsets: 3 x M, meters relative to the array center.
    ArrayGeometry(Eigen::Matrix3Xd element_offsets, double carrier_freq_hz);

    const Eigen::Matrix3Xd& element_offsets() const { return offsets_; }
    int num_elements() const { return static_cast<int>(offsets_.cols()); }
    double carrier_freq() const { return carrier_freq_; }
    double wave_number() const { return wave_number_; }

    ArrayGeometry rotated_z(double yaw_rad) const;

private:
    Eigen::Matrix3Xd offsets_;
    double carrier_freq_;
    double wave_number_;
};

ArrayGeometry uniform_circular_array(int m, double radius, double carrier_freq_hz);

struct Trajectory {
    Vector3d initial_position = Vector3d::Zero();  // at t = 0
    Vector3d velocity = Vector3d::Zero();
    double start_time = 0.0;       // t0, first processed window begins here
    double window_duration = 0.0;  // T
    int window_count = 0;          // I

    Trajectory() = default;
    Trajectory(Vector3d r0, Vector3d v, double t0, double T, int I);
};

Vector3d array_position_at(const Trajectory& traj, double t);
// Midpoint of window i (1-based): t0 + (i-1)T + T/2.
double window_midpoint(const Trajectory& traj, int i);

struct SourceSet {
    std::vector<Vector3d> positions;
    std::vector<double> pulse_duration;  // seconds, per source
    std::vector<double> pulse_power;     // watts, per source
    double mean_inter_pulse = 0.0;       // T_avg

    int count() const { return static_cast<int>(positions.size()); }
};

// The eleven benchmark transmitter positions used throughout the experiments.
std::vector<Vector3d> default_source_positions();

SourceSet make_source_set(std::vector<Vector3d> positions, double pulse_duration,
                          double pulse_power, double mean_inter_pulse);

// Stamps each source footprint into the map so every source sits exactly on
// the surface (|z - height_at| = 0).
CityMap stamp_sources(const CityMap& map, const SourceSet& sources, double half_w = 5.0,
                      double half_d = 10.0);

// n sources sampled uniformly over building cells (height > 0), z on the roof.
SourceSet sample_rooftop_sources(const CityMap& map, int n, std::uint64_t seed,
                                 double pulse_duration, double pulse_power,
                                 double mean_inter_pulse);

}  // namespace aoaloc

#endif
