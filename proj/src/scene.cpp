#include "aoaloc/scene.hpp"

#include <algorithm>
#include <cmath>

namespace aoaloc {

CityMap::CityMap(std::vector<double> heights, int nx, int ny, Vector2d origin, double cell_size)
    : heights_(std::move(heights)), nx_(nx), ny_(ny), origin_(origin), cell_size_(cell_size) {
    if (nx <= 0 || ny <= 0) throw std::invalid_argument("CityMap: empty grid");
    if (cell_size <= 0.0) throw std::invalid_argument("CityMap: cell_size must be > 0");
    if (heights_.size() != static_cast<std::size_t>(nx) * ny)
        throw std::invalid_argument("CityMap: grid size mismatch");
    for (double h : heights_)
        if (!std::isfinite(h) || h < 0.0)
            throw std::invalid_argument("CityMap: heights must be finite and >= 0");
}

double CityMap::height_at(const Vector2d& xy) const {
    int ix = static_cast<int>(std::floor((xy.x() - origin_.x()) / cell_size_));
    int iy = static_cast<int>(std::floor((xy.y() - origin_.y()) / cell_size_));
    ix = std::clamp(ix, 0, nx_ - 1);
    iy = std::clamp(iy, 0, ny_ - 1);
    return cell(ix, iy);
}

double CityMap::max_height() const { return *std::max_element(heights_.begin(), heights_.end()); }
double CityMap::min_height() const { return *std::min_element(heights_.begin(), heights_.end()); }

CityMap CityMap::stamped(const Vector2d& xy, double z, double half_w, double half_d) const {
    CityMap out = *this;
    int ix0 = static_cast<int>(std::floor((xy.x() - half_w - origin_.x()) / cell_size_));
    int ix1 = static_cast<int>(std::floor((xy.x() + half_w - origin_.x()) / cell_size_));
    int iy0 = static_cast<int>(std::floor((xy.y() - half_d - origin_.y()) / cell_size_));
    int iy1 = static_cast<int>(std::floor((xy.y() + half_d - origin_.y()) / cell_size_));
    ix0 = std::clamp(ix0, 0, nx_ - 1);
    ix1 = std::clamp(ix1, 0, nx_ - 1);
    iy0 = std::clamp(iy0, 0, ny_ - 1);
    iy1 = std::clamp(iy1, 0, ny_ - 1);
    for (int iy = iy0; iy <= iy1; ++iy)
        for (int ix = ix0; ix <= ix1; ++ix)
            out.heights_[static_cast<std::size_t>(iy) * nx_ + ix] = z;
    return out;
}

CityMap build_city_map(std::uint64_t seed, const CityMapParams& p) {
    if (p.extent <= 0.0) throw std::invalid_argument("build_city_map: extent must be > 0");
    if (p.height_min > p.height_max || p.height_min < 0.0 || p.height_max > 100.0)
        throw std::invalid_argument("build_city_map: height range must satisfy 0 <= min <= max <= 100");
    if (p.cell_size <= 0.0) throw std::invalid_argument("build_city_map: cell_size must be > 0");

    int n = std::max(1, static_cast<int>(std::ceil(p.extent / p.cell_size)));
    Vector2d origin(-0.5 * n * p.cell_size, -0.5 * n * p.cell_size);
    std::vector<double> grid(static_cast<std::size_t>(n) * n, 0.0);

    std::mt19937_64 rng(derive_seed(seed, 0xC17Full));
    std::uniform_real_distribution<double> street(p.street_min, p.street_max);
    std::uniform_real_distribution<double> alley(p.alley_min, p.alley_max);
    std::uniform_real_distribution<double> height(p.height_min, p.height_max);
    double jitter_amp = p.height_jitter_frac * (p.height_max - p.height_min);
    std::uniform_real_distribution<double> jitter(-jitter_amp, jitter_amp);

    auto fill_rect = [&](double x0, double y0, double w, double d, double h) {
        int ix0 = std::max(0, static_cast<int>(std::floor(x0 / p.cell_size)));
        int ix1 = std::min(n - 1, static_cast<int>(std::floor((x0 + w) / p.cell_size)));
        int iy0 = std::max(0, static_cast<int>(std::floor(y0 / p.cell_size)));
        int iy1 = std::min(n - 1, static_cast<int>(std::floor((y0 + d) / p.cell_size)));
        for (int iy = iy0; iy <= iy1; ++iy)
            for (int ix = ix0; ix <= ix1; ++ix)
                grid[static_cast<std::size_t>(iy) * n + ix] = h;
    };

    double side = n * p.cell_size;
    double y = street(rng);
    while (y + p.building_d <= side) {
        double x = alley(rng);
        while (x + p.building_w <= side) {
            double h = std::max(0.0, height(rng) + jitter(rng));
            fill_rect(x, y, p.building_w, p.building_d, h);
            x += p.building_w + alley(rng);
        }
        y += p.building_d + street(rng);
    }
    return CityMap(std::move(grid), n, n, origin, p.cell_size);
}

CityMap flat_map(double extent, double height, double cell_size) {
    int n = std::max(1, static_cast<int>(std::ceil(extent / cell_size)));
    std::vector<double> grid(static_cast<std::size_t>(n) * n, height);
    return CityMap(std::move(grid), n, n, Vector2d(-0.5 * n * cell_size, -0.5 * n * cell_size),
                   cell_size);
}

ArrayGeometry::ArrayGeometry(Eigen::Matrix3Xd element_offsets, double carrier_freq_hz)
    : offsets_(std::move(element_offsets)), carrier_freq_(carrier_freq_hz) {
    if (offsets_.cols() < 2) throw std::invalid_argument("ArrayGeometry: need at least 2 elements");
    if (carrier_freq_ <= 0.0) throw std::invalid_argument("ArrayGeometry: carrier frequency must be > 0");
    wave_number_ = 2.0 * kPi * carrier_freq_ / kSpeedOfLight;
}

ArrayGeometry ArrayGeometry::rotated_z(double yaw_rad) const {
    Matrix3d rot = Eigen::AngleAxisd(yaw_rad, Vector3d::UnitZ()).toRotationMatrix();
    return ArrayGeometry(rot * offsets_, carrier_freq_);
}

ArrayGeometry uniform_circular_array(int m, double radius, double carrier_freq_hz) {
    if (m < 2) throw std::invalid_argument("uniform_circular_array: need at least 2 elements");
    Eigen::Matrix3Xd d(3, m);
    for (int k = 0; k < m; ++k) {
        double a = 2.0 * kPi * k / m;
        d.col(k) = Vector3d(radius * std::cos(a), radius * std::sin(a), 0.0);
    }
    return ArrayGeometry(d, carrier_freq_hz);
}

Trajectory::Trajectory(Vector3d r0, Vector3d v, double t0, double T, int I)
    : initial_position(std::move(r0)), velocity(std::move(v)), start_time(t0),
      window_duration(T), window_count(I) {
    if (T <= 0.0) throw std::invalid_argument("Trajectory: window duration must be > 0");
    if (I < 1) throw std::invalid_argument("Trajectory: window count must be >= 1");
}

Vector3d array_position_at(const Trajectory& traj, double t) {
    if (t < 0.0) throw std::invalid_argument("array_position_at: t must be >= 0");
    return traj.initial_position + traj.velocity * t;
}

double window_midpoint(const Trajectory& traj, int i) {
    if (i < 1 || i > traj.window_count) throw std::out_of_range("window_midpoint: index out of range");
    return traj.start_time + (i - 1) * traj.window_duration + traj.window_duration / 2.0;
}

std::vector<Vector3d> default_source_positions() {
    return {
        {0.0, 50.0, 4.46},       {-13.0, -233.0, 3.47},   {66.0, -85.0, 3.2},
        {53.33, -611.87, 2.85},  {-240.22, 357.43, 10.69}, {600.0, -300.0, 4.1},
        {-300.0, -100.0, 5.98},  {520.0, 159.17, 20.46},  {-250.0, -550.0, 10.27},
        {200.0, -300.0, 13.71},  {406.0, -36.0, 4.09},
    };
}

SourceSet make_source_set(std::vector<Vector3d> positions, double pulse_duration,
                          double pulse_power, double mean_inter_pulse) {
    if (mean_inter_pulse <= 0.0 || pulse_duration <= 0.0)
        throw std::invalid_argument("make_source_set: durations must be > 0");
    SourceSet s;
    s.pulse_duration.assign(positions.size(), pulse_duration);
    s.pulse_power.assign(positions.size(), pulse_power);
    s.positions = std::move(positions);
    s.mean_inter_pulse = mean_inter_pulse;
    return s;
}

CityMap stamp_sources(const CityMap& map, const SourceSet& sources, double half_w, double half_d) {
    CityMap out = map;
    for (const auto& r : sources.positions)
        out = out.stamped(r.head<2>(), r.z(), half_w, half_d);
    return out;
}

SourceSet sample_rooftop_sources(const CityMap& map, int n, std::uint64_t seed,
                                 double pulse_duration, double pulse_power,
                                 double mean_inter_pulse) {
    std::vector<std::pair<int, int>> roofs;
    for (int iy = 0; iy < map.ny(); ++iy)
        for (int ix = 0; ix < map.nx(); ++ix)
            if (map.cell(ix, iy) > 0.0) roofs.emplace_back(ix, iy);
    if (roofs.empty()) throw std::runtime_error("sample_rooftop_sources: map has no buildings");

    std::mt19937_64 rng(derive_seed(seed, 0x50FAull));
    std::uniform_int_distribution<std::size_t> pick(0, roofs.size() - 1);
    std::vector<Vector3d> pos;
    pos.reserve(n);
    for (int k = 0; k < n; ++k) {
        auto [ix, iy] = roofs[pick(rng)];
        double x = map.origin().x() + (ix + 0.5) * map.cell_size();
        double y = map.origin().y() + (iy + 0.5) * map.cell_size();
        pos.emplace_back(x, y, map.cell(ix, iy));
    }
    return make_source_set(std::move(pos), pulse_duration, pulse_power, mean_inter_pulse);
}

}  // namespace aoaloc
