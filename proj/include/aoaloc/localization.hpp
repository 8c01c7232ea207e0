#ifndef AOALOC_LOCALIZATION_HPP
#define AOALOC_LOCALIZATION_HPP

#include <map>
#include <optional>
#include <vector>

#include "aoaloc/common.hpp"
#include "aoaloc/manifold.hpp"
#include "aoaloc/scene.hpp"

namespace aoaloc {

// Squared distance from w to the line through r along unit u.
double line_distance_sq(const Vector3d& w, const Vector3d& r, const Vector3d& u);

// Running sums of the per-anchor blocks of I3 - u u^T.
struct AnchorSummary {
    Matrix2d c = Matrix2d::Zero();
    Vector2d h = Vector2d::Zero();
    Vector2d b = Vector2d::Zero();
    int anchor_count = 0;
};

AnchorSummary accumulate_anchor(AnchorSummary summary, const Vector3d& r, const Vector3d& u);

struct GpConfig {
    double eps_loc = 1e-2;
    int max_iters = 15;
    double z_init = 0.0;
};

struct GpSolution {
    Vector3d position = Vector3d::Zero();
    int iterations = 0;
    bool diverged = false;  // hit max iterations with a step > 10 eps_loc
};

// Alternates the planar closed form w' = C^+(h - b z) with the surface
// projection z = M(w') until the combined step is below eps_loc.
GpSolution gp_solve(const AnchorSummary& summary, const CityMap& map, const GpConfig& cfg = {});

struct SourceTrack {
    int id = 0;
    AnchorSummary summary;
    std::optional<Vector3d> position;  // pending until the second anchor
    Vector3d last_dir = Vector3d::Zero();
    int hist = 0;
    double last_seen = 0.0;
    double reliability = 0.0;
};

struct TrackerConfig {
    double xi = std::cos(deg2rad(10.0));  // direction-assignment threshold
    double t_death = 0.3;                 // seconds
    GpConfig gp;
};

class TrackerState {
public:
    explicit TrackerState(TrackerConfig cfg) : cfg_(cfg) {}

    // Directions to located tracks from r plus the last direction of pending
    // tracks; feeds both the manifold initializer and the assignment step.
    DirectionBank direction_bank(const Vector3d& r) const;

    // One processed window: assign each direction to the best-matching track
    // (>= xi) or open a pending track; re-solve updated tracks; purge idle
    // tracks; reset counters at every t_death epoch.
    void assign_and_update(const std::vector<Vector3d>& dirs, const Vector3d& r, double t,
                           const CityMap& map);

    const std::map<int, SourceTrack>& tracks() const { return tracks_; }
    int processed_windows() const { return processed_windows_; }
    const TrackerConfig& config() const { return cfg_; }

private:
    TrackerConfig cfg_;
    std::map<int, SourceTrack> tracks_;
    int next_id_ = 1;
    int processed_windows_ = 0;  // I_p, resets each epoch
    double epoch_origin_ = std::numeric_limits<double>::quiet_NaN();
    int last_epoch_ = 0;
};

struct WorstCaseRmse {
    double cb_norm_sq = 0.0;  // two-anchor closed form at (theta, dphi)
    double cb_norm_sq_max = 0.0;  // tan^2 theta, the maximum over dphi
    double e_max = 0.0;           // dz_max sqrt(max + 1)
    bool unbounded = false;       // theta at or beyond pi/2
};

// Two-anchor worst-case localization error under a height budget dz_max.
WorstCaseRmse worst_case_rmse(double theta, double dphi, double dz_max);

// The printed two-anchor closed form of ||C^+ b||^2 alone.
double cb_norm_sq_closed_form(double theta, double dphi);

}  // namespace aoaloc

#endif
