#ifndef AOALOC_PIPELINE_HPP
#define AOALOC_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "aoaloc/energy_detector.hpp"
#include "aoaloc/epsilon_model.hpp"
#include "aoaloc/localization.hpp"
#include "aoaloc/refiner.hpp"
#include "aoaloc/rough_aoa.hpp"
#include "aoaloc/scene.hpp"
#include "aoaloc/signal.hpp"

namespace aoaloc {

struct SceneConfig {
    enum class Kind { City, Flat } kind = Kind::City;
    double extent = 2000.0;
    double cell_size = 1.0;
    double building_w = 10.0, building_d = 20.0;
    double height_min = 3.5, height_max = 20.0;
    double flat_height = 0.0;
    std::uint64_t map_seed = 7;

    enum class Sources { Table, Rooftops, Explicit } source_mode = Sources::Table;
    int num_sources = 11;  // rooftop sampling
    std::vector<Vector3d> explicit_sources;
    bool stamp_sources = true;

    double pulse_duration = 3e-6;
    double pulse_power = 3.0;
    double t_avg = 3e-3;
};

struct RunConfig {
    std::uint64_t seed = 1;
    int trials = 1;
    int windows = 10;
    double snr_star_db = 20.0;

    SceneConfig scene;

    int array_elements = 6;
    double array_radius = 0.2;
    double carrier_freq = 0.5e9;
    double sample_rate = 10e6;

    Vector3d initial_position{27.0, 11.0, 500.0};
    Vector3d velocity{44.0, 33.0, 0.0};
    double t0 = 0.1;
    double window_duration = 0.03;

    DetectorConfig detector;

    // Elevation scope covers the lower hemisphere: the receiver flies above
    // the sources, and a planar array cannot separate theta from pi - theta.
    double theta_min = kPi / 2.0, theta_max = kPi, theta_step = deg2rad(1.0);
    double phi_step = deg2rad(1.0);

    RefinerConfig refiner;
    int zoom_levels = 2;
    double zoom_factor = 10.0;

    TrackerConfig tracker;

    bool imperfect_location = false;   // delta_Loc
    bool imperfect_direction = false;  // delta_Dir
    bool imperfect_map = false;        // delta_Map
    double location_error_sd = 5.0;
    double direction_error_sd = deg2rad(5.0);

    double angle_match_tol = deg2rad(5.0);
    double position_match_tol = 50.0;
    double min_detection_frac = 0.5;  // share of the most-detected source

    bool music_only = false;      // feed rough AOAs straight to the tracker
    bool detector_only = false;   // stop after the energy detector
    std::string epsilon_model_path;  // empty: compiled-in default location
    std::string output_dir;          // empty: no file artifacts

    AngleGrid make_grid() const;
    void validate() const;
};

RunConfig config_from_json_text(const std::string& text);
RunConfig config_from_json_file(const std::string& path);
std::string config_to_json_text(const RunConfig& cfg);

struct BuiltScene {
    CityMap map;          // truth map (stamped)
    CityMap loc_map;      // map handed to the localizer (flat when delta_Map)
    SourceSet sources;
    ArrayGeometry geometry;
    Trajectory trajectory;
    double noise_var = 0.0;
};

BuiltScene build_scene(const RunConfig& cfg);

struct DetectorWindowStats {
    int trial = 0, window = 0;
    int kept = 0, iterations = 0;
    double sigma_est = 0.0, sigma_true = 0.0;
    double gamma_est_db = 0.0, gamma_true_db = 0.0;
};

struct MetricsReport {
    int windows = 0, trials = 0;
    std::vector<double> rough_aoa_count;    // per window, trial-averaged
    std::vector<double> refined_aoa_count;  // per window, trial-averaged
    // RMSE series in radians / meters; NaN where no matches exist.
    std::vector<double> elev_rmse, azim_rmse, loc_rmse;
    std::vector<int> matched, missed, spurious;  // per window, summed over trials
    std::vector<double> mean_reliability;        // per true source, final window
    std::vector<int> reliable_tracks_per_trial;  // tracks with reliability > 0.5
    int max_rough_per_window = 0;
    std::vector<DetectorWindowStats> detector_stats;
    double runtime_seconds = 0.0;

    std::string to_csv() const;
};

MetricsReport run_pipeline(const RunConfig& cfg);

// Greedy nearest-angle matching within tol (great-circle); azimuth errors
// wrapped to (-pi, pi]. Returns per-pair (elev_err, azim_err) and the index
// pairs (estimate, truth).
struct AoaMatch {
    std::vector<std::pair<int, int>> pairs;
    std::vector<double> elev_err, azim_err;
};
AoaMatch match_aoas(const std::vector<std::pair<double, double>>& estimates,
                    const std::vector<std::pair<double, double>>& truth, double tol);

struct PositionMatch {
    std::vector<std::pair<int, int>> pairs;  // (estimate, truth)
    std::vector<double> err;
    int spurious = 0, missed = 0;
};
PositionMatch match_positions(const std::vector<Vector3d>& estimates,
                              const std::vector<Vector3d>& truth, double radius);

}  // namespace aoaloc

#endif
