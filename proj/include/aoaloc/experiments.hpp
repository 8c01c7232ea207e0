#ifndef AOALOC_EXPERIMENTS_HPP
#define AOALOC_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include "aoaloc/pipeline.hpp"

namespace aoaloc {

struct HeatmapConfig {
    double x_min = -500.0, x_max = 500.0;
    double y_min = -500.0, y_max = 500.0;
    double step = 100.0;  // meters between probe positions
};

struct HeatmapResult {
    MatrixXd rmse;  // [iy][ix], NaN where the source was never localized
    std::vector<double> xs, ys;
};

// Places a single source at each grid cell (on the map surface), runs the
// pipeline, records the final-window localization RMSE. Cells run in
// parallel; per-cell seeds keep the sweep deterministic.
HeatmapResult heatmap_sweep(const RunConfig& base, const HeatmapConfig& hm);

struct DetectorComparisonConfig {
    std::vector<double> snr_grid_db = {0.0, 4.0, 8.0, 12.0, 16.0, 20.0};
    int configurations = 4;       // random source layouts per SNR point
    int noise_realizations = 3;   // per layout
    int windows = 2;
    int num_sources = 11;
    double range_min = 500.0, range_max = 2000.0;
    double theta_min = deg2rad(130.0), theta_max = deg2rad(180.0);
    int binary_n = 2;  // the n of the binary n/M rule
};

struct DetectorComparisonRow {
    std::string detector;
    double snr_star_db = 0.0;
    double n_in_sig = 0.0;   // mean signal-bearing columns per window
    double n_out = 0.0;      // mean matched output size
    double p_false = 0.0;    // noise-only retained / retained
};

// False-detection comparison of the proposed detector against the binary,
// GLRT and SLD rules at matched output size.
std::vector<DetectorComparisonRow> compare_detectors(const RunConfig& base,
                                                     const DetectorComparisonConfig& cmp);

std::string detector_comparison_csv(const std::vector<DetectorComparisonRow>& rows);

struct BoundRow {
    double theta = 0.0;
    double grid_max_cb = 0.0;  // numeric max of the closed form over dphi
    double tan_sq = 0.0;
    double e_max = 0.0;
};

// Sweeps the two-anchor worst-case bound over elevation; dphi scanned at the
// given resolution.
std::vector<BoundRow> analyze_bound(const std::vector<double>& thetas, double dz_max,
                                    double dphi_step = 1e-3);
std::string bound_csv(const std::vector<BoundRow>& rows);

}  // namespace aoaloc

#endif
