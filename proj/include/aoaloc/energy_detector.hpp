#ifndef AOALOC_ENERGY_DETECTOR_HPP
#define AOALOC_ENERGY_DETECTOR_HPP

#include <optional>
#include <vector>

#include "aoaloc/common.hpp"

namespace aoaloc {

struct DetectorConfig {
    double p0 = 0.001;    // false-detection probability for the threshold
    int diff_max = 20;    // max column gap treated as the same pulse
    int l_adj = 5;        // min run support: runs of >= l_adj - 1 ones survive
    int max_iters = 10;

    void validate() const;
};

struct DetectionResult {
    std::vector<int> kept_indices;  // 0-based column indices, strictly increasing
    MatrixXcd filtered;             // M x G_MRS
    double noise_var = 0.0;         // sigma_hat^2
    double inst_snr = 0.0;          // gamma_hat, clamped at 0 for reporting
    double inst_snr_raw = 0.0;      // unclamped estimate
    int iterations = 0;
    bool noise_update_skipped = false;  // all columns retained at some iteration
};

// V_th = sqrt(-ln(p0) * noise_var).
double threshold_from_p0(double p0, double noise_var);

// Columns whose largest element modulus exceeds vth.
std::vector<int> columns_above_threshold(const MatrixXcd& block, double vth);

// Keeps the members of adjacency runs of length >= l_adj - 1 in the binary
// gap-vector (gap <= diff_max), plus the element directly below each run.
std::vector<int> run_length_filter(const std::vector<int>& indices, int diff_max, int l_adj);

// From a binary adjacency vector over consecutive index pairs, positions kept
// by the run rule above. Shared by the detector and the phase smoother.
std::vector<int> positions_in_qualifying_runs(const std::vector<char>& adjacent, int l_adj);

// Algorithm: iterate threshold -> column pick -> run filter -> noise
// re-estimate on the complement, until the kept set repeats or max_iters.
DetectionResult detect(const MatrixXcd& block, const DetectorConfig& cfg,
                       std::optional<double> initial_noise_var = std::nullopt);

// Per-column reductions that let the iteration run in O(G) per pass; the
// result's `filtered` stays empty.
struct ColumnStats {
    VectorXd max_abs;  // per-column max element modulus
    VectorXd energy;   // per-column squared norm
    int rows = 0;
};
ColumnStats column_stats(const MatrixXcd& block);
DetectionResult detect_from_stats(const ColumnStats& stats, const DetectorConfig& cfg,
                                  std::optional<double> initial_noise_var = std::nullopt);

// Calibrates p0 (bisection on its logarithm) so the detector's output size
// is as close to target as achievable; returns the nearest-size result.
DetectionResult detect_matched_size(const ColumnStats& stats, const DetectorConfig& base,
                                    int target);

}  // namespace aoaloc

#endif
