#ifndef AOALOC_EPSILON_MODEL_HPP
#define AOALOC_EPSILON_MODEL_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include "aoaloc/common.hpp"
#include "aoaloc/scene.hpp"

namespace aoaloc {

// Residual-budget model for the sparse recovery stage. For each dictionary
// size N in the calibrated range, log10 f is a degree-4 polynomial in the
// SNR expressed in dB; outside the range f extends by the linear rules below.
class EpsilonModel {
public:
    struct Fit {
        std::array<double, 5> coeffs{};  // P0..P4, log10 f = sum_j Pj gdb^j
        double residual_rms = 0.0;       // fit residual on the calibration grid
    };

    EpsilonModel() = default;
    EpsilonModel(std::map<int, Fit> fits, double gamma_db_min, double gamma_db_max,
                 std::string metadata);

    // f(N, gamma) >= 0; N = 1 and N beyond the table use the extrapolation
    // rules; gamma is clamped to the calibrated dB range.
    double f(int n, double gamma) const;

    // sqrt(f(N, gamma) M E_avg + M sigma_v^2).
    double epsilon_opt(int n, double gamma, int m, double e_avg, double noise_var) const;

    int n_min() const { return fits_.begin()->first; }
    int n_max() const { return fits_.rbegin()->first; }
    double gamma_db_min() const { return gamma_db_min_; }
    double gamma_db_max() const { return gamma_db_max_; }
    const std::map<int, Fit>& fits() const { return fits_; }
    const std::string& metadata() const { return metadata_; }
    bool empty() const { return fits_.empty(); }

    void save_csv(const std::string& path) const;
    static EpsilonModel load_csv(const std::string& path);

private:
    double f_tabulated(int n, double gamma_db) const;

    std::map<int, Fit> fits_;
    double gamma_db_min_ = 2.0, gamma_db_max_ = 21.0;
    std::string metadata_;
};

struct CalibrationConfig {
    std::vector<int> n_range = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    std::vector<double> gamma_grid_db;  // defaults to 2..21 dB step 1
    int trials = 50;
    int columns = 1000;             // T, signal vectors per trial
    int noise_realizations = 10;
    int sweep_points = 28;          // log-spaced f candidates (plus f = 0)
    double sweep_f_min = 1e-6, sweep_f_max = 4.0;
    int l_max = 3;
    std::uint64_t seed = 2024;

    CalibrationConfig() {
        for (int g = 2; g <= 21; ++g) gamma_grid_db.push_back(static_cast<double>(g));
    }
};

struct CalibrationReport {
    EpsilonModel model;
    // f averages per (N, gamma) after outlier removal; rows follow n_range.
    MatrixXd f_grid;
    std::vector<int> n_range;
    std::vector<double> gamma_grid_db;
};

// Synthetic-trial calibration of f: random manifolds and sparse signal
// matrices, an epsilon sweep per noise realization, outlier-trimmed averages,
// then a per-N polynomial fit of log10 f against gamma_dB.
CalibrationReport calibrate_f(const ArrayGeometry& geom, const CalibrationConfig& cfg);

}  // namespace aoaloc

#endif
