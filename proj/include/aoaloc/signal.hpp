#ifndef AOALOC_SIGNAL_HPP
#define AOALOC_SIGNAL_HPP

#include <functional>
#include <optional>

#include "aoaloc/common.hpp"
#include "aoaloc/scene.hpp"

namespace aoaloc {

// [sin(t)cos(p), sin(t)sin(p), cos(t)]; elevation from the z-axis.
Vector3d unit_direction(double theta, double phi);
// Inverse: (theta, phi) of a direction vector (not necessarily unit).
std::pair<double, double> direction_angles(const Vector3d& dir);

// Element m carries phase K * <D_m, u(theta, phi)>; all entries unit modulus.
VectorXcd steering_vector(const ArrayGeometry& geom, double theta, double phi);
VectorXcd steering_for_direction(const ArrayGeometry& geom, const Vector3d& unit_dir);

using GainFn = std::function<double(double, double)>;

// Complex path loss + antenna gain: |G/(sqrt(4 pi) R)| at phase -K R.
cplx path_gain(double range_m, double theta, double phi, const GainFn& gain, double wave_number);

struct PulseTrain {
    std::vector<double> start_times;  // seconds, sorted
    double pulse_duration = 0.0;
    double amplitude = 1.0;  // peak scale of the half-sine-squared envelope

    // sqrt(6) * sin(2 pi t / T_p) on [0, T_p), zero outside; mean power of the
    // default shape is 3 W.
    double shape(double t) const {
        if (t < 0.0 || t >= pulse_duration) return 0.0;
        return amplitude * std::sin(2.0 * kPi * t / pulse_duration);
    }
    // Superposed envelope value of the whole train at time t.
    double value(double t) const;
};

// Poisson arrivals with rate 1/t_avg over [0, span).
PulseTrain sample_pulse_train(double t_avg, double span, std::uint64_t seed,
                              double pulse_duration = 3e-6, double amplitude = std::sqrt(6.0));

struct NoiseModel {
    double variance = 0.0;  // sigma_v^2, watts
    std::uint64_t seed = 0;
};

struct ArrayPose {
    Vector3d position = Vector3d::Zero();
    double yaw = 0.0;
};

struct WindowCapture {
    MatrixXcd samples;       // M x G
    int window_index = 0;    // 1-based
    double midpoint_time = 0.0;
    ArrayPose pose;          // as reported to the processing chain
};

// Per-window ground truth kept alongside the capture when requested.
struct WindowTruth {
    MatrixXcd noise_free;                 // X, M x G
    MatrixXcd noise;                      // V, M x G
    std::vector<std::pair<double, double>> aoas;  // midpoint (theta, phi) per source
    std::vector<char> column_has_signal;          // size G
};

struct SynthConfig {
    double sample_rate = 10e6;     // f_s
    GainFn antenna_gain;           // defaults to isotropic
    bool freeze_beta_at_midpoint = false;
    // Imperfection switches (Section on robustness): position error reported
    // downstream, yaw error applied to the physical array.
    bool position_error = false;
    double position_error_sd = 5.0;  // meters
    bool yaw_error = false;
    double yaw_error_sd = deg2rad(5.0);
    std::uint64_t master_seed = 1;
};

class WindowSynthesizer {
public:
    WindowSynthesizer(ArrayGeometry geom, Trajectory traj, SourceSet sources, NoiseModel noise,
                      SynthConfig cfg);

    // Y^(i) = sum_n a(theta_n, phi_n) s_n^T + V, AOAs frozen at the window
    // midpoint, beta and delay evaluated per sample.
    WindowCapture synthesize(int window_index, WindowTruth* truth = nullptr) const;

    int samples_per_window() const { return g_; }
    const SourceSet& sources() const { return sources_; }
    const Trajectory& trajectory() const { return traj_; }
    const ArrayGeometry& geometry() const { return geom_; }
    double noise_variance() const { return noise_.variance; }
    // Convenience for metrics: true pose (no reporting error) at time t.
    Vector3d true_position(double t) const { return array_position_at(traj_, t); }

private:
    ArrayGeometry geom_;
    Trajectory traj_;
    SourceSet sources_;
    NoiseModel noise_;
    SynthConfig cfg_;
    int g_ = 0;
    std::vector<PulseTrain> trains_;  // one per source, spanning the whole run
};

// Inverts the SNR* definition for the noise floor:
// sigma_v^2 = sum_n P_n / (4 pi R_n^2) / 10^(snr_db/10), ranges from r0.
double noise_variance_for_snr_star(const SourceSet& sources, const Vector3d& r0,
                                   double snr_star_db);
// SNR* = sum_n P_n / (4 pi R_n^2 sigma_v^2).
double snr_star(const SourceSet& sources, const Vector3d& r0, double noise_var);

}  // namespace aoaloc

#endif
