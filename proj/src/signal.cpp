#include "aoaloc/signal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace aoaloc {

Vector3d unit_direction(double theta, double phi) {
    if (theta < 0.0 || theta > kPi) throw std::invalid_argument("unit_direction: theta outside [0, pi]");
    if (phi < 0.0 || phi > 2.0 * kPi) throw std::invalid_argument("unit_direction: phi outside [0, 2pi]");
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

std::pair<double, double> direction_angles(const Vector3d& dir) {
    Vector3d u = dir.normalized();
    double theta = std::acos(std::clamp(u.z(), -1.0, 1.0));
    double phi = wrap_two_pi(std::atan2(u.y(), u.x()));
    return {theta, phi};
}

VectorXcd steering_for_direction(const ArrayGeometry& geom, const Vector3d& unit_dir) {
    VectorXd phase = geom.wave_number() * (geom.element_offsets().transpose() * unit_dir);
    VectorXcd a(phase.size());
    for (Eigen::Index m = 0; m < phase.size(); ++m)
        a(m) = std::polar(1.0, phase(m));
    return a;
}

VectorXcd steering_vector(const ArrayGeometry& geom, double theta, double phi) {
    return steering_for_direction(geom, unit_direction(theta, phi));
}

cplx path_gain(double range_m, double theta, double phi, const GainFn& gain, double wave_number) {
    if (range_m <= 0.0) throw std::domain_error("path_gain: range must be > 0");
    double g = gain ? gain(theta, phi) : 1.0;
    double mag = g / (std::sqrt(4.0 * kPi) * range_m);
    return std::polar(mag, -wave_number * range_m);
}

double PulseTrain::value(double t) const {
    double v = 0.0;
    // start_times sorted; only pulses covering t contribute.
    auto it = std::upper_bound(start_times.begin(), start_times.end(), t);
    while (it != start_times.begin()) {
        --it;
        if (t - *it >= pulse_duration) break;
        v += shape(t - *it);
    }
    return v;
}

PulseTrain sample_pulse_train(double t_avg, double span, std::uint64_t seed,
                              double pulse_duration, double amplitude) {
    if (t_avg <= 0.0) throw std::invalid_argument("sample_pulse_train: t_avg must be > 0");
    PulseTrain train;
    train.pulse_duration = pulse_duration;
    train.amplitude = amplitude;
    if (span <= 0.0) return train;
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(1.0 / t_avg);
    double t = gap(rng);
    while (t < span) {
        train.start_times.push_back(t);
        t += gap(rng);
    }
    return train;
}

WindowSynthesizer::WindowSynthesizer(ArrayGeometry geom, Trajectory traj, SourceSet sources,
                                     NoiseModel noise, SynthConfig cfg)
    : geom_(std::move(geom)), traj_(std::move(traj)), sources_(std::move(sources)),
      noise_(noise), cfg_(std::move(cfg)) {
    if (cfg_.sample_rate <= 0.0) throw std::invalid_argument("WindowSynthesizer: sample rate must be > 0");
    g_ = static_cast<int>(std::floor(traj_.window_duration * cfg_.sample_rate));
    if (g_ < 1) throw std::invalid_argument("WindowSynthesizer: window shorter than one sample");

    // One train per source over the full run, seeded by the source position:
    // pulse times are a property of the source, independent of the noise
    // stream and of which other sources are simulated alongside it.
    double span = traj_.start_time + traj_.window_count * traj_.window_duration + 1e-3;
    trains_.reserve(sources_.count());
    for (int n = 0; n < sources_.count(); ++n) {
        const Vector3d& p = sources_.positions[n];
        std::uint64_t id = derive_seed(std::bit_cast<std::uint64_t>(p.x()),
                                       std::bit_cast<std::uint64_t>(p.y()),
                                       std::bit_cast<std::uint64_t>(p.z()));
        trains_.push_back(sample_pulse_train(sources_.mean_inter_pulse, span,
                                             derive_seed(cfg_.master_seed, 0x9D5Eull, id),
                                             sources_.pulse_duration[n], std::sqrt(6.0)));
    }
}

WindowCapture WindowSynthesizer::synthesize(int window_index, WindowTruth* truth) const {
    if (window_index < 1 || window_index > traj_.window_count)
        throw std::out_of_range("synthesize: window index out of range");

    const double ts = 1.0 / cfg_.sample_rate;
    const double t_start = traj_.start_time + (window_index - 1) * traj_.window_duration;
    const double t_mid = window_midpoint(traj_, window_index);
    const int m = geom_.num_elements();
    const double K = geom_.wave_number();

    ArrayGeometry phys = geom_;
    if (cfg_.yaw_error) {
        auto rng = make_rng(cfg_.master_seed, 0xD1Bull, window_index);
        std::normal_distribution<double> n(0.0, cfg_.yaw_error_sd);
        phys = geom_.rotated_z(n(rng));
    }

    MatrixXcd x = MatrixXcd::Zero(m, g_);
    std::vector<char> has_signal(g_, 0);
    std::vector<std::pair<double, double>> aoas;
    const Vector3d r_mid = array_position_at(traj_, t_mid);

    for (int n = 0; n < sources_.count(); ++n) {
        const Vector3d& src = sources_.positions[n];
        auto [theta, phi] = direction_angles(src - r_mid);
        aoas.emplace_back(theta, phi);
        VectorXcd a = steering_for_direction(phys, unit_direction(theta, phi));

        const PulseTrain& train = trains_[n];
        const double tp = sources_.pulse_duration[n];
        // Received pulse j occupies roughly [t_j + tau, t_j + tau + tp].
        const double tau_hi = (src - array_position_at(traj_, t_start)).norm() / kSpeedOfLight + 1e-5;
        auto lo = std::lower_bound(train.start_times.begin(), train.start_times.end(),
                                   t_start - tp - tau_hi);
        auto hi = std::upper_bound(train.start_times.begin(), train.start_times.end(),
                                   t_start + traj_.window_duration);

        cplx beta_mid;
        if (cfg_.freeze_beta_at_midpoint) {
            double r = (r_mid - src).norm();
            beta_mid = path_gain(r, theta, phi, cfg_.antenna_gain, K);
        }

        for (auto it = lo; it != hi; ++it) {
            double tj = *it;
            // Sample index range covering this pulse, with slack for delay.
            int g0 = static_cast<int>(std::floor((tj - t_start) / ts)) - 2;
            int g1 = static_cast<int>(std::ceil((tj + tp + tau_hi - t_start) / ts)) + 2;
            g0 = std::max(g0, 1);
            g1 = std::min(g1, g_);
            for (int g = g0; g <= g1; ++g) {
                double tg = t_start + g * ts;
                Vector3d rc = array_position_at(traj_, tg);
                double range = (rc - src).norm();
                double tau = range / kSpeedOfLight;
                double env = train.shape(tg - tau - tj);
                if (env == 0.0) continue;
                cplx beta = cfg_.freeze_beta_at_midpoint
                                ? beta_mid
                                : path_gain(range, theta, phi, cfg_.antenna_gain, K);
                cplx s = beta * env;
                x.col(g - 1) += a * s;
                has_signal[g - 1] = 1;
            }
        }
    }

    MatrixXcd v = MatrixXcd::Zero(m, g_);
    if (noise_.variance > 0.0) {
        auto rng = make_rng(noise_.seed, 0x401Eull, window_index);
        std::normal_distribution<double> nd(0.0, std::sqrt(noise_.variance / 2.0));
        for (int g = 0; g < g_; ++g)
            for (int k = 0; k < m; ++k)
                v(k, g) = cplx(nd(rng), nd(rng));
    }

    WindowCapture cap;
    cap.samples = x + v;
    cap.window_index = window_index;
    cap.midpoint_time = t_mid;
    cap.pose.position = r_mid;
    cap.pose.yaw = 0.0;
    if (cfg_.position_error) {
        auto rng = make_rng(cfg_.master_seed, 0x70CEull, window_index);
        std::normal_distribution<double> n(0.0, cfg_.position_error_sd);
        cap.pose.position += Vector3d(n(rng), n(rng), n(rng));
    }

    if (truth) {
        truth->noise_free = std::move(x);
        truth->noise = std::move(v);
        truth->aoas = std::move(aoas);
        truth->column_has_signal = std::move(has_signal);
    }
    return cap;
}

double noise_variance_for_snr_star(const SourceSet& sources, const Vector3d& r0,
                                   double snr_star_db) {
    double num = 0.0;
    for (int n = 0; n < sources.count(); ++n) {
        double r2 = (r0 - sources.positions[n]).squaredNorm();
        if (r2 <= 0.0) throw std::domain_error("noise_variance_for_snr_star: source at receiver");
        num += sources.pulse_power[n] / (4.0 * kPi * r2);
    }
    return num / std::pow(10.0, snr_star_db / 10.0);
}

double snr_star(const SourceSet& sources, const Vector3d& r0, double noise_var) {
    double s = 0.0;
    for (int n = 0; n < sources.count(); ++n) {
        double r2 = (r0 - sources.positions[n]).squaredNorm();
        if (r2 <= 0.0) throw std::domain_error("snr_star: source at receiver");
        s += sources.pulse_power[n] / (4.0 * kPi * r2 * noise_var);
    }
    return s;
}

}  // namespace aoaloc
