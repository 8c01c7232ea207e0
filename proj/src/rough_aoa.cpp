#include "aoaloc/rough_aoa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aoaloc/signal.hpp"

namespace aoaloc {

AngleGrid AngleGrid::regular(double theta_min, double theta_max, double theta_step,
                             double phi_min, double phi_max, double phi_step) {
    AngleGrid g;
    for (double t = theta_min; t <= theta_max + 1e-12; t += theta_step)
        g.elevations.push_back(std::min(t, kPi));
    for (double p = phi_min; p < phi_max - 1e-12; p += phi_step) g.azimuths.push_back(p);
    g.validate();
    return g;
}

AngleGrid AngleGrid::full_sphere(double step_rad) {
    return regular(0.0, kPi, step_rad, 0.0, 2.0 * kPi, step_rad);
}

void AngleGrid::validate() const {
    if (elevations.empty() || azimuths.empty())
        throw std::invalid_argument("AngleGrid: empty axis");
    for (std::size_t i = 0; i < elevations.size(); ++i) {
        if (elevations[i] < 0.0 || elevations[i] > kPi)
            throw std::invalid_argument("AngleGrid: elevation outside [0, pi]");
        if (i > 0 && elevations[i] <= elevations[i - 1])
            throw std::invalid_argument("AngleGrid: elevations not strictly increasing");
    }
    for (std::size_t i = 0; i < azimuths.size(); ++i) {
        if (azimuths[i] < 0.0 || azimuths[i] >= 2.0 * kPi)
            throw std::invalid_argument("AngleGrid: azimuth outside [0, 2pi)");
        if (i > 0 && azimuths[i] <= azimuths[i - 1])
            throw std::invalid_argument("AngleGrid: azimuths not strictly increasing");
    }
}

bool AngleGrid::azimuth_wraps() const {
    if (azimuths.size() < 3) return false;
    double step = azimuths[1] - azimuths[0];
    double gap = 2.0 * kPi - (azimuths.back() - azimuths.front());
    return std::fabs(gap - step) < 1e-9;
}

MatrixXcd sample_covariance(const MatrixXcd& filtered) {
    if (filtered.cols() < 1)
        throw std::runtime_error("sample_covariance: no detections this window");
    MatrixXcd r = (filtered * filtered.adjoint()) / static_cast<double>(filtered.cols());
    return (r + r.adjoint()) / 2.0;
}

VectorXd scm_eigenvalues_desc(const MatrixXcd& scm) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(scm, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("scm_eigenvalues_desc: EVD failed");
    return es.eigenvalues().reverse();
}

int mdl_order(const VectorXd& eig_desc, Eigen::Index snapshots) {
    const int m = static_cast<int>(eig_desc.size());
    if (m < 1) throw std::invalid_argument("mdl_order: empty eigenvalue list");
    if (snapshots < 1) throw std::invalid_argument("mdl_order: snapshots must be >= 1");
    constexpr double kFloor = 1e-30;  // keeps exactly rank-deficient SCMs finite

    double best = std::numeric_limits<double>::infinity();
    int best_m = 0;
    const double g = static_cast<double>(snapshots);
    for (int k = 0; k < m; ++k) {
        double log_geo = 0.0, arith = 0.0;
        for (int i = k; i < m; ++i) {
            log_geo += std::log(std::max(eig_desc(i), kFloor));
            arith += eig_desc(i);
        }
        log_geo /= (m - k);
        arith /= (m - k);
        double log_rho = log_geo - std::log(std::max(arith, kFloor));
        double mdl = -2.0 * g * (m - k) * log_rho + k * (2.0 * m - k) * std::log(g);
        if (mdl < best) {
            best = mdl;
            best_m = k;
        }
    }
    return best_m;
}

MusicSpectrum music_spectrum(const MatrixXcd& scm, int order, const ArrayGeometry& geom,
                             const AngleGrid& grid) {
    const int m = static_cast<int>(scm.rows());
    if (order < 0 || order >= m) throw std::invalid_argument("music_spectrum: order outside [0, M)");
    grid.validate();

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(scm);
    if (es.info() != Eigen::Success) throw std::runtime_error("music_spectrum: EVD failed");
    // Eigen returns ascending order: the first M - P columns span the noise
    // subspace.
    MatrixXcd u_null = es.eigenvectors().leftCols(m - order);
    MatrixXcd w = u_null * u_null.adjoint();

    const std::size_t kt = grid.elevations.size(), kp = grid.azimuths.size();
    MusicSpectrum out;
    out.grid = grid;
    out.values.resize(kt, kp);
    parallel_chunks(kt, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t u = lo; u < hi; ++u) {
            for (std::size_t v = 0; v < kp; ++v) {
                VectorXcd a = steering_vector(geom, grid.elevations[u], grid.azimuths[v]);
                double denom = std::real(a.dot(w * a));  // a^H W a
                out.values(u, v) = 1.0 / std::max(denom, 1e-30);
            }
        }
    });
    return out;
}

PeakList pick_peaks(const MusicSpectrum& spec, int count) {
    if (count < 0) throw std::invalid_argument("pick_peaks: count must be >= 0");
    PeakList out;
    if (count == 0) return out;

    const int kt = static_cast<int>(spec.values.rows());
    const int kp = static_cast<int>(spec.values.cols());
    const bool wrap = spec.grid.azimuth_wraps();

    struct Peak {
        double value;
        int u, v;
    };
    std::vector<Peak> peaks;
    for (int u = 0; u < kt; ++u) {
        for (int v = 0; v < kp; ++v) {
            double c = spec.values(u, v);
            bool is_max = true;
            for (int du = -1; du <= 1 && is_max; ++du) {
                int uu = u + du;
                if (uu < 0 || uu >= kt) continue;
                for (int dv = -1; dv <= 1; ++dv) {
                    if (du == 0 && dv == 0) continue;
                    int vv = v + dv;
                    if (vv < 0 || vv >= kp) {
                        if (!wrap) continue;
                        vv = (vv + kp) % kp;
                    }
                    if (spec.values(uu, vv) >= c) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) peaks.push_back({c, u, v});
        }
    }
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.u != b.u) return a.u < b.u;
        return a.v < b.v;
    });
    int take = std::min<int>(count, static_cast<int>(peaks.size()));
    out.shortfall = take < count;
    for (int i = 0; i < take; ++i)
        out.angles.emplace_back(spec.grid.elevations[peaks[i].u], spec.grid.azimuths[peaks[i].v]);
    return out;
}

}  // namespace aoaloc
