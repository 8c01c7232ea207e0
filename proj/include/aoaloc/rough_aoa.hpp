#ifndef AOALOC_ROUGH_AOA_HPP
#define AOALOC_ROUGH_AOA_HPP

#include <vector>

#include "aoaloc/common.hpp"
#include "aoaloc/scene.hpp"

namespace aoaloc {

struct AngleGrid {
    std::vector<double> elevations;  // radians in [0, pi], strictly increasing
    std::vector<double> azimuths;    // radians in [0, 2pi), strictly increasing

    static AngleGrid regular(double theta_min, double theta_max, double theta_step,
                             double phi_min, double phi_max, double phi_step);
    // 1-degree full sphere.
    static AngleGrid full_sphere(double step_rad = deg2rad(1.0));

    void validate() const;
    bool azimuth_wraps() const;  // first and last azimuth adjacent on the circle
};

struct MusicSpectrum {
    MatrixXd values;  // K_theta x K_phi, positive finite
    AngleGrid grid;
};

// (1 / G) Y Y^H, Hermitian PSD. Throws on an empty block ("no detections").
MatrixXcd sample_covariance(const MatrixXcd& filtered);

// Eigenvalues of an SCM, descending.
VectorXd scm_eigenvalues_desc(const MatrixXcd& scm);

// Minimum-description-length order estimate over m in {0..M-1}.
int mdl_order(const VectorXd& eigenvalues_desc, Eigen::Index snapshots);

// 1 / (a^H U U^H a) with U spanning the M - P smallest-eigenvalue eigenvectors.
MusicSpectrum music_spectrum(const MatrixXcd& scm, int order, const ArrayGeometry& geom,
                             const AngleGrid& grid);

struct PeakList {
    std::vector<std::pair<double, double>> angles;  // (theta, phi)
    bool shortfall = false;                         // fewer maxima than requested
};

// The P largest 8-neighborhood strict local maxima; azimuth wraps when the
// grid covers the full circle; ties broken by (theta index, phi index).
PeakList pick_peaks(const MusicSpectrum& spec, int count);

}  // namespace aoaloc

#endif
