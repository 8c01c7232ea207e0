#ifndef AOALOC_BASELINES_HPP
#define AOALOC_BASELINES_HPP

#include <vector>

#include "aoaloc/common.hpp"

namespace aoaloc {

// Reference per-column detectors used for false-detection comparisons. All
// three reduce to "statistic >= threshold" on a per-column scalar.

// Numerically stable ln I0: power series up to the crossover, asymptotic
// expansion with three correction terms beyond.
double log_bessel_i0(double x);

// Statistic of the binary (n/M) rule: the n-th largest element modulus.
double binary_statistic(const VectorXcd& column, int n);
bool binary_detector(const VectorXcd& column, double threshold, int n);

// sum_k ln I0(2 sqrt(gamma / sigma^2) |y_k|).
double glrt_statistic(const VectorXcd& column, double snr, double noise_var);
bool glrt_detector(const VectorXcd& column, double threshold, double snr, double noise_var);

// sum_k |y_k|^2.
double sld_statistic(const VectorXcd& column);
bool sld_detector(const VectorXcd& column, double threshold);

struct MatchedThreshold {
    double threshold = 0.0;
    int achieved = 0;      // columns retained at this threshold
    bool exact = true;     // false when statistic ties make n_out unreachable
};

// Threshold calibrated so the >=-rule keeps exactly n_out columns; ties
// resolved largest-statistic-first, nearest achievable count otherwise.
MatchedThreshold match_output_size(const std::vector<double>& statistics, int n_out);

}  // namespace aoaloc

#endif
