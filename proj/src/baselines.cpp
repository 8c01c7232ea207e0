#include "aoaloc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aoaloc {

double log_bessel_i0(double x) {
    x = std::fabs(x);
    if (x <= 30.0) {
        // I0(x) = sum_k (x^2/4)^k / (k!)^2; all terms positive, no cancellation.
        double q = x * x / 4.0;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
            if (term < sum * 1e-18) break;
        }
        return std::log(sum);
    }
    // I0(x) ~ e^x / sqrt(2 pi x) (1 + 1/(8x) + 9/(128 x^2) + 225/(3072 x^3)).
    double inv = 1.0 / x;
    double corr = 1.0 + inv / 8.0 + 9.0 * inv * inv / 128.0 + 225.0 * inv * inv * inv / 3072.0;
    return x - 0.5 * std::log(2.0 * kPi * x) + std::log(corr);
}

double binary_statistic(const VectorXcd& column, int n) {
    if (n < 1 || n > column.size()) throw std::invalid_argument("binary_statistic: n outside [1, M]");
    std::vector<double> mags(column.size());
    for (Eigen::Index k = 0; k < column.size(); ++k) mags[k] = std::abs(column(k));
    std::nth_element(mags.begin(), mags.begin() + (n - 1), mags.end(), std::greater<double>());
    return mags[n - 1];
}

bool binary_detector(const VectorXcd& column, double threshold, int n) {
    return binary_statistic(column, n) >= threshold;
}

double glrt_statistic(const VectorXcd& column, double snr, double noise_var) {
    if (snr <= 0.0 || noise_var <= 0.0)
        throw std::invalid_argument("glrt_statistic: snr and noise_var must be > 0");
    double c = 2.0 * std::sqrt(snr / noise_var);
    double s = 0.0;
    for (Eigen::Index k = 0; k < column.size(); ++k) s += log_bessel_i0(c * std::abs(column(k)));
    return s;
}

bool glrt_detector(const VectorXcd& column, double threshold, double snr, double noise_var) {
    return glrt_statistic(column, snr, noise_var) >= threshold;
}

double sld_statistic(const VectorXcd& column) { return column.squaredNorm(); }

bool sld_detector(const VectorXcd& column, double threshold) {
    return sld_statistic(column) >= threshold;
}

MatchedThreshold match_output_size(const std::vector<double>& statistics, int n_out) {
    const int g = static_cast<int>(statistics.size());
    if (n_out < 0 || n_out > g) throw std::invalid_argument("match_output_size: n_out outside [0, G]");

    std::vector<double> sorted = statistics;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());

    // #{stat >= t}; non-increasing in t, so bisection degenerates to an
    // order-statistic lookup.
    auto count_at = [&](double t) {
        return static_cast<int>(std::upper_bound(sorted.begin(), sorted.end(), t,
                                                 std::greater<double>()) -
                                sorted.begin());
    };

    MatchedThreshold out;
    if (n_out == 0) {
        out.threshold = g == 0 ? 1.0 : std::nextafter(sorted.front(), std::numeric_limits<double>::max());
        out.achieved = 0;
        return out;
    }
    out.threshold = sorted[n_out - 1];
    out.achieved = count_at(out.threshold);
    if (out.achieved != n_out) {
        // Ties straddle the cut: pick the closer of keeping or dropping them.
        double above = std::nextafter(out.threshold, std::numeric_limits<double>::max());
        int without_ties = count_at(above);
        if (std::abs(without_ties - n_out) < std::abs(out.achieved - n_out)) {
            out.threshold = above;
            out.achieved = without_ties;
        }
        out.exact = false;
    }
    return out;
}

}  // namespace aoaloc
