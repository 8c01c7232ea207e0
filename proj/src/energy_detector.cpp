#include "aoaloc/energy_detector.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace aoaloc {

void DetectorConfig::validate() const {
    if (!(p0 > 0.0 && p0 < 1.0)) throw std::invalid_argument("DetectorConfig: p0 must be in (0,1)");
    if (diff_max < 1) throw std::invalid_argument("DetectorConfig: diff_max must be >= 1");
    if (l_adj < 2) throw std::invalid_argument("DetectorConfig: l_adj must be >= 2");
    if (max_iters < 1) throw std::invalid_argument("DetectorConfig: max_iters must be >= 1");
}

double threshold_from_p0(double p0, double noise_var) {
    if (!(p0 > 0.0 && p0 < 1.0)) throw std::invalid_argument("threshold_from_p0: p0 must be in (0,1)");
    if (noise_var < 0.0) throw std::invalid_argument("threshold_from_p0: noise_var must be >= 0");
    return std::sqrt(-std::log(p0) * noise_var);
}

std::vector<int> columns_above_threshold(const MatrixXcd& block, double vth) {
    std::vector<int> idx;
    for (Eigen::Index g = 0; g < block.cols(); ++g) {
        if (block.col(g).cwiseAbs().maxCoeff() > vth) idx.push_back(static_cast<int>(g));
    }
    return idx;
}

std::vector<int> positions_in_qualifying_runs(const std::vector<char>& adjacent, int l_adj) {
    std::vector<int> kept;
    const int n = static_cast<int>(adjacent.size());
    int run_start = -1;
    for (int k = 0; k <= n; ++k) {
        bool one = k < n && adjacent[k];
        if (one && run_start < 0) run_start = k;
        if (!one && run_start >= 0) {
            int run_len = k - run_start;
            if (run_len >= l_adj - 1) {
                // adjacency k covers elements k and k+1: the run keeps its
                // members plus the element directly below it.
                for (int j = run_start; j <= k; ++j) kept.push_back(j);
            }
            run_start = -1;
        }
    }
    return kept;
}

std::vector<int> run_length_filter(const std::vector<int>& indices, int diff_max, int l_adj) {
    if (indices.size() < 2) return {};
    std::vector<char> adj(indices.size() - 1);
    for (std::size_t k = 0; k + 1 < indices.size(); ++k)
        adj[k] = (indices[k + 1] - indices[k]) <= diff_max;
    std::vector<int> kept_positions = positions_in_qualifying_runs(adj, l_adj);
    std::vector<int> out;
    out.reserve(kept_positions.size());
    for (int p : kept_positions) out.push_back(indices[p]);
    return out;
}

ColumnStats column_stats(const MatrixXcd& block) {
    ColumnStats st;
    st.rows = static_cast<int>(block.rows());
    st.max_abs.resize(block.cols());
    st.energy.resize(block.cols());
    for (Eigen::Index g = 0; g < block.cols(); ++g) {
        st.max_abs(g) = block.col(g).cwiseAbs().maxCoeff();
        st.energy(g) = block.col(g).squaredNorm();
    }
    return st;
}

DetectionResult detect_from_stats(const ColumnStats& stats, const DetectorConfig& cfg,
                                  std::optional<double> initial_noise_var) {
    cfg.validate();
    const Eigen::Index g = stats.max_abs.size();
    const int m = stats.rows;
    if (g < 1) throw std::invalid_argument("detect: block must have at least one column");

    const double total_energy = stats.energy.sum();
    DetectionResult res;
    res.noise_var = initial_noise_var.value_or(total_energy / static_cast<double>(m * g));

    std::vector<int> q;
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        res.iterations = iter;
        double vth = threshold_from_p0(cfg.p0, res.noise_var);
        std::vector<int> q_new;
        for (Eigen::Index c = 0; c < g; ++c)
            if (stats.max_abs(c) > vth) q_new.push_back(static_cast<int>(c));
        q_new = run_length_filter(q_new, cfg.diff_max, cfg.l_adj);

        if (static_cast<Eigen::Index>(q_new.size()) == g) {
            res.noise_update_skipped = true;  // empty complement, estimate carried forward
        } else {
            double kept_energy = 0.0;
            for (int c : q_new) kept_energy += stats.energy(c);
            // Clamped: round-off can push total - kept a hair below zero when
            // the complement is noiseless.
            res.noise_var =
                std::max(0.0, total_energy - kept_energy) /
                static_cast<double>(m * (g - static_cast<Eigen::Index>(q_new.size())));
        }

        bool converged = (q_new == q);
        q = std::move(q_new);
        if (converged) break;
    }

    res.kept_indices = std::move(q);
    if (!res.kept_indices.empty()) {
        double kept_energy = 0.0;
        for (int c : res.kept_indices) kept_energy += stats.energy(c);
        double mean_energy = kept_energy / static_cast<double>(m * res.kept_indices.size());
        res.inst_snr_raw = res.noise_var > 0.0
                               ? (mean_energy - res.noise_var) / res.noise_var
                               : std::numeric_limits<double>::infinity();
    } else {
        res.inst_snr_raw = -1.0;
    }
    res.inst_snr = std::max(0.0, res.inst_snr_raw);
    return res;
}

DetectionResult detect(const MatrixXcd& block, const DetectorConfig& cfg,
                       std::optional<double> initial_noise_var) {
    DetectionResult res = detect_from_stats(column_stats(block), cfg, initial_noise_var);
    res.filtered.resize(block.rows(), static_cast<Eigen::Index>(res.kept_indices.size()));
    for (std::size_t k = 0; k < res.kept_indices.size(); ++k)
        res.filtered.col(k) = block.col(res.kept_indices[k]);
    return res;
}

DetectionResult detect_matched_size(const ColumnStats& stats, const DetectorConfig& base,
                                    int target) {
    // Output size grows with p0 (weaker threshold keeps more); bisect its
    // logarithm and keep the nearest-size result seen.
    double lo = -12.0, hi = std::log10(0.9);
    DetectionResult best;
    long best_gap = std::numeric_limits<long>::max();
    auto consider = [&](double log_p0) {
        DetectorConfig cfg = base;
        cfg.p0 = std::pow(10.0, log_p0);
        DetectionResult r = detect_from_stats(stats, cfg);
        long gap = std::labs(static_cast<long>(r.kept_indices.size()) - target);
        if (gap < best_gap) {
            best_gap = gap;
            best = std::move(r);
        }
        return gap;
    };
    for (int it = 0; it < 48 && best_gap != 0; ++it) {
        double mid = 0.5 * (lo + hi);
        DetectorConfig cfg = base;
        cfg.p0 = std::pow(10.0, mid);
        DetectionResult r = detect_from_stats(stats, cfg);
        long size = static_cast<long>(r.kept_indices.size());
        long gap = std::labs(size - target);
        if (gap < best_gap) {
            best_gap = gap;
            best = r;
        }
        if (size < target)
            lo = mid;
        else
            hi = mid;
    }
    if (best_gap != 0) {
        consider(lo);
        consider(hi);
    }
    return best;
}

}  // namespace aoaloc
