#include "aoaloc/sparse.hpp"

#include <cmath>
#include <stdexcept>

#include "aoaloc/energy_detector.hpp"

namespace aoaloc {

namespace {

// Lexicographic enumeration of j-element subsets of {0..n-1}.
bool next_combination(std::vector<int>& c, int n) {
    int j = static_cast<int>(c.size());
    for (int i = j - 1; i >= 0; --i) {
        if (c[i] < n - (j - i)) {
            ++c[i];
            for (int k = i + 1; k < j; ++k) c[k] = c[k - 1] + 1;
            return true;
        }
    }
    return false;
}

}  // namespace

CombinationSolver::CombinationSolver(const MatrixXcd& dictionary, int l_max) {
    if (dictionary.cols() < 1) throw std::invalid_argument("CombinationSolver: empty dictionary");
    if (l_max < 1) throw std::invalid_argument("CombinationSolver: l_max must be >= 1");
    m_ = static_cast<int>(dictionary.rows());
    n_ = static_cast<int>(dictionary.cols());
    l_cap_ = std::min(l_max, n_);
    levels_.resize(l_cap_);

    for (int j = 1; j <= l_cap_; ++j) {
        std::vector<int> idx(j);
        for (int i = 0; i < j; ++i) idx[i] = i;
        do {
            MatrixXcd a_k(m_, j);
            for (int i = 0; i < j; ++i) a_k.col(i) = dictionary.col(idx[i]);

            Eigen::JacobiSVD<MatrixXcd> svd(a_k, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const auto& sv = svd.singularValues();
            double cutoff = 1e-12 * sv(0);
            int rank = 0;
            while (rank < sv.size() && sv(rank) > cutoff) ++rank;

            Combo combo;
            combo.cols = idx;
            combo.q = svd.matrixU().leftCols(rank);
            VectorXd inv_sv = VectorXd::Zero(sv.size());
            for (int r = 0; r < rank; ++r) inv_sv(r) = 1.0 / sv(r);
            combo.pinv = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().adjoint();
            levels_[j - 1].push_back(std::move(combo));
        } while (next_combination(idx, n_));
    }
}

std::vector<CombinationSolver::LevelResult> CombinationSolver::best_per_level(
    const VectorXcd& y) const {
    std::vector<LevelResult> out;
    out.reserve(l_cap_);
    const double y2 = y.squaredNorm();
    for (int j = 1; j <= l_cap_; ++j) {
        const Combo* best = nullptr;
        double best_r2 = std::numeric_limits<double>::infinity();
        for (const Combo& c : levels_[j - 1]) {
            // Fast scan via the Pythagorean split; accurate enough to rank.
            double proj = (c.q.adjoint() * y).squaredNorm();
            double r2 = std::max(0.0, y2 - proj);
            if (r2 < best_r2) {  // strict: first enumerated wins ties
                best_r2 = r2;
                best = &c;
            }
        }
        LevelResult lr;
        lr.support = best->cols;
        lr.coeffs = best->pinv * y;
        // The committed residual by direct subtraction: the difference form
        // cancels catastrophically for near-exact fits.
        lr.residual = (y - best->q * (best->q.adjoint() * y)).norm();
        out.push_back(std::move(lr));
    }
    return out;
}

SparseSolution sparse_recover(const VectorXcd& y, const CombinationSolver& solver, double eps) {
    SparseSolution sol;
    if (std::sqrt(y.squaredNorm()) <= eps) return sol;
    auto levels = solver.best_per_level(y);
    for (const auto& lr : levels) {
        if (lr.residual <= eps || &lr == &levels.back()) {
            sol.support = lr.support;
            sol.coeffs = lr.coeffs;
            sol.residual = lr.residual;
            break;
        }
    }
    return sol;
}

SparseSolution sparse_recover(const VectorXcd& y, const MatrixXcd& dictionary, double eps,
                              int l_max) {
    return sparse_recover(y, CombinationSolver(dictionary, l_max), eps);
}

SparseEstimate recover_matrix(const MatrixXcd& block, const MatrixXcd& dictionary, double eps,
                              int l_max) {
    CombinationSolver solver(dictionary, l_max);
    const Eigen::Index g = block.cols();
    SparseEstimate est;
    est.matrix = MatrixXcd::Zero(dictionary.cols(), g);
    est.support.resize(g);
    parallel_chunks(static_cast<std::size_t>(g), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = lo; c < hi; ++c) {
            SparseSolution s = sparse_recover(block.col(c), solver, eps);
            for (std::size_t k = 0; k < s.support.size(); ++k)
                est.matrix(s.support[k], c) = s.coeffs(k);
            est.support[c] = std::move(s.support);
        }
    });
    return est;
}

SmoothedMatrix phase_smooth(const MatrixXcd& s_hat, const std::vector<int>& q_mrs,
                            const PhaseSmootherConfig& cfg) {
    const Eigen::Index n = s_hat.rows();
    const Eigen::Index g = s_hat.cols();
    if (n < 1) throw std::invalid_argument("phase_smooth: need at least one row");
    if (static_cast<Eigen::Index>(q_mrs.size()) != g)
        throw std::invalid_argument("phase_smooth: q_mrs length must match columns");

    MatrixXcd smoothed = MatrixXcd::Zero(n, g);
    for (Eigen::Index row = 0; row < n; ++row) {
        // Fold the two phase lines onto one: negate entries with negative
        // imaginary part, then drop zeros.
        std::vector<int> cols;    // original column positions of nonzeros
        std::vector<double> phase;
        for (Eigen::Index c = 0; c < g; ++c) {
            cplx v = s_hat(row, c);
            if (v == cplx(0.0, 0.0)) continue;
            if (v.imag() < 0.0) v = -v;
            cols.push_back(static_cast<int>(c));
            phase.push_back(std::arg(v));
        }
        if (cols.size() < 2) continue;

        std::vector<char> mask(cols.size() - 1);
        for (std::size_t k = 0; k + 1 < cols.size(); ++k) {
            double dphi = std::fabs(phase[k + 1] - phase[k]);
            bool smooth = dphi < cfg.eps_phi || dphi > kPi - cfg.eps_phi;
            bool adjacent = (q_mrs[cols[k + 1]] - q_mrs[cols[k]]) < cfg.diff_max;
            mask[k] = smooth && adjacent;
        }
        for (int pos : positions_in_qualifying_runs(mask, cfg.l_adj))
            smoothed(row, cols[pos]) = s_hat(row, cols[pos]);
    }

    SmoothedMatrix out;
    for (Eigen::Index row = 0; row < n; ++row)
        if (smoothed.row(row).squaredNorm() > 0.0) out.row_map.push_back(static_cast<int>(row));
    out.matrix.resize(static_cast<Eigen::Index>(out.row_map.size()), g);
    for (std::size_t r = 0; r < out.row_map.size(); ++r)
        out.matrix.row(static_cast<Eigen::Index>(r)) = smoothed.row(out.row_map[r]);
    return out;
}

}  // namespace aoaloc
