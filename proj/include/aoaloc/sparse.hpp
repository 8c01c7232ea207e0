#ifndef AOALOC_SPARSE_HPP
#define AOALOC_SPARSE_HPP

#include <vector>

#include "aoaloc/common.hpp"

namespace aoaloc {

// Shared preparation for the combinatorial L0 search: for every combination
// of up to l_max dictionary columns, an orthonormal range basis and the SVD
// pseudo-inverse pieces, computed once and reused across observations.
class CombinationSolver {
public:
    CombinationSolver(const MatrixXcd& dictionary, int l_max);

    struct LevelResult {
        std::vector<int> support;  // ascending column indices
        VectorXcd coeffs;          // aligned with support
        double residual = 0.0;     // ||(I - A_k A_k^+) y||
    };

    // Best combination (minimum projection residual) at each level
    // j = 1..min(l_max, N); lexicographic enumeration breaks ties.
    std::vector<LevelResult> best_per_level(const VectorXcd& y) const;

    int dictionary_size() const { return n_; }
    int max_level() const { return l_cap_; }

private:
    struct Combo {
        std::vector<int> cols;
        MatrixXcd q;     // orthonormal basis of the selected columns' range
        MatrixXcd pinv;  // SVD pseudo-inverse (cutoff 1e-12 sigma_max)
    };
    int m_ = 0, n_ = 0, l_cap_ = 0;
    std::vector<std::vector<Combo>> levels_;  // [j-1][k]
};

struct SparseSolution {
    std::vector<int> support;
    VectorXcd coeffs;
    double residual = 0.0;
};

// L0 problem: smallest support (up to l_max) whose LS residual meets eps; the
// best l_max-combination if none does; empty when ||y|| <= eps.
SparseSolution sparse_recover(const VectorXcd& y, const MatrixXcd& dictionary, double eps,
                              int l_max);
SparseSolution sparse_recover(const VectorXcd& y, const CombinationSolver& solver, double eps);

struct SparseEstimate {
    MatrixXcd matrix;                       // N x G
    std::vector<std::vector<int>> support;  // per column
};

// Column-wise recovery with one shared epsilon.
SparseEstimate recover_matrix(const MatrixXcd& block, const MatrixXcd& dictionary, double eps,
                              int l_max);

struct PhaseSmootherConfig {
    int diff_max = 20;
    int l_adj = 5;
    double eps_phi = kPi / 10.0;
};

struct SmoothedMatrix {
    MatrixXcd matrix;          // rows with surviving samples only
    std::vector<int> row_map;  // output row -> input row
};

// Row-wise pulse-continuity filter: fold signs so each row's phases collapse
// onto one line, keep runs that are both adjacent in the original columns and
// phase-smooth, restore signs, drop rows left empty.
SmoothedMatrix phase_smooth(const MatrixXcd& s_hat, const std::vector<int>& q_mrs,
                            const PhaseSmootherConfig& cfg);

}  // namespace aoaloc

#endif
