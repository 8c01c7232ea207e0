#include "aoaloc/refiner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aoaloc/signal.hpp"

namespace aoaloc {

ManifoldEstimate ls_manifold_update(const MatrixXcd& block, const SmoothedMatrix& s_tilde,
                                    const std::vector<ColumnTag>& tags) {
    const Eigen::Index n = s_tilde.matrix.rows();
    if (n < 1) throw std::invalid_argument("ls_manifold_update: empty signal matrix");

    Eigen::JacobiSVD<MatrixXcd> svd(s_tilde.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double cutoff = 1e-12 * sv(0);
    VectorXd inv = VectorXd::Zero(sv.size());
    for (Eigen::Index r = 0; r < sv.size(); ++r)
        if (sv(r) > cutoff) inv(r) = 1.0 / sv(r);
    // A = Y S^+ with S^+ = V diag(1/s) U^H.
    MatrixXcd pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();

    ManifoldEstimate out;
    out.columns = block * pinv;
    out.tags.reserve(s_tilde.row_map.size());
    for (int r : s_tilde.row_map) out.tags.push_back(tags.at(r));
    return out;
}

void ksvd_update_column(const MatrixXcd& block, MatrixXcd& a_hat, MatrixXcd& s_tilde, int j) {
    const Eigen::Index n = a_hat.cols();
    if (s_tilde.rows() != n) throw std::invalid_argument("ksvd: row/column mismatch");
    if (j < 0 || j >= n) throw std::invalid_argument("ksvd: column index out of range");

    std::vector<int> support;
    for (Eigen::Index c = 0; c < s_tilde.cols(); ++c)
        if (s_tilde(j, c) != cplx(0.0, 0.0)) support.push_back(static_cast<int>(c));
    if (support.empty()) return;

    // Residual without source j, restricted to its support columns.
    MatrixXcd y_r(block.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) {
        int c = support[k];
        VectorXcd col = block.col(c);
        for (Eigen::Index l = 0; l < n; ++l) {
            if (l == j) continue;
            if (s_tilde(l, c) != cplx(0.0, 0.0)) col -= a_hat.col(l) * s_tilde(l, c);
        }
        y_r.col(static_cast<Eigen::Index>(k)) = col;
    }

    Eigen::JacobiSVD<MatrixXcd> svd(y_r, Eigen::ComputeThinU | Eigen::ComputeThinV);
    a_hat.col(j) = svd.matrixU().col(0);
    double sigma = svd.singularValues()(0);
    VectorXcd row = sigma * svd.matrixV().col(0).conjugate();
    for (std::size_t k = 0; k < support.size(); ++k) s_tilde(j, support[k]) = row(k);
}

void ksvd_pass(const MatrixXcd& block, MatrixXcd& a_hat, MatrixXcd& s_tilde) {
    for (Eigen::Index j = 0; j < a_hat.cols(); ++j)
        ksvd_update_column(block, a_hat, s_tilde, static_cast<int>(j));
}

RefineResult refine_manifold(const MatrixXcd& block, const std::vector<int>& q_mrs,
                             const ManifoldEstimate& a0, double noise_var, double inst_snr,
                             const EpsilonModel& model, const RefinerConfig& cfg) {
    if (a0.count() < 1) throw std::invalid_argument("refine_manifold: empty initial manifold");

    RefineResult res;
    ManifoldEstimate cur = a0;
    const int m = static_cast<int>(block.rows());
    // E_avg = gamma sigma^2; the difference form equals it identically and
    // stays finite in the zero-noise limit.
    const double e_avg = std::max(
        0.0, block.squaredNorm() / static_cast<double>(block.size()) - noise_var);

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        cur.iterations = iter;
        double gamma = std::max(inst_snr, 1e-6);
        double eps = model.epsilon_opt(cur.count(), gamma, m, e_avg, noise_var);

        SparseEstimate s_hat = recover_matrix(block, cur.columns, eps, cfg.l_max);
        SmoothedMatrix s_tilde = phase_smooth(s_hat.matrix, q_mrs, cfg.smoother);
        if (s_tilde.row_map.empty()) {
            res.manifold = std::move(cur);
            res.manifold.columns.resize(m, 0);
            res.manifold.tags.clear();
            res.empty = true;
            return res;
        }

        ManifoldEstimate next = ls_manifold_update(block, s_tilde, cur.tags);
        ksvd_pass(block, next.columns, s_tilde.matrix);
        next.iterations = iter;

        // Dimensions can shrink: compare over tag-matched columns.
        double crit = 0.0;
        int matched = 0;
        for (int c = 0; c < next.count(); ++c) {
            for (int o = 0; o < cur.count(); ++o) {
                if (next.tags[c] == cur.tags[o]) {
                    crit += (next.columns.col(c) - cur.columns.col(o)).squaredNorm();
                    ++matched;
                    break;
                }
            }
        }
        crit = matched > 0 ? std::sqrt(crit) / next.count() : 0.0;
        cur = std::move(next);
        res.final_criterion = crit;
        if (crit <= cfg.eps_aoa) break;
    }
    res.manifold = std::move(cur);
    return res;
}

namespace {

std::pair<double, double> argmax_over_grid(const VectorXcd& column, const AngleGrid& grid,
                                           const ArrayGeometry& geom) {
    double best = -1.0;
    std::pair<double, double> arg{grid.elevations.front(), grid.azimuths.front()};
    for (double th : grid.elevations) {
        for (double ph : grid.azimuths) {
            double v = std::abs(steering_vector(geom, th, ph).dot(column));
            if (v > best) {
                best = v;
                arg = {th, ph};
            }
        }
    }
    return arg;
}

}  // namespace

std::vector<std::pair<double, double>> read_aoas(const ManifoldEstimate& manifold,
                                                 const AngleGrid& grid,
                                                 const ArrayGeometry& geom) {
    if (manifold.count() < 1) throw std::invalid_argument("read_aoas: empty manifold");
    grid.validate();
    std::vector<std::pair<double, double>> out(manifold.count());
    parallel_chunks(manifold.count(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = lo; c < hi; ++c)
            out[c] = argmax_over_grid(manifold.columns.col(static_cast<Eigen::Index>(c)), grid, geom);
    });
    return out;
}

std::vector<std::pair<double, double>> read_aoas_zoomed(const ManifoldEstimate& manifold,
                                                        const AngleGrid& grid,
                                                        const ArrayGeometry& geom, int zoom_levels,
                                                        double factor, int half_span) {
    auto coarse = read_aoas(manifold, grid, geom);
    if (zoom_levels <= 0) return coarse;
    double theta_step0 = grid.elevations.size() > 1 ? grid.elevations[1] - grid.elevations[0]
                                                    : deg2rad(1.0);
    double phi_step0 = grid.azimuths.size() > 1 ? grid.azimuths[1] - grid.azimuths[0]
                                                : deg2rad(1.0);

    parallel_chunks(coarse.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = lo; c < hi; ++c) {
            double th_step = theta_step0, ph_step = phi_step0;
            auto [th, ph] = coarse[c];
            VectorXcd col = manifold.columns.col(static_cast<Eigen::Index>(c));
            for (int level = 0; level < zoom_levels; ++level) {
                th_step /= factor;
                ph_step /= factor;
                double best = -1.0;
                double best_th = th, best_ph = ph;
                for (int i = -half_span; i <= half_span; ++i) {
                    double t = std::clamp(th + i * th_step, 0.0, kPi);
                    for (int k = -half_span; k <= half_span; ++k) {
                        double p = wrap_two_pi(ph + k * ph_step);
                        double v = std::abs(steering_vector(geom, t, p).dot(col));
                        if (v > best) {
                            best = v;
                            best_th = t;
                            best_ph = p;
                        }
                    }
                }
                th = best_th;
                ph = best_ph;
            }
            coarse[c] = {th, ph};
        }
    });
    return coarse;
}

}  // namespace aoaloc
