#ifndef AOALOC_REFINER_HPP
#define AOALOC_REFINER_HPP

#include <vector>

#include "aoaloc/epsilon_model.hpp"
#include "aoaloc/manifold.hpp"
#include "aoaloc/rough_aoa.hpp"
#include "aoaloc/sparse.hpp"

namespace aoaloc {

struct RefinerConfig {
    double eps_aoa = 1e-4;  // convergence on ||A - A_old||_F / N
    int max_iters = 20;
    int l_max = 3;
    PhaseSmootherConfig smoother;
};

// A_hat = Y S~^+; columns follow the smoother's surviving rows, tags carried
// through the row map.
ManifoldEstimate ls_manifold_update(const MatrixXcd& block, const SmoothedMatrix& s_tilde,
                                    const std::vector<ColumnTag>& tags);

// One K-SVD step: the rank-1 truncation of the residual restricted to row
// j's support replaces column j and the row's nonzeros. Skips empty rows.
void ksvd_update_column(const MatrixXcd& block, MatrixXcd& a_hat, MatrixXcd& s_tilde, int j);

// Full sweep over all columns.
void ksvd_pass(const MatrixXcd& block, MatrixXcd& a_hat, MatrixXcd& s_tilde);

struct RefineResult {
    ManifoldEstimate manifold;
    bool empty = false;  // every row was smoothed away
    double final_criterion = 0.0;
};

// Fixed-point loop {sparse recovery -> phase smoothing -> LS -> K-SVD} with
// the Frobenius convergence test; columns may shrink between iterations.
RefineResult refine_manifold(const MatrixXcd& block, const std::vector<int>& q_mrs,
                             const ManifoldEstimate& a0, double noise_var, double inst_snr,
                             const EpsilonModel& model, const RefinerConfig& cfg);

// Beamforming readout: per column the grid argmax of |a(theta, phi)^H c|.
std::vector<std::pair<double, double>> read_aoas(const ManifoldEstimate& manifold,
                                                 const AngleGrid& grid, const ArrayGeometry& geom);

// Same readout followed by local grid zoom-ins (each level shrinks the step
// by `factor` around the current argmax), for sub-step precision.
std::vector<std::pair<double, double>> read_aoas_zoomed(const ManifoldEstimate& manifold,
                                                        const AngleGrid& grid,
                                                        const ArrayGeometry& geom, int zoom_levels,
                                                        double factor = 10.0, int half_span = 12);

}  // namespace aoaloc

#endif
