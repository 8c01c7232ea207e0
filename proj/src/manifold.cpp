#include "aoaloc/manifold.hpp"

#include <cmath>
#include <stdexcept>

#include "aoaloc/signal.hpp"

namespace aoaloc {

Eigen::Matrix3Xd directions_to_estimates(const std::vector<Vector3d>& positions,
                                         const Vector3d& r, std::vector<int>* skipped) {
    std::vector<Vector3d> cols;
    cols.reserve(positions.size());
    for (std::size_t s = 0; s < positions.size(); ++s) {
        Vector3d d = positions[s] - r;
        double n = d.norm();
        if (n <= 0.0) {
            if (skipped) skipped->push_back(static_cast<int>(s));
            continue;
        }
        cols.push_back(d / n);
    }
    Eigen::Matrix3Xd out(3, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t s = 0; s < cols.size(); ++s) out.col(static_cast<Eigen::Index>(s)) = cols[s];
    return out;
}

std::vector<Vector3d> gate_new_directions(const std::vector<Vector3d>& new_dirs,
                                          const DirectionBank& bank, double xi) {
    if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("gate_new_directions: xi must be in (0,1)");
    std::vector<Vector3d> kept;
    for (const auto& u : new_dirs) {
        double m_p = 0.0;  // empty bank: nothing to collide with
        for (int c = 0; c < bank.count(); ++c)
            m_p = std::max(m_p, std::fabs(u.dot(bank.dirs.col(c))));
        if (m_p < xi) kept.push_back(u);
    }
    return kept;
}

ManifoldEstimate initial_manifold(const DirectionBank& bank, const std::vector<Vector3d>& kept_new,
                                  const ArrayGeometry& geom) {
    const int n = bank.count() + static_cast<int>(kept_new.size());
    if (n == 0) throw std::runtime_error("initial_manifold: nothing to refine");

    ManifoldEstimate est;
    est.columns.resize(geom.num_elements(), n);
    est.tags.reserve(n);
    int c = 0;
    for (int s = 0; s < bank.count(); ++s, ++c) {
        est.columns.col(c) = steering_for_direction(geom, bank.dirs.col(s));
        est.tags.push_back({ColumnTag::Tracked, bank.track_ids[s]});
    }
    for (std::size_t k = 0; k < kept_new.size(); ++k, ++c) {
        est.columns.col(c) = steering_for_direction(geom, kept_new[k]);
        est.tags.push_back({ColumnTag::NewCandidate, static_cast<int>(k)});
    }
    return est;
}

}  // namespace aoaloc
