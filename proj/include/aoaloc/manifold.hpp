#ifndef AOALOC_MANIFOLD_HPP
#define AOALOC_MANIFOLD_HPP

#include <vector>

#include "aoaloc/common.hpp"
#include "aoaloc/scene.hpp"

namespace aoaloc {

// Provenance of a manifold column: a source already tracked across windows,
// or a fresh candidate direction from the rough stage.
struct ColumnTag {
    enum Kind { Tracked, NewCandidate } kind = NewCandidate;
    int id = -1;  // track id, or candidate ordinal

    bool operator==(const ColumnTag&) const = default;
};

struct ManifoldEstimate {
    MatrixXcd columns;            // M x N
    std::vector<ColumnTag> tags;  // size N
    int iterations = 0;

    int count() const { return static_cast<int>(columns.cols()); }
};

struct DirectionBank {
    Eigen::Matrix3Xd dirs;      // unit columns
    std::vector<int> track_ids;  // per column

    int count() const { return static_cast<int>(dirs.cols()); }
    static DirectionBank empty() { return {Eigen::Matrix3Xd(3, 0), {}}; }
};

// Unit directions from the receiver at r to each position; coincident points
// are skipped (reported via skipped, order otherwise preserved).
Eigen::Matrix3Xd directions_to_estimates(const std::vector<Vector3d>& positions,
                                         const Vector3d& r, std::vector<int>* skipped = nullptr);

// Keeps exactly the candidates with max |u . bank column| < xi; an empty bank
// keeps everything.
std::vector<Vector3d> gate_new_directions(const std::vector<Vector3d>& new_dirs,
                                          const DirectionBank& bank, double xi);

// A0 = exp(j K D^T [U_D, U_3]); tags carry track ids then candidate ordinals.
ManifoldEstimate initial_manifold(const DirectionBank& bank, const std::vector<Vector3d>& kept_new,
                                  const ArrayGeometry& geom);

}  // namespace aoaloc

#endif
