#include "aoaloc/localization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aoaloc {

double line_distance_sq(const Vector3d& w, const Vector3d& r, const Vector3d& u) {
    Vector3d d = w - r;
    double along = d.dot(u);
    return std::max(0.0, d.squaredNorm() - along * along);
}

AnchorSummary accumulate_anchor(AnchorSummary s, const Vector3d& r, const Vector3d& u) {
    Matrix3d f = Matrix3d::Identity() - u * u.transpose();
    s.c += f.topLeftCorner<2, 2>();
    s.h += f.topRows<2>() * r;
    s.b += f.block<2, 1>(0, 2);
    s.anchor_count += 1;
    return s;
}

namespace {

Vector2d planar_solve(const AnchorSummary& s, double z) {
    // C^+ (h - b z); the pseudo-inverse covers a single-anchor rank-1 C.
    Eigen::JacobiSVD<Matrix2d> svd(s.c, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double cutoff = 1e-12 * (sv(0) > 0.0 ? sv(0) : 1.0);
    Vector2d rhs = s.h - s.b * z;
    Vector2d y = svd.matrixU().transpose() * rhs;
    for (int i = 0; i < 2; ++i) y(i) = sv(i) > cutoff ? y(i) / sv(i) : 0.0;
    return svd.matrixV() * y;
}

}  // namespace

GpSolution gp_solve(const AnchorSummary& summary, const CityMap& map, const GpConfig& cfg) {
    if (summary.anchor_count < 1) throw std::invalid_argument("gp_solve: no anchors accumulated");

    GpSolution sol;
    double z = cfg.z_init;
    Vector2d w = Vector2d::Zero();
    double step = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= cfg.max_iters; ++k) {
        sol.iterations = k;
        double z_old = z;
        Vector2d w_old = w;
        w = planar_solve(summary, z);
        z = map.height_at(w);
        step = std::sqrt((w - w_old).squaredNorm() + (z - z_old) * (z - z_old));
        if (step <= cfg.eps_loc) break;
    }
    sol.diverged = step > 10.0 * cfg.eps_loc;
    sol.position = Vector3d(w.x(), w.y(), z);
    return sol;
}

DirectionBank TrackerState::direction_bank(const Vector3d& r) const {
    std::vector<Vector3d> dirs;
    std::vector<int> ids;
    for (const auto& [id, trk] : tracks_) {
        if (trk.position) {
            Vector3d d = *trk.position - r;
            double n = d.norm();
            if (n <= 0.0) continue;
            dirs.push_back(d / n);
        } else {
            dirs.push_back(trk.last_dir);
        }
        ids.push_back(id);
    }
    DirectionBank bank;
    bank.dirs.resize(3, static_cast<Eigen::Index>(dirs.size()));
    for (std::size_t i = 0; i < dirs.size(); ++i) bank.dirs.col(static_cast<Eigen::Index>(i)) = dirs[i];
    bank.track_ids = std::move(ids);
    return bank;
}

void TrackerState::assign_and_update(const std::vector<Vector3d>& dirs, const Vector3d& r,
                                     double t, const CityMap& map) {
    if (std::isnan(epoch_origin_)) epoch_origin_ = t;
    int epoch = static_cast<int>(std::floor((t - epoch_origin_) / cfg_.t_death));
    if (epoch > last_epoch_) {
        last_epoch_ = epoch;
        processed_windows_ = 0;
        for (auto& [id, trk] : tracks_) trk.hist = 0;
    }
    processed_windows_ += 1;

    DirectionBank bank = direction_bank(r);

    // Best track per direction; a track accepts only its highest-dot
    // direction per window, the rest become new candidates.
    struct Claim {
        int dir_idx;
        double dot;
    };
    std::map<int, Claim> claims;
    std::vector<int> unassigned;
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        int best_track = -1;
        double best_dot = 0.0;
        for (int c = 0; c < bank.count(); ++c) {
            double m = std::fabs(dirs[d].dot(bank.dirs.col(c)));
            if (m > best_dot) {
                best_dot = m;
                best_track = bank.track_ids[c];
            }
        }
        if (best_track >= 0 && best_dot >= cfg_.xi) {
            auto it = claims.find(best_track);
            if (it == claims.end() || best_dot > it->second.dot) {
                if (it != claims.end()) unassigned.push_back(it->second.dir_idx);
                claims[best_track] = {static_cast<int>(d), best_dot};
            } else {
                unassigned.push_back(static_cast<int>(d));
            }
        } else {
            unassigned.push_back(static_cast<int>(d));
        }
    }

    for (const auto& [track_id, claim] : claims) {
        SourceTrack& trk = tracks_.at(track_id);
        trk.summary = accumulate_anchor(trk.summary, r, dirs[claim.dir_idx]);
        trk.last_dir = dirs[claim.dir_idx];
        trk.hist += 1;
        trk.last_seen = t;
        if (trk.summary.anchor_count >= 2)
            trk.position = gp_solve(trk.summary, map, cfg_.gp).position;
    }

    std::sort(unassigned.begin(), unassigned.end());
    for (int d : unassigned) {
        SourceTrack trk;
        trk.id = next_id_++;
        trk.summary = accumulate_anchor(AnchorSummary{}, r, dirs[d]);
        trk.last_dir = dirs[d];
        trk.hist = 1;
        trk.last_seen = t;
        tracks_.emplace(trk.id, std::move(trk));
    }

    for (auto it = tracks_.begin(); it != tracks_.end();) {
        if (t - it->second.last_seen > cfg_.t_death)
            it = tracks_.erase(it);
        else
            ++it;
    }
    for (auto& [id, trk] : tracks_)
        trk.reliability = processed_windows_ > 0
                              ? static_cast<double>(trk.hist) / processed_windows_
                              : 0.0;
}

double cb_norm_sq_closed_form(double theta, double dphi) {
    double s2 = std::sin(theta) * std::sin(theta);
    double alpha = (1.0 - 0.5 * s2 * std::sin(dphi)) * (1.0 - std::cos(dphi));
    double sd2 = std::sin(dphi) * std::sin(dphi);
    double num = std::pow(std::sin(2.0 * theta), 2) * (4.0 - 2.0 * alpha - s2 * sd2);
    double den = std::pow(s2 * s2 * sd2 + 4.0 * std::cos(theta) * std::cos(theta), 2);
    return num / den;
}

WorstCaseRmse worst_case_rmse(double theta, double dphi, double dz_max) {
    if (dz_max < 0.0) throw std::invalid_argument("worst_case_rmse: dz_max must be >= 0");
    if (theta < 0.0) throw std::invalid_argument("worst_case_rmse: theta must be >= 0");
    WorstCaseRmse out;
    if (theta >= kPi / 2.0) {
        out.unbounded = true;
        out.cb_norm_sq = cb_norm_sq_closed_form(theta, dphi);
        out.cb_norm_sq_max = std::numeric_limits<double>::infinity();
        out.e_max = std::numeric_limits<double>::infinity();
        return out;
    }
    out.cb_norm_sq = cb_norm_sq_closed_form(theta, dphi);
    double tn = std::tan(theta);
    out.cb_norm_sq_max = tn * tn;
    out.e_max = dz_max * std::sqrt(out.cb_norm_sq_max + 1.0);
    return out;
}

}  // namespace aoaloc
