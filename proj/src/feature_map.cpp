#include "lio/feature_map.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Dense>

#include "lio/errors.hpp"

namespace lio {

namespace {

struct Scatter {
    Vec3 centroid;
    Mat3 cov;  // scatter matrix about the centroid
};

Scatter scatter_of(const std::vector<MapPoint>& pts) {
    Vec3 c = Vec3::Zero();
    for (const auto& p : pts) {
        c += p.xyz;
    }
    c /= static_cast<double>(pts.size());
    Mat3 s = Mat3::Zero();
    for (const auto& p : pts) {
        const Vec3 d = p.xyz - c;
        s += d * d.transpose();
    }
    return {c, s / static_cast<double>(pts.size())};
}

}  // namespace

std::size_t FeatureMap::size(FeatureKind kind) const {
    return store(kind).coords.size();
}

void FeatureMap::append(const MapPoint& p) {
    points_.push_back(p);
    KindStore& s = store(p.kind);
    s.coords.push_back(p.xyz);
    s.buffer.push_back(static_cast<std::uint32_t>(s.coords.size() - 1));
    if (s.buffer.size() * 5 > s.indexed.size()) {
        s.indexed.insert(s.indexed.end(), s.buffer.begin(), s.buffer.end());
        s.buffer.clear();
        s.tree.build(s.coords, s.indexed);
    }
}

void FeatureMap::append(const std::vector<MapPoint>& pts) {
    points_.reserve(points_.size() + pts.size());
    for (const auto& p : pts) {
        points_.push_back(p);
        KindStore& s = store(p.kind);
        s.coords.push_back(p.xyz);
        s.buffer.push_back(static_cast<std::uint32_t>(s.coords.size() - 1));
    }
    for (FeatureKind kind : {FeatureKind::Plane, FeatureKind::Edge}) {
        KindStore& s = store(kind);
        if (!s.buffer.empty() && s.buffer.size() * 5 > s.indexed.size()) {
            s.indexed.insert(s.indexed.end(), s.buffer.begin(), s.buffer.end());
            s.buffer.clear();
            s.tree.build(s.coords, s.indexed);
        }
    }
}

std::vector<MapPoint> FeatureMap::knn(const Vec3& query, std::size_t k,
                                      FeatureKind kind) const {
    const KindStore& s = store(kind);
    if (s.coords.empty()) {
        throw EmptyMap();
    }
    std::vector<KdTree3::Hit> hits;
    s.tree.knn(s.coords, query, k, hits);
    // Fold buffered points in with bounded insertion; the tree result is
    // already sorted, so the merged list stays the exact k best.
    const auto better = [](const KdTree3::Hit& a, const KdTree3::Hit& b) {
        return a.dist_sq < b.dist_sq || (a.dist_sq == b.dist_sq && a.id < b.id);
    };
    for (std::uint32_t id : s.buffer) {
        const KdTree3::Hit cand{(s.coords[id] - query).squaredNorm(), id};
        if (hits.size() >= k) {
            if (!better(cand, hits.back())) {
                continue;
            }
            hits.pop_back();
        }
        hits.insert(std::upper_bound(hits.begin(), hits.end(), cand, better),
                    cand);
    }
    std::vector<MapPoint> out;
    out.reserve(hits.size());
    for (const auto& h : hits) {
        out.push_back(MapPoint{s.coords[h.id], kind});
    }
    return out;
}

std::optional<Correspondence> fit_plane(const std::vector<MapPoint>& neighbors,
                                        const CorrespondenceConfig& cfg,
                                        const std::optional<Vec3>& view_point) {
    if (neighbors.size() < 5) {
        throw TooFewNeighbors(neighbors.size());
    }
    const Scatter sc = scatter_of(neighbors);
    Eigen::SelfAdjointEigenSolver<Mat3> eig(sc.cov);
    const Vec3 evals = eig.eigenvalues();  // ascending
    if (evals[0] > cfg.plane_eig_ratio * evals[1]) {
        return std::nullopt;
    }
    // Collinear neighbors leave the normal direction undetermined.
    if (evals[1] <= cfg.plane_eig_ratio * evals[2]) {
        return std::nullopt;
    }
    Vec3 u = eig.eigenvectors().col(0).normalized();
    for (const auto& p : neighbors) {
        if (std::abs(u.dot(p.xyz - sc.centroid)) > cfg.plane_max_dist) {
            return std::nullopt;
        }
    }
    if (view_point && u.dot(*view_point - sc.centroid) < 0.0) {
        u = -u;
    }
    return Correspondence{u, sc.centroid, FeatureKind::Plane};
}

std::optional<Correspondence> fit_edge(const std::vector<MapPoint>& neighbors,
                                       const CorrespondenceConfig& cfg) {
    if (neighbors.size() < 5) {
        throw TooFewNeighbors(neighbors.size());
    }
    const Scatter sc = scatter_of(neighbors);
    Eigen::SelfAdjointEigenSolver<Mat3> eig(sc.cov);
    const Vec3 evals = eig.eigenvalues();
    if (evals[2] < cfg.edge_eig_ratio * evals[1]) {
        return std::nullopt;
    }
    const Vec3 u = eig.eigenvectors().col(2).normalized();
    return Correspondence{u, sc.centroid, FeatureKind::Edge};
}

Eigen::VectorXd compute_residual(const Vec3& p_global, const Correspondence& corr) {
    if (corr.projector_kind == FeatureKind::Plane) {
        Eigen::VectorXd z(1);
        z(0) = corr.u.dot(p_global - corr.q);
        return z;
    }
    return corr.u.cross(p_global - corr.q);
}

std::vector<Match> build_correspondences(const FeatureMap& map,
                                         const std::vector<GlobalFeature>& points,
                                         const CorrespondenceConfig& cfg,
                                         const std::optional<Vec3>& view_point) {
    std::vector<Match> out;
    out.reserve(points.size());
    for (const auto& pt : points) {
        const auto neighbors =
            map.knn(pt.xyz, static_cast<std::size_t>(cfg.k), pt.kind);
        if (neighbors.size() < 5) {
            continue;
        }
        std::optional<Correspondence> corr =
            pt.kind == FeatureKind::Plane ? fit_plane(neighbors, cfg, view_point)
                                          : fit_edge(neighbors, cfg);
        if (!corr) {
            continue;
        }
        Eigen::VectorXd z = compute_residual(pt.xyz, *corr);
        if (z.norm() >= cfg.residual_gate) {
            continue;
        }
        out.push_back(Match{pt.index, *corr, std::move(z)});
    }
    return out;
}

void append_scan(FeatureMap& map, const NavState& x, const Extrinsic& ext,
                 const std::vector<LidarPoint>& points_at_scan_end) {
    std::vector<MapPoint> transformed;
    transformed.reserve(points_at_scan_end.size());
    for (const auto& p : points_at_scan_end) {
        const Vec3 in_imu = ext.rot_IL * p.xyz + ext.pos_IL;
        transformed.push_back(MapPoint{x.rot * in_imu + x.pos, p.kind});
    }
    map.append(transformed);
}

}  // namespace lio
