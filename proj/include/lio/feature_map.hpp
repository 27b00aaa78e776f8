#ifndef LIO_FEATURE_MAP_HPP
#define LIO_FEATURE_MAP_HPP

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "lio/kd_tree.hpp"
#include "lio/propagation.hpp"

namespace lio {

struct MapPoint {
    Vec3 xyz = Vec3::Zero();  // global frame, meters
    FeatureKind kind = FeatureKind::Plane;
};

/// Matched map plane or edge: unit direction u (normal or edge orientation)
/// and an anchor point q on it. The projector is u^T for planes and the skew
/// matrix of u for edges.
struct Correspondence {
    Vec3 u = Vec3::UnitZ();
    Vec3 q = Vec3::Zero();
    FeatureKind projector_kind = FeatureKind::Plane;
};

struct CorrespondenceConfig {
    int k = 5;                    // neighbors per fit
    double residual_gate = 0.5;   // meters; at or above is dropped
    // Plane fit accepted when eig_min <= plane_eig_ratio * eig_mid and every
    // neighbor lies within plane_max_dist of the fit; edge fit accepted when
    // eig_max >= edge_eig_ratio * eig_mid.
    double plane_eig_ratio = 0.01;
    double plane_max_dist = 0.1;
    double edge_eig_ratio = 3.0;
};

/// Global append-only feature map with exact nearest-neighbor search. Appends
/// buffer into a linear scan and trigger a full KD-tree rebuild once the
/// buffer exceeds 20% of the indexed size.
class FeatureMap {
  public:
    std::size_t size() const { return points_.size(); }
    std::size_t size(FeatureKind kind) const;
    bool empty(FeatureKind kind) const { return size(kind) == 0; }
    const std::vector<MapPoint>& points() const { return points_; }

    void append(const MapPoint& p);
    void append(const std::vector<MapPoint>& pts);

    /// Exact k nearest map points of the given kind, ascending distance.
    /// Throws EmptyMap when the map holds none of that kind.
    std::vector<MapPoint> knn(const Vec3& query, std::size_t k,
                              FeatureKind kind) const;

  private:
    struct KindStore {
        std::vector<Vec3> coords;            // parallel to `ids` semantics
        std::vector<std::uint32_t> indexed;  // ids covered by the tree
        std::vector<std::uint32_t> buffer;   // ids pending a rebuild
        KdTree3 tree;
    };

    KindStore& store(FeatureKind kind) {
        return kind == FeatureKind::Plane ? plane_ : edge_;
    }
    const KindStore& store(FeatureKind kind) const {
        return kind == FeatureKind::Plane ? plane_ : edge_;
    }

    std::vector<MapPoint> points_;
    KindStore plane_;
    KindStore edge_;
};

/// Least-squares plane through >=5 neighbors: normal is the scatter matrix's
/// smallest eigenvector, anchor the centroid. Returns nullopt when the
/// planarity check fails. When a view point is given the normal is oriented
/// toward it. Throws TooFewNeighbors.
std::optional<Correspondence> fit_plane(
    const std::vector<MapPoint>& neighbors, const CorrespondenceConfig& cfg = {},
    const std::optional<Vec3>& view_point = std::nullopt);

/// Line through >=5 neighbors: direction is the dominant scatter eigenvector.
/// Returns nullopt when the dominance check fails. Throws TooFewNeighbors.
std::optional<Correspondence> fit_edge(const std::vector<MapPoint>& neighbors,
                                       const CorrespondenceConfig& cfg = {});

/// Point-to-feature residual: signed distance (1-vector) for planes,
/// u x (p - q) (3-vector) for edges.
Eigen::VectorXd compute_residual(const Vec3& p_global, const Correspondence& corr);

struct Match {
    std::size_t index;  // position in the query list
    Correspondence corr;
    Eigen::VectorXd residual;
};

struct GlobalFeature {
    std::size_t index;
    Vec3 xyz;  // global frame
    FeatureKind kind;
};

/// knn + fit + residual for each point; degenerate fits and residuals at or
/// above the gate are dropped. Throws EmptyMap when the map has no points of
/// a queried kind.
std::vector<Match> build_correspondences(
    const FeatureMap& map, const std::vector<GlobalFeature>& points,
    const CorrespondenceConfig& cfg = {},
    const std::optional<Vec3>& view_point = std::nullopt);

/// Transforms scan-end points by the optimal pose and appends them to the map.
void append_scan(FeatureMap& map, const NavState& x, const Extrinsic& ext,
                 const std::vector<LidarPoint>& points_at_scan_end);

}  // namespace lio

#endif  // LIO_FEATURE_MAP_HPP
