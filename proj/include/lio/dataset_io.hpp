#ifndef LIO_DATASET_IO_HPP
#define LIO_DATASET_IO_HPP

#include <string>
#include <vector>

#include "lio/feature_map.hpp"
#include "lio/sim.hpp"

namespace lio {

/// Raw point before classification: stamp + coordinates only.
struct RawPoint {
    double stamp = 0.0;
    Vec3 xyz = Vec3::Zero();
};

/// IMU CSV: `stamp_ns, wx, wy, wz, ax, ay, az` (SI units, integer nanosecond
/// stamps). Throws ParseError / NonMonotonicStamps.
std::vector<ImuSample> parse_imu_csv(const std::string& path);

struct ParsedPoints {
    std::vector<LidarPoint> labeled;   // rows that carried a kind column
    std::vector<RawPoint> unlabeled;   // rows without one
};

/// Points CSV: `stamp_ns, x, y, z[, kind]` with kind in {P, E}. A file may
/// mix labeled and unlabeled rows only if every row agrees; in practice one
/// of the two output lists is empty. Throws ParseError / NonMonotonicStamps.
ParsedPoints parse_points_csv(const std::string& path);

void write_imu_csv(const std::string& path, const std::vector<ImuSample>& imu);
void write_points_csv(const std::string& path,
                      const std::vector<LidarPoint>& points);

/// Ground-truth / estimated trajectory line:
/// `stamp x y z qw qx qy qz vx vy vz`.
struct TrajectoryRecord {
    double stamp = 0.0;
    NavState state;
    int iterations_used = 0;
    int effective_points = 0;
    bool degenerate = false;
    double proc_time_us = 0.0;
};

void write_trajectory(const std::string& path,
                      const std::vector<TrajectoryRecord>& records);
std::vector<TrajectoryRecord> read_trajectory(const std::string& path);

/// Map dump: `x y z kind` per line, kind in {P, E}.
void write_map_dump(const std::string& path, const std::vector<MapPoint>& points);

struct ClassifierConfig {
    int neighborhood = 5;
    double plane_threshold = 0.01;  // curvature below: planar
    double edge_threshold = 0.1;    // curvature above: edge
};

/// Minimal local-curvature classifier for unlabeled scans, scan-line order:
/// c = |sum_neighbors (p_i - p_j)| / (count * |p_j|); low curvature is
/// planar, high is edge, in-between rows are dropped. Throws TooFewPoints.
std::vector<LidarPoint> classify_features(const std::vector<RawPoint>& raw,
                                          const ClassifierConfig& cfg = {});

}  // namespace lio

#endif  // LIO_DATASET_IO_HPP
