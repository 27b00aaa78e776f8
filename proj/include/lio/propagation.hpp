#ifndef LIO_PROPAGATION_HPP
#define LIO_PROPAGATION_HPP

#include <utility>
#include <vector>

#include "lio/state.hpp"

namespace lio {

enum class FeatureKind { Plane, Edge };

/// One range measurement in the instantaneous LiDAR frame at its own stamp.
struct LidarPoint {
    double stamp = 0.0;         // seconds
    Vec3 xyz = Vec3::Zero();    // meters, LiDAR frame at `stamp`
    FeatureKind kind = FeatureKind::Plane;
};

/// Known rigid transform from the LiDAR frame to the IMU frame.
struct Extrinsic {
    Rotation3 rot_IL;
    Vec3 pos_IL = Vec3::Zero();
};

/// One scan's feature points plus the IMU samples covering it.
struct ScanBundle {
    std::vector<LidarPoint> points;  // stamps non-decreasing, last == t_end
    std::vector<ImuSample> imu;      // stamps strictly increasing
    double t_begin = 0.0;
    double t_end = 0.0;
};

/// Pose of the IMU frame at a point stamp relative to the scan-end IMU frame.
struct RelPose {
    Rotation3 rot;
    Vec3 pos = Vec3::Zero();
};

/// Steps the state through each IMU interval and the terminal partial
/// interval up to t_end (zero-order hold on the last input), accumulating
/// covariance as P <- F P F^T + Fw Q Fw^T and symmetrizing. The input state
/// corresponds to the first sample's stamp.
std::pair<NavState, Mat18> forward_propagate(const NavState& x_prev,
                                             const Mat18& p_prev,
                                             const std::vector<ImuSample>& imu,
                                             double t_end,
                                             const ProcessNoise& q);

/// Reverse-time recursion from the scan end, one step per unique point stamp,
/// holding the IMU sample on the left of each interval. Returns one
/// (stamp, RelPose) per point, in point order; the point at t_end gets the
/// identity pose exactly.
std::vector<std::pair<double, RelPose>> backward_propagate(const ScanBundle& scan,
                                                           const NavState& x_end);

/// Moves a point from its instantaneous LiDAR frame to the scan-end LiDAR
/// frame: T_IL^{-1} * rel * T_IL applied to p.xyz.
Vec3 project_to_scan_end(const LidarPoint& p, const RelPose& rel,
                         const Extrinsic& ext);

}  // namespace lio

#endif  // LIO_PROPAGATION_HPP
