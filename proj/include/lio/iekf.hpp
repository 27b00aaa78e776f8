#ifndef LIO_IEKF_HPP
#define LIO_IEKF_HPP

#include <vector>

#include "lio/feature_map.hpp"

namespace lio {

/// Isotropic per-point range noise; projected per correspondence into the
/// residual space (scalar sigma^2 for plane rows, regularized rank-2 3x3 for
/// edges).
struct MeasurementNoise {
    double sigma_point = 0.02;  // meters
};

struct IekfConfig {
    double epsilon = 1e-3;       // convergence threshold on the update norm
    int max_iterations = 10;
    double residual_gate = 0.5;  // meters
    int knn_k = 5;
};

struct UpdateResult {
    NavState x;
    Mat18 p;
    int iterations_used = 0;
    int effective_points = 0;
};

/// Jacobian of the residual w.r.t. the 18-D error state at zero:
/// H = G * [ -R [R_IL p + p_IL]x , I , 0_{3x12} ]. 1x18 for planes, 3x18 for
/// edges.
Eigen::Matrix<double, Eigen::Dynamic, 18> measurement_jacobian(
    const NavState& x, const Extrinsic& ext, const Vec3& p_scan_end,
    const Correspondence& corr);

/// Jacobian of (x_iter boxplus e) boxminus x_pred at e = 0:
/// blockdiag(A(dr)^{-T}, I_15) with dr the rotation difference.
Mat18 compute_J(const NavState& x_iter, const NavState& x_pred);

/// Standard gain K = P H^T (H P H^T + R)^{-1} via a symmetric solve of the
/// m x m innovation system. Throws SingularInnovation.
Eigen::MatrixXd gain_standard(const Mat18& p, const Eigen::MatrixXd& h,
                              const Eigen::MatrixXd& r);

/// Information-form gain K = (H^T R^{-1} H + P^{-1})^{-1} H^T R^{-1},
/// accumulated block-by-block; only 18x18 systems are solved. Throws
/// SingularPrior. `r_blocks` partitions the rows of H.
Eigen::MatrixXd gain_fast(const Mat18& p, const Eigen::MatrixXd& h,
                          const std::vector<Eigen::MatrixXd>& r_blocks);

/// Convenience overload for diagonal R.
Eigen::MatrixXd gain_fast(const Mat18& p, const Eigen::MatrixXd& h,
                          const Eigen::VectorXd& r_diag);

/// Iterated measurement update over one scan's points (already projected to
/// the scan-end LiDAR frame). Re-searches correspondences each iteration,
/// applies the information-form gain, and stops when the update norm falls
/// below epsilon or iterations run out. Throws NoCorrespondences when every
/// point fails the gate on the first iteration.
UpdateResult iterated_update(const NavState& x_pred, const Mat18& p_pred,
                             const std::vector<LidarPoint>& points_scan_end,
                             const FeatureMap& map, const Extrinsic& ext,
                             const IekfConfig& cfg, const MeasurementNoise& noise);

struct InitResult {
    NavState x;
    Mat18 p;
    ProcessNoise q;  // stds estimated from the sample variance
};

/// Static initialization: gyro bias from the mean rate, gravity from the mean
/// specific force (global frame = first IMU frame, so attitude is identity).
/// Throws TooShort / NotStatic.
InitResult static_initialize(const std::vector<ImuSample>& imu, double duration);

}  // namespace lio

#endif  // LIO_IEKF_HPP
