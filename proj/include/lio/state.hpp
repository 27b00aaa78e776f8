#ifndef LIO_STATE_HPP
#define LIO_STATE_HPP

#include <Eigen/Core>

#include "lio/so3.hpp"

namespace lio {

using Vec12 = Eigen::Matrix<double, 12, 1>;
using Vec18 = Eigen::Matrix<double, 18, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat18 = Eigen::Matrix<double, 18, 18>;
using Mat18x12 = Eigen::Matrix<double, 18, 12>;

inline constexpr double kMaxStepDt = 0.1;  // seconds

/// One inertial measurement: body angular rate and specific force.
struct ImuSample {
    double stamp = 0.0;  // seconds
    Vec3 gyro = Vec3::Zero();   // rad/s
    Vec3 acc = Vec3::Zero();    // m/s^2
};

/// 18-DOF navigation state on SO(3) x R^15. Error-state ordering is
/// (attitude, position, velocity, gyro bias, acc bias, gravity).
struct NavState {
    Rotation3 rot;                 // IMU attitude in the global frame
    Vec3 pos = Vec3::Zero();       // m
    Vec3 vel = Vec3::Zero();       // m/s
    Vec3 bias_gyro = Vec3::Zero(); // rad/s
    Vec3 bias_acc = Vec3::Zero();  // m/s^2
    Vec3 gravity = Vec3::Zero();   // m/s^2, expressed in the global frame

    NavState boxplus(const Vec18& u) const {
        NavState out = *this;
        out.rot = rot.boxplus(u.head<3>());
        out.pos += u.segment<3>(3);
        out.vel += u.segment<3>(6);
        out.bias_gyro += u.segment<3>(9);
        out.bias_acc += u.segment<3>(12);
        out.gravity += u.segment<3>(15);
        return out;
    }

    /// this boxminus other.
    Vec18 boxminus(const NavState& other) const {
        Vec18 out;
        out.head<3>() = rot.boxminus(other.rot);
        out.segment<3>(3) = pos - other.pos;
        out.segment<3>(6) = vel - other.vel;
        out.segment<3>(9) = bias_gyro - other.bias_gyro;
        out.segment<3>(12) = bias_acc - other.bias_acc;
        out.segment<3>(15) = gravity - other.gravity;
        return out;
    }
};

/// Process noise covariance, block order (n_gyro, n_acc, n_bias_gyro, n_bias_acc).
struct ProcessNoise {
    Mat12 cov = Mat12::Zero();

    /// Defaults matched to the simulator: gyro (1e-3)^2, accel (1e-2)^2,
    /// bias walks (1e-5)^2, per axis.
    static ProcessNoise simulator_matched();

    static ProcessNoise from_stds(double gyro, double acc, double bg_walk,
                                  double ba_walk);
};

inline Mat18 symmetrize(const Mat18& p) { return 0.5 * (p + p.transpose()); }

/// Continuous-time kinematics stacked as an 18-vector:
/// (w_m - bg - n_g; v; R (a_m - ba - n_a) + g; n_bg; n_ba; 0).
Vec18 process_f(const NavState& x, const ImuSample& u, const Vec12& w);

/// One zero-order-hold step: x boxplus (dt * f(x, u, 0)).
/// Throws DtOutOfRange unless 0 < dt <= 0.1.
NavState step_state(const NavState& x, const ImuSample& u, double dt);

/// Analytic error-state Jacobians of one discrete step, evaluated at the
/// current estimate: x_err' ~= F_x * x_err + F_w * w.
void compute_F_matrices(const NavState& x, const ImuSample& u, double dt,
                        Mat18& f_x, Mat18x12& f_w);

}  // namespace lio

#endif  // LIO_STATE_HPP
