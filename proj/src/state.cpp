#include "lio/state.hpp"

#include <Eigen/LU>

namespace lio {

ProcessNoise ProcessNoise::from_stds(double gyro, double acc, double bg_walk,
                                     double ba_walk) {
    ProcessNoise q;
    q.cov.block<3, 3>(0, 0) = gyro * gyro * Mat3::Identity();
    q.cov.block<3, 3>(3, 3) = acc * acc * Mat3::Identity();
    q.cov.block<3, 3>(6, 6) = bg_walk * bg_walk * Mat3::Identity();
    q.cov.block<3, 3>(9, 9) = ba_walk * ba_walk * Mat3::Identity();
    return q;
}

ProcessNoise ProcessNoise::simulator_matched() {
    return from_stds(1e-3, 1e-2, 1e-5, 1e-5);
}

Vec18 process_f(const NavState& x, const ImuSample& u, const Vec12& w) {
    Vec18 f;
    f.head<3>() = u.gyro - x.bias_gyro - w.head<3>();
    f.segment<3>(3) = x.vel;
    f.segment<3>(6) = x.rot * (u.acc - x.bias_acc - w.segment<3>(3)) + x.gravity;
    f.segment<3>(9) = w.segment<3>(6);
    f.segment<3>(12) = w.segment<3>(9);
    f.segment<3>(15).setZero();
    return f;
}

NavState step_state(const NavState& x, const ImuSample& u, double dt) {
    if (!(dt > 0.0) || dt > kMaxStepDt) {
        throw DtOutOfRange(dt);
    }
    return x.boxplus(dt * process_f(x, u, Vec12::Zero()));
}

void compute_F_matrices(const NavState& x, const ImuSample& u, double dt,
                        Mat18& f_x, Mat18x12& f_w) {
    if (!(dt > 0.0) || dt > kMaxStepDt) {
        throw DtOutOfRange(dt);
    }
    const Vec3 w_hat = u.gyro - x.bias_gyro;
    const Vec3 a_hat = u.acc - x.bias_acc;
    const Mat3& rot = x.rot.matrix();
    // These blocks need A(u)^T itself; a_matrix_inv supplies its inverse.
    const Mat3 a_inv_t = a_matrix_inv(w_hat * dt).inverse().transpose();

    f_x = Mat18::Identity();
    f_x.block<3, 3>(0, 0) = exp_map(-w_hat * dt);
    f_x.block<3, 3>(0, 9) = -a_inv_t * dt;
    f_x.block<3, 3>(3, 6) = dt * Mat3::Identity();
    f_x.block<3, 3>(6, 0) = -rot * skew(a_hat) * dt;
    f_x.block<3, 3>(6, 12) = -rot * dt;
    f_x.block<3, 3>(6, 15) = dt * Mat3::Identity();

    f_w.setZero();
    f_w.block<3, 3>(0, 0) = -a_inv_t * dt;
    f_w.block<3, 3>(6, 3) = -rot * dt;
    f_w.block<3, 3>(9, 6) = dt * Mat3::Identity();
    f_w.block<3, 3>(12, 9) = dt * Mat3::Identity();
}

}  // namespace lio
