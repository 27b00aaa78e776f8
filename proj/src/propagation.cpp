#include "lio/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace lio {

namespace {

void step_with_cov(NavState& x, Mat18& p, const ImuSample& u, double dt,
                   const ProcessNoise& q) {
    Mat18 f_x;
    Mat18x12 f_w;
    compute_F_matrices(x, u, dt, f_x, f_w);
    x = step_state(x, u, dt);
    p = symmetrize(f_x * p * f_x.transpose() + f_w * q.cov * f_w.transpose());
}

}  // namespace

std::pair<NavState, Mat18> forward_propagate(const NavState& x_prev,
                                             const Mat18& p_prev,
                                             const std::vector<ImuSample>& imu,
                                             double t_end,
                                             const ProcessNoise& q) {
    if (imu.empty()) {
        throw EmptyImu();
    }
    for (std::size_t i = 1; i < imu.size(); ++i) {
        if (!(imu[i].stamp > imu[i - 1].stamp)) {
            throw NonMonotonicStamps("IMU stream, sample " + std::to_string(i));
        }
    }
    if (imu.back().stamp > t_end) {
        throw NonMonotonicStamps("IMU sample past scan end");
    }

    NavState x = x_prev;
    Mat18 p = p_prev;
    for (std::size_t i = 0; i + 1 < imu.size(); ++i) {
        step_with_cov(x, p, imu[i], imu[i + 1].stamp - imu[i].stamp, q);
    }
    const double tail = t_end - imu.back().stamp;
    if (tail > 0.0) {
        step_with_cov(x, p, imu.back(), tail, q);
    }
    return {x, p};
}

std::vector<std::pair<double, RelPose>> backward_propagate(const ScanBundle& scan,
                                                           const NavState& x_end) {
    std::vector<std::pair<double, RelPose>> out;
    out.reserve(scan.points.size());
    if (scan.points.empty()) {
        return out;
    }

    // Unique stamps, descending from the scan end.
    std::vector<double> stamps;
    stamps.reserve(scan.points.size());
    for (const auto& p : scan.points) {
        stamps.push_back(p.stamp);
    }
    std::sort(stamps.begin(), stamps.end(), std::greater<double>());
    stamps.erase(std::unique(stamps.begin(), stamps.end()), stamps.end());

    // Left IMU sample for an interval starting at t: last sample with stamp <= t.
    auto left_input = [&](double t) -> const ImuSample& {
        auto it = std::upper_bound(
            scan.imu.begin(), scan.imu.end(), t,
            [](double v, const ImuSample& s) { return v < s.stamp; });
        if (it == scan.imu.begin()) {
            throw MissingLeftImu();
        }
        return *(it - 1);
    };

    const Mat3 rot_end_t = x_end.rot.matrix().transpose();
    const Vec3 g_body = rot_end_t * x_end.gravity;

    std::map<double, RelPose> by_stamp;
    Rotation3 rot;                       // I at the scan end
    Vec3 pos = Vec3::Zero();
    Vec3 vel = rot_end_t * x_end.vel;
    by_stamp[stamps.front()] = RelPose{rot, pos};

    for (std::size_t j = 0; j + 1 < stamps.size(); ++j) {
        const double t_hi = stamps[j];
        const double t_lo = stamps[j + 1];
        const double dt = t_hi - t_lo;
        const ImuSample& u = left_input(t_lo);
        pos -= vel * dt;
        vel -= (rot * (u.acc - x_end.bias_acc) + g_body) * dt;
        rot = rot * Rotation3::from_exp((x_end.bias_gyro - u.gyro) * dt);
        by_stamp[t_lo] = RelPose{rot, pos};
    }

    for (const auto& p : scan.points) {
        out.emplace_back(p.stamp, by_stamp.at(p.stamp));
    }
    return out;
}

Vec3 project_to_scan_end(const LidarPoint& p, const RelPose& rel,
                         const Extrinsic& ext) {
    const Vec3 in_imu = ext.rot_IL * p.xyz + ext.pos_IL;       // I_j frame
    const Vec3 in_imu_end = rel.rot * in_imu + rel.pos;        // I_k frame
    return ext.rot_IL.inverse() * (in_imu_end - ext.pos_IL);   // L_k frame
}

}  // namespace lio
