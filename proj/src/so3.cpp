#include "lio/so3.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace lio {

Mat3 skew(const Vec3& v) {
    Mat3 s;
    s << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return s;
}

Mat3 exp_map(const Vec3& r) {
    const double theta = r.norm();
    const Mat3 rx = skew(r);
    if (theta < kExpLogSmallAngle) {
        // 2nd-order Taylor: I + [r]x + [r]x^2 / 2
        return Mat3::Identity() + rx + 0.5 * rx * rx;
    }
    const Mat3 kx = rx / theta;
    return Mat3::Identity() + std::sin(theta) * kx +
           (1.0 - std::cos(theta)) * kx * kx;
}

Vec3 log_map(const Mat3& rot) {
    const double tr = rot.trace();
    const double cos_theta = std::min(1.0, std::max(-1.0, 0.5 * (tr - 1.0)));
    const double theta = std::acos(cos_theta);
    if (theta > M_PI - kAnglePiMargin) {
        throw AngleNearPi();
    }
    const Vec3 w(rot(2, 1) - rot(1, 2), rot(0, 2) - rot(2, 0), rot(1, 0) - rot(0, 1));
    if (theta < kExpLogSmallAngle) {
        // sin(theta)/theta ~ 1 - theta^2/6
        return 0.5 * (1.0 + theta * theta / 6.0) * w;
    }
    return theta / (2.0 * std::sin(theta)) * w;
}

Mat3 a_matrix_inv(const Vec3& u) {
    const double m = u.norm();
    const Mat3 ux = skew(u);
    if (m < kAinvSmallNorm) {
        // alpha(m) ~ 1 - m^2/12, so (1 - alpha)/m^2 -> 1/12.
        return Mat3::Identity() - 0.5 * ux + (1.0 / 12.0) * ux * ux;
    }
    const double half = 0.5 * m;
    const double alpha = half * std::cos(half) / std::sin(half);
    return Mat3::Identity() - 0.5 * ux + ((1.0 - alpha) / (m * m)) * ux * ux;
}

Mat3 orthonormalize(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
        Mat3 flip = Mat3::Identity();
        flip(2, 2) = -1.0;
        r = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    return r;
}

}  // namespace lio
