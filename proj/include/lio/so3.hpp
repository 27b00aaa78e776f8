#ifndef LIO_SO3_HPP
#define LIO_SO3_HPP

#include <Eigen/Core>

#include "lio/errors.hpp"

namespace lio {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Branch thresholds for the Taylor fallbacks (double-precision cancellation).
inline constexpr double kExpLogSmallAngle = 1e-7;
inline constexpr double kAinvSmallNorm = 1e-6;
inline constexpr double kOrthoDrift = 1e-9;
inline constexpr double kAnglePiMargin = 1e-9;

/// Skew-symmetric matrix of v, so that skew(v) * w == v.cross(w).
Mat3 skew(const Vec3& v);

/// Rodrigues exponential map so(3) -> SO(3).
Mat3 exp_map(const Vec3& r);

/// Inverse of exp_map; angle in [0, pi). Throws AngleNearPi within 1e-9 of pi.
Vec3 log_map(const Mat3& rot);

/// A(u)^{-1} = I - 1/2 [u]x + (1 - alpha(|u|)) [u]x^2 / |u|^2,
/// alpha(m) = (m/2) cot(m/2). Requires |u| < 2*pi.
Mat3 a_matrix_inv(const Vec3& u);

/// Nearest orthonormal matrix via symmetric (polar) orthogonalization.
Mat3 orthonormalize(const Mat3& m);

/// 3x3 rotation that keeps itself orthonormal (re-orthonormalized when the
/// invariant drifts past 1e-9).
class Rotation3 {
  public:
    Rotation3() : mat_(Mat3::Identity()) {}
    explicit Rotation3(const Mat3& m) : mat_(m) { renormalize(); }

    static Rotation3 from_exp(const Vec3& r) { return Rotation3(exp_map(r)); }

    const Mat3& matrix() const { return mat_; }

    Rotation3 operator*(const Rotation3& rhs) const {
        return Rotation3(mat_ * rhs.mat_);
    }
    Vec3 operator*(const Vec3& v) const { return mat_ * v; }

    Rotation3 inverse() const {
        Rotation3 out;
        out.mat_ = mat_.transpose();
        return out;
    }

    Rotation3 boxplus(const Vec3& r) const { return Rotation3(mat_ * exp_map(r)); }

    /// this boxminus other = Log(other^T * this). Throws AngleNearPi.
    Vec3 boxminus(const Rotation3& other) const {
        return log_map(other.mat_.transpose() * mat_);
    }

    Vec3 log() const { return log_map(mat_); }

  private:
    void renormalize() {
        if ((mat_.transpose() * mat_ - Mat3::Identity()).norm() > kOrthoDrift) {
            mat_ = orthonormalize(mat_);
        }
    }
    Mat3 mat_;
};

/// Compound state on SO(3) x R^N with the boxplus/boxminus encapsulation
/// operators (rotation block first, then the euclidean block).
template <int N>
struct CompoundState {
    Rotation3 rot;
    Eigen::Matrix<double, N, 1> euclidean = Eigen::Matrix<double, N, 1>::Zero();

    using Tangent = Eigen::Matrix<double, N + 3, 1>;

    CompoundState boxplus(const Tangent& u) const {
        CompoundState out;
        out.rot = rot.boxplus(u.template head<3>());
        out.euclidean = euclidean + u.template tail<N>();
        return out;
    }

    /// this boxminus other.
    Tangent boxminus(const CompoundState& other) const {
        Tangent out;
        out.template head<3>() = rot.boxminus(other.rot);
        out.template tail<N>() = euclidean - other.euclidean;
        return out;
    }
};

}  // namespace lio

#endif  // LIO_SO3_HPP
