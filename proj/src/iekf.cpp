#include "lio/iekf.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace lio {

namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kEdgeNoiseRegularizer = 1e-6;

void check_condition(const Eigen::VectorXd& d, bool innovation) {
    const double dmax = d.cwiseAbs().maxCoeff();
    const double dmin = d.cwiseAbs().minCoeff();
    if (!(dmin > 0.0) || dmax / dmin > kConditionLimit) {
        if (innovation) {
            throw SingularInnovation();
        }
        throw SingularPrior();
    }
}

Mat18 stable_inverse_18(const Mat18& m, bool innovation) {
    Eigen::LDLT<Mat18> ldlt(m);
    check_condition(ldlt.vectorD(), innovation);
    return ldlt.solve(Mat18::Identity());
}

/// 3x3 projected noise for an edge residual, regularized for invertibility.
Mat3 edge_noise(const Vec3& u, double sigma) {
    const Mat3 ux = skew(u);
    const double s2 = sigma * sigma;
    return s2 * (ux * ux.transpose()) + kEdgeNoiseRegularizer * s2 * Mat3::Identity();
}

}  // namespace

Eigen::Matrix<double, Eigen::Dynamic, 18> measurement_jacobian(
    const NavState& x, const Extrinsic& ext, const Vec3& p_scan_end,
    const Correspondence& corr) {
    const Vec3 p_imu = ext.rot_IL * p_scan_end + ext.pos_IL;
    Eigen::Matrix<double, 3, 18> d_point = Eigen::Matrix<double, 3, 18>::Zero();
    d_point.block<3, 3>(0, 0) = -x.rot.matrix() * skew(p_imu);
    d_point.block<3, 3>(0, 3) = Mat3::Identity();
    if (corr.projector_kind == FeatureKind::Plane) {
        return corr.u.transpose() * d_point;
    }
    return skew(corr.u) * d_point;
}

Mat18 compute_J(const NavState& x_iter, const NavState& x_pred) {
    const Vec3 dr = x_iter.rot.boxminus(x_pred.rot);
    Mat18 j = Mat18::Identity();
    j.block<3, 3>(0, 0) = a_matrix_inv(dr).transpose();
    return j;
}

Eigen::MatrixXd gain_standard(const Mat18& p, const Eigen::MatrixXd& h,
                              const Eigen::MatrixXd& r) {
    const Eigen::MatrixXd ph_t = p * h.transpose();        // 18 x m
    const Eigen::MatrixXd innov = h * ph_t + r;            // m x m
    Eigen::LDLT<Eigen::MatrixXd> ldlt(innov);
    check_condition(ldlt.vectorD(), /*innovation=*/true);
    return ldlt.solve(ph_t.transpose()).transpose();       // 18 x m
}

Eigen::MatrixXd gain_fast(const Mat18& p, const Eigen::MatrixXd& h,
                          const std::vector<Eigen::MatrixXd>& r_blocks) {
    Eigen::LDLT<Mat18> p_ldlt(p);
    check_condition(p_ldlt.vectorD(), /*innovation=*/false);
    const Mat18 p_inv = p_ldlt.solve(Mat18::Identity());

    const Eigen::Index m = h.rows();
    Eigen::MatrixXd ht_rinv(18, m);  // H^T R^{-1}, built block by block
    Mat18 info = p_inv;
    Eigen::Index row = 0;
    for (const auto& rb : r_blocks) {
        const Eigen::Index n = rb.rows();
        const auto hb = h.middleRows(row, n);
        const Eigen::MatrixXd rinv_hb = rb.ldlt().solve(hb);
        ht_rinv.middleCols(row, n) = rinv_hb.transpose();
        info += hb.transpose() * rinv_hb;
        row += n;
    }
    return Eigen::LDLT<Mat18>(info).solve(ht_rinv);
}

Eigen::MatrixXd gain_fast(const Mat18& p, const Eigen::MatrixXd& h,
                          const Eigen::VectorXd& r_diag) {
    Eigen::LDLT<Mat18> p_ldlt(p);
    check_condition(p_ldlt.vectorD(), /*innovation=*/false);
    const Mat18 p_inv = p_ldlt.solve(Mat18::Identity());

    const Eigen::MatrixXd ht_rinv =
        h.transpose() * r_diag.cwiseInverse().asDiagonal();
    const Mat18 info = p_inv + ht_rinv * h;
    return Eigen::LDLT<Mat18>(info).solve(ht_rinv);
}

UpdateResult iterated_update(const NavState& x_pred, const Mat18& p_pred,
                             const std::vector<LidarPoint>& points_scan_end,
                             const FeatureMap& map, const Extrinsic& ext,
                             const IekfConfig& cfg, const MeasurementNoise& noise) {
    CorrespondenceConfig ccfg;
    ccfg.k = cfg.knn_k;
    ccfg.residual_gate = cfg.residual_gate;
    const double s2 = noise.sigma_point * noise.sigma_point;

    UpdateResult result;
    result.x = x_pred;
    result.p = p_pred;

    NavState x_iter = x_pred;
    Mat18 info = Mat18::Identity();
    bool have_update = false;

    for (int kappa = 0; kappa < cfg.max_iterations; ++kappa) {
        // Project points to the global frame at the current estimate.
        std::vector<GlobalFeature> features;
        features.reserve(points_scan_end.size());
        for (std::size_t j = 0; j < points_scan_end.size(); ++j) {
            const auto& p = points_scan_end[j];
            const Vec3 p_imu = ext.rot_IL * p.xyz + ext.pos_IL;
            features.push_back(GlobalFeature{j, x_iter.rot * p_imu + x_iter.pos,
                                             p.kind});
        }
        const Vec3 sensor_pos = x_iter.rot * ext.pos_IL + x_iter.pos;
        const auto matches =
            build_correspondences(map, features, ccfg, sensor_pos);
        if (matches.empty()) {
            if (!have_update) {
                throw NoCorrespondences();
            }
            break;
        }

        const Mat18 j_mat = compute_J(x_iter, x_pred);
        const Mat18 j_inv = j_mat.inverse();
        const Mat18 p_proj =
            symmetrize(j_inv * p_pred * j_inv.transpose());
        Eigen::LDLT<Mat18> p_ldlt(p_proj);
        check_condition(p_ldlt.vectorD(), /*innovation=*/false);
        const Mat18 p_inv = p_ldlt.solve(Mat18::Identity());

        info = p_inv;
        Vec18 b = Vec18::Zero();
        for (const auto& match : matches) {
            const auto& pt = points_scan_end[match.index];
            const auto h = measurement_jacobian(x_iter, ext, pt.xyz, match.corr);
            if (match.corr.projector_kind == FeatureKind::Plane) {
                info += h.transpose() * h / s2;
                b += h.transpose() * match.residual / s2;
            } else {
                const Mat3 r_inv = edge_noise(match.corr.u, noise.sigma_point).inverse();
                info += h.transpose() * r_inv * h;
                b += h.transpose() * r_inv * match.residual;
            }
        }

        const Vec18 prior_term = p_inv * (j_inv * x_iter.boxminus(x_pred));
        const Vec18 delta = -Eigen::LDLT<Mat18>(info).solve(b + prior_term);
        x_iter = x_iter.boxplus(delta);
        have_update = true;
        result.iterations_used = kappa + 1;
        result.effective_points = static_cast<int>(matches.size());
        if (delta.norm() < cfg.epsilon) {
            break;
        }
    }

    result.x = x_iter;
    // (I - K H) P collapses to the inverse of the information matrix.
    result.p = symmetrize(Eigen::LDLT<Mat18>(info).solve(Mat18::Identity()));
    return result;
}

InitResult static_initialize(const std::vector<ImuSample>& imu, double duration) {
    if (imu.empty()) {
        throw TooShort();
    }
    const double t0 = imu.front().stamp;
    std::vector<const ImuSample*> window;
    for (const auto& s : imu) {
        if (s.stamp - t0 <= duration) {
            window.push_back(&s);
        }
    }
    const auto n = static_cast<double>(window.size());
    if (n < duration * 50.0 ||
        (imu.back().stamp - t0) + 1e-9 < duration) {
        throw TooShort();
    }

    Vec3 gyro_mean = Vec3::Zero();
    Vec3 acc_mean = Vec3::Zero();
    for (const auto* s : window) {
        gyro_mean += s->gyro;
        acc_mean += s->acc;
    }
    gyro_mean /= n;
    acc_mean /= n;

    Vec3 gyro_var = Vec3::Zero();
    Vec3 acc_var = Vec3::Zero();
    for (const auto* s : window) {
        gyro_var += (s->gyro - gyro_mean).cwiseAbs2();
        acc_var += (s->acc - acc_mean).cwiseAbs2();
    }
    gyro_var /= n;
    acc_var /= n;
    const double gyro_std = std::sqrt(gyro_var.mean());
    const double acc_std = std::sqrt(acc_var.mean());
    if (gyro_std > 0.05 || acc_std > 0.5) {
        throw NotStatic();
    }
    const double g_norm = acc_mean.norm();
    if (g_norm < 9.5 || g_norm > 10.1) {
        throw NotStatic();
    }

    InitResult out;
    out.x.bias_gyro = gyro_mean;
    out.x.gravity = -acc_mean;

    // Initial covariance defaults: pose/velocity are defined to be zero in
    // the first IMU frame; bias/gravity get the estimation uncertainty.
    const double bg_var = std::max(gyro_var.mean() / n, 1e-10);
    Mat18 p = Mat18::Zero();
    p.block<3, 3>(0, 0) = 1e-6 * Mat3::Identity();
    p.block<3, 3>(3, 3) = 1e-9 * Mat3::Identity();
    p.block<3, 3>(6, 6) = 1e-4 * Mat3::Identity();
    p.block<3, 3>(9, 9) = bg_var * Mat3::Identity();
    p.block<3, 3>(12, 12) = 1e-2 * Mat3::Identity();
    p.block<3, 3>(15, 15) = 1e-2 * Mat3::Identity();
    out.p = p;

    out.q = ProcessNoise::from_stds(std::max(gyro_std, 1e-6),
                                    std::max(acc_std, 1e-5), 1e-5, 1e-5);
    return out;
}

}  // namespace lio
