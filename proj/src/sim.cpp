#include "lio/sim.hpp"

#include <algorithm>
#include <cmath>

#include "lio/errors.hpp"

namespace lio {

namespace {

/// Ramped phase angle: constant angular acceleration up to full rate omega
/// over t_ramp, then constant rate. Returns (theta, theta', theta'').
struct Phase {
    double value;
    double rate;
    double accel;
};

Phase ramped_phase(double t, double omega, double t_ramp) {
    if (t_ramp <= 0.0) {
        return {omega * t, omega, 0.0};
    }
    if (t < t_ramp) {
        // Smoothstep rate profile: acceleration is zero at both ends of the
        // ramp, so the world acceleration is continuous at motion onset.
        const double u = t / t_ramp;
        const double u2 = u * u, u3 = u2 * u;
        return {omega * t_ramp * (u3 - 0.5 * u2 * u2),
                omega * (3.0 * u2 - 2.0 * u3),
                omega / t_ramp * (6.0 * u - 6.0 * u2)};
    }
    return {omega * (t - 0.5 * t_ramp), omega, 0.0};
}

Rotation3 yaw_rotation(double psi) {
    Mat3 r;
    const double c = std::cos(psi), s = std::sin(psi);
    r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    return Rotation3(r);
}

/// Velocity-tracking yaw from planar velocity/acceleration.
void apply_yaw(TruthSample& out, YawMode mode) {
    if (mode == YawMode::Fixed) {
        return;
    }
    const double vx = out.vel.x(), vy = out.vel.y();
    const double v2 = vx * vx + vy * vy;
    const double psi = (v2 > 1e-18) ? std::atan2(vy, vx) : 0.0;
    const double psi_dot =
        (v2 > 1e-12) ? (vx * out.acc_world.y() - vy * out.acc_world.x()) / v2 : 0.0;
    out.rot = yaw_rotation(psi);
    out.omega_body = Vec3(0.0, 0.0, psi_dot);
}

TruthSample eval_motion(const TrajectorySpec& spec, double tau) {
    TruthSample out;
    switch (spec.kind) {
        case TrajectoryKind::Static: {
            out.pos = Vec3(0.0, 0.0, spec.height);
            break;
        }
        case TrajectoryKind::Circle: {
            const double omega = 2.0 * M_PI / spec.period;
            const Phase ph = ramped_phase(tau, omega, spec.ramp_time);
            const double r = spec.radius;
            const double c = std::cos(ph.value), s = std::sin(ph.value);
            out.pos = Vec3(r * s, r * (1.0 - c), spec.height);
            out.vel = r * ph.rate * Vec3(c, s, 0.0);
            out.acc_world = r * ph.accel * Vec3(c, s, 0.0) +
                            r * ph.rate * ph.rate * Vec3(-s, c, 0.0);
            apply_yaw(out, spec.yaw_mode);
            break;
        }
        case TrajectoryKind::Figure8: {
            const double omega = 2.0 * M_PI / spec.period;
            const Phase ph = ramped_phase(tau, omega, spec.ramp_time);
            const double ax = spec.fig8_amp_x, ay = spec.fig8_amp_y;
            const double p = ph.value, pd = ph.rate, pdd = ph.accel;
            out.pos = Vec3(ax * std::sin(p), ay * std::sin(2.0 * p), spec.height);
            out.vel = Vec3(ax * pd * std::cos(p), 2.0 * ay * pd * std::cos(2.0 * p), 0.0);
            out.acc_world =
                Vec3(ax * (pdd * std::cos(p) - pd * pd * std::sin(p)),
                     2.0 * ay * pdd * std::cos(2.0 * p) -
                         4.0 * ay * pd * pd * std::sin(2.0 * p),
                     0.0);
            apply_yaw(out, spec.yaw_mode);
            break;
        }
        case TrajectoryKind::SplineWaypoints: {
            const auto& wp = spec.waypoints;
            if (wp.size() < 2) {
                out.pos = wp.empty() ? Vec3::Zero() : wp.front().second;
                break;
            }
            const double t = std::clamp(tau, wp.front().first, wp.back().first);
            std::size_t i = 0;
            while (i + 2 < wp.size() && t >= wp[i + 1].first) {
                ++i;
            }
            const double t0 = wp[i].first, t1 = wp[i + 1].first;
            const double h = t1 - t0;
            const double s = (t - t0) / h;
            const Vec3& p0 = wp[i].second;
            const Vec3& p1 = wp[i + 1].second;
            // Catmull-Rom tangents, one-sided at the ends.
            auto tangent = [&](std::size_t j) -> Vec3 {
                if (j == 0) {
                    return (wp[1].second - wp[0].second) / (wp[1].first - wp[0].first);
                }
                if (j + 1 == wp.size()) {
                    return (wp[j].second - wp[j - 1].second) /
                           (wp[j].first - wp[j - 1].first);
                }
                return (wp[j + 1].second - wp[j - 1].second) /
                       (wp[j + 1].first - wp[j - 1].first);
            };
            const Vec3 m0 = tangent(i) * h;
            const Vec3 m1 = tangent(i + 1) * h;
            const double s2 = s * s, s3 = s2 * s;
            out.pos = (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 +
                      (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
            out.vel = ((6 * s2 - 6 * s) * p0 + (3 * s2 - 4 * s + 1) * m0 +
                       (-6 * s2 + 6 * s) * p1 + (3 * s2 - 2 * s) * m1) /
                      h;
            out.acc_world = ((12 * s - 6) * p0 + (6 * s - 4) * m0 +
                             (-12 * s + 6) * p1 + (6 * s - 2) * m1) /
                            (h * h);
            apply_yaw(out, spec.yaw_mode);
            break;
        }
    }
    return out;
}

}  // namespace

TruthSample sample_truth(const TrajectorySpec& spec, double t) {
    if (t < -1e-12 || t > spec.total_duration() + 1e-9) {
        throw OutOfRange(t);
    }
    const double tau = t - spec.static_lead;
    if (tau <= 0.0) {
        TruthSample hold = eval_motion(spec, 0.0);
        hold.vel.setZero();
        hold.acc_world.setZero();
        hold.omega_body.setZero();
        return hold;
    }
    return eval_motion(spec, tau);
}

NavState truth_nav_state(const TrajectorySpec& spec, double t) {
    const TruthSample s = sample_truth(spec, t);
    NavState x;
    x.rot = s.rot;
    x.pos = s.pos;
    x.vel = s.vel;
    x.gravity = kGravity;
    return x;
}

WorldModel WorldModel::room(double half_xy, double floor_z, double ceil_z) {
    WorldModel w;
    const double mid_z = 0.5 * (floor_z + ceil_z);
    const double half_z = 0.5 * (ceil_z - floor_z);
    w.planes.push_back({Vec3(0, 0, floor_z), Vec3::UnitX(), Vec3::UnitY(),
                        half_xy, half_xy});
    w.planes.push_back({Vec3(0, 0, ceil_z), Vec3::UnitY(), Vec3::UnitX(),
                        half_xy, half_xy});
    w.planes.push_back({Vec3(half_xy, 0, mid_z), Vec3::UnitY(), Vec3::UnitZ(),
                        half_xy, half_z});
    w.planes.push_back({Vec3(-half_xy, 0, mid_z), Vec3::UnitZ(), Vec3::UnitY(),
                        half_z, half_xy});
    w.planes.push_back({Vec3(0, half_xy, mid_z), Vec3::UnitZ(), Vec3::UnitX(),
                        half_z, half_xy});
    w.planes.push_back({Vec3(0, -half_xy, mid_z), Vec3::UnitX(), Vec3::UnitZ(),
                        half_xy, half_z});
    for (double sx : {-1.0, 1.0}) {
        for (double sy : {-1.0, 1.0}) {
            w.edges.push_back({Vec3(sx * half_xy, sy * half_xy, floor_z),
                               Vec3::UnitZ(), ceil_z - floor_z});
        }
    }
    return w;
}

WorldModel WorldModel::single_plane(double z, double half) {
    WorldModel w;
    w.planes.push_back({Vec3(0, 0, z), Vec3::UnitX(), Vec3::UnitY(), half, half});
    return w;
}

WorldModel WorldModel::corridor(double half_width, double length) {
    WorldModel w;
    w.planes.push_back({Vec3(0, half_width, 0), Vec3::UnitZ(), Vec3::UnitX(),
                        1.5, 0.5 * length});
    w.planes.push_back({Vec3(0, -half_width, 0), Vec3::UnitX(), Vec3::UnitZ(),
                        0.5 * length, 1.5});
    return w;
}

std::uint64_t SimRng::next_u64() {
    // splitmix64
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SimRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SimRng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
}

std::vector<ImuSample> synth_imu(const TrajectorySpec& spec,
                                 const SensorSpec& sensor) {
    SimRng rng(sensor.rng_seed);
    const double dt = 1.0 / sensor.imu_rate;
    const auto n = static_cast<std::size_t>(
        std::floor(spec.total_duration() * sensor.imu_rate + 0.5));
    std::vector<ImuSample> out;
    out.reserve(n + 1);

    Vec3 bg = sensor.bias_gyro_true;
    Vec3 ba = sensor.bias_acc_true;
    const double wg = sensor.gyro_walk_std * std::sqrt(dt);
    const double wa = sensor.accel_walk_std * std::sqrt(dt);
    auto gauss3 = [&rng]() {
        return Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
    };

    // Noise-free samples are synthesized as the equivalent inputs of the
    // zero-order-hold integrator (rates from relative rotations, forces from
    // position second differences), so integrating the clean stream lands
    // back on the analytic trajectory instead of accumulating first-order
    // quadrature drift.
    std::vector<TruthSample> truth(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        truth[i] = sample_truth(spec, static_cast<double>(i) * dt);
    }
    auto avg_vel = [&](std::size_t i) {
        return (truth[i + 1].pos - truth[i].pos) / dt;
    };

    for (std::size_t i = 0; i <= n; ++i) {
        ImuSample s;
        s.stamp = static_cast<double>(i) * dt;
        Vec3 omega, force;
        if (i + 1 < n) {
            omega = log_map(truth[i].rot.matrix().transpose() *
                            truth[i + 1].rot.matrix()) /
                    dt;
            force = truth[i].rot.matrix().transpose() *
                    ((avg_vel(i + 1) - avg_vel(i)) / dt - kGravity);
        } else {
            // The last inputs are only held over (at most) a partial step.
            omega = truth[i].omega_body;
            force = truth[i].rot.matrix().transpose() *
                    (truth[i].acc_world - kGravity);
        }
        s.gyro = omega + bg + sensor.gyro_noise_std * gauss3();
        s.acc = force + ba + sensor.accel_noise_std * gauss3();
        out.push_back(s);
        bg += wg * gauss3();
        ba += wa * gauss3();
    }
    return out;
}

SimScan synth_scan(const TrajectorySpec& spec, const SensorSpec& sensor,
                   const WorldModel& world, double t_begin, double t_end,
                   SimRng& rng) {
    if (world.planes.empty() && world.edges.empty()) {
        throw NoVisibleFeatures();
    }
    SimScan scan;
    scan.bundle.t_begin = t_begin;
    scan.bundle.t_end = t_end;
    const int m = sensor.points_per_scan;
    scan.bundle.points.reserve(m);
    scan.truth_world.reserve(m);

    for (int i = 0; i < m; ++i) {
        const double stamp =
            (i + 1 == m) ? t_end
                         : t_begin + (t_end - t_begin) * (i + 1) / static_cast<double>(m);
        const bool want_edge =
            !world.edges.empty() &&
            (world.planes.empty() || rng.uniform() < sensor.edge_fraction);

        Vec3 p_world;
        FeatureKind kind;
        if (want_edge) {
            const auto& e = world.edges[static_cast<std::size_t>(
                rng.uniform() * static_cast<double>(world.edges.size()))];
            p_world = e.anchor + rng.uniform() * e.length * e.dir;
            kind = FeatureKind::Edge;
        } else {
            const auto& pl = world.planes[static_cast<std::size_t>(
                rng.uniform() * static_cast<double>(world.planes.size()))];
            const double u1 = 2.0 * rng.uniform() - 1.0;
            const double u2 = 2.0 * rng.uniform() - 1.0;
            p_world = pl.center + u1 * pl.half1 * pl.axis1 + u2 * pl.half2 * pl.axis2;
            kind = FeatureKind::Plane;
        }

        const TruthSample truth = sample_truth(spec, stamp);
        const Mat3 rot_GL = truth.rot.matrix() * sensor.extrinsic.rot_IL.matrix();
        const Vec3 pos_GL = truth.rot * sensor.extrinsic.pos_IL + truth.pos;
        Vec3 p_lidar = rot_GL.transpose() * (p_world - pos_GL);
        if (sensor.point_noise_sigma > 0.0) {
            p_lidar += sensor.point_noise_sigma *
                       Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
        }
        scan.bundle.points.push_back(LidarPoint{stamp, p_lidar, kind});
        scan.truth_world.push_back(p_world);
    }
    return scan;
}

Dataset generate_dataset(const TrajectorySpec& spec, const SensorSpec& sensor,
                         const WorldModel& world) {
    Dataset ds;
    ds.imu = synth_imu(spec, sensor);
    SimRng scan_rng(sensor.rng_seed ^ 0xdeadbeefcafef00dULL);

    const double total = spec.total_duration();
    const auto n_scans =
        static_cast<std::size_t>(std::floor(total / sensor.scan_interval + 1e-9));
    for (std::size_t k = 1; k <= n_scans; ++k) {
        const double t_end = static_cast<double>(k) * sensor.scan_interval;
        const double t_begin = t_end - sensor.scan_interval;
        SimScan scan = synth_scan(spec, sensor, world, t_begin, t_end, scan_rng);
        // IMU slice covering [t_begin, t_end].
        for (const auto& s : ds.imu) {
            if (s.stamp >= t_begin - 1e-12 && s.stamp <= t_end + 1e-12) {
                scan.bundle.imu.push_back(s);
            }
        }
        ds.truth.emplace_back(t_end, sample_truth(spec, t_end));
        ds.scans.push_back(std::move(scan));
    }
    return ds;
}

}  // namespace lio
