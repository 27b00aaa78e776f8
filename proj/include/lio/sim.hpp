#ifndef LIO_SIM_HPP
#define LIO_SIM_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "lio/propagation.hpp"

namespace lio {

inline const Vec3 kGravity{0.0, 0.0, -9.81};

enum class TrajectoryKind { Static, Circle, Figure8, SplineWaypoints };
enum class YawMode { Fixed, TrackVelocity };

/// Analytic trajectory. All kinds start at the origin with identity attitude
/// and zero velocity (motion kinds ramp up smoothly over `ramp_time`), so the
/// global frame coincides with the first IMU frame. An optional static hold
/// of `static_lead` seconds precedes the motion.
struct TrajectorySpec {
    TrajectoryKind kind = TrajectoryKind::Static;
    double duration = 30.0;   // seconds of motion (excluding static_lead)
    double static_lead = 0.0; // seconds of standstill before the motion

    // Circle (also reused by Figure8 for the period).
    double radius = 1.8;      // m
    double period = 6.0;      // s
    double height = 0.0;      // constant z offset of the path, m
    double ramp_time = 2.0;   // s to reach full rate
    YawMode yaw_mode = YawMode::Fixed;

    // Figure8 amplitudes.
    double fig8_amp_x = 2.0;
    double fig8_amp_y = 1.0;

    // SplineWaypoints: (time, position) knots, strictly increasing times.
    std::vector<std::pair<double, Vec3>> waypoints;

    double total_duration() const { return static_lead + duration; }
};

struct TruthSample {
    Rotation3 rot;
    Vec3 pos = Vec3::Zero();
    Vec3 vel = Vec3::Zero();
    Vec3 acc_world = Vec3::Zero();   // excluding gravity
    Vec3 omega_body = Vec3::Zero();  // rad/s
};

/// Closed-form pose/velocity at t. Throws OutOfRange outside [0, total].
TruthSample sample_truth(const TrajectorySpec& spec, double t);

/// Ground-truth NavState at t (zero biases, gravity (0,0,-9.81)).
NavState truth_nav_state(const TrajectorySpec& spec, double t);

struct PlaneFeature {
    Vec3 center = Vec3::Zero();
    Vec3 axis1 = Vec3::UnitX();  // in-plane, unit
    Vec3 axis2 = Vec3::UnitY();  // in-plane, unit, orthogonal to axis1
    double half1 = 1.0;          // m
    double half2 = 1.0;          // m
    Vec3 normal() const { return axis1.cross(axis2).normalized(); }
};

struct EdgeFeature {
    Vec3 anchor = Vec3::Zero();
    Vec3 dir = Vec3::UnitZ();  // unit
    double length = 1.0;       // m
};

struct WorldModel {
    std::vector<PlaneFeature> planes;
    std::vector<EdgeFeature> edges;

    /// Closed room (floor, ceiling, four walls) plus vertical corner edges.
    static WorldModel room(double half_xy = 4.0, double floor_z = -1.4,
                           double ceil_z = 1.6);
    /// Degenerate world: one horizontal plane only.
    static WorldModel single_plane(double z = -1.4, double half = 12.0);
    /// Two parallel walls (corridor degeneration preset).
    static WorldModel corridor(double half_width = 2.0, double length = 30.0);
};

struct SensorSpec {
    double imu_rate = 200.0;      // Hz
    double scan_interval = 0.02;  // s
    int points_per_scan = 200;
    double edge_fraction = 0.1;   // share of points drawn from edges

    double point_noise_sigma = 0.0;  // m, isotropic
    // Discrete white-noise stds at imu_rate and per-sample random-walk rates.
    double gyro_noise_std = 0.0;     // rad/s
    double accel_noise_std = 0.0;    // m/s^2
    double gyro_walk_std = 0.0;      // rad/s per sqrt(s) driving noise
    double accel_walk_std = 0.0;     // m/s^2 per sqrt(s) driving noise
    Vec3 bias_gyro_true = Vec3::Zero();
    Vec3 bias_acc_true = Vec3::Zero();

    Extrinsic extrinsic;
    std::uint64_t rng_seed = 1;
};

/// Deterministic RNG: xoshiro-free, fixed Box-Muller gaussian over
/// mt19937_64 so identical seeds give bitwise-identical streams.
class SimRng {
  public:
    explicit SimRng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
    double uniform();   // [0, 1)
    double gaussian();  // N(0, 1)
    std::uint64_t next_u64();

  private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// IMU stream over [0, total_duration], with bias random walk and white noise.
std::vector<ImuSample> synth_imu(const TrajectorySpec& spec,
                                 const SensorSpec& sensor);

struct SimScan {
    ScanBundle bundle;
    std::vector<Vec3> truth_world;  // ground-truth world coords per point
};

/// One scan over (t_begin, t_end]: timestamps spread uniformly, last exactly
/// at t_end; each point expressed in the LiDAR frame at its own stamp.
/// Throws NoVisibleFeatures on an empty world.
SimScan synth_scan(const TrajectorySpec& spec, const SensorSpec& sensor,
                   const WorldModel& world, double t_begin, double t_end,
                   SimRng& rng);

struct Dataset {
    std::vector<ImuSample> imu;
    std::vector<SimScan> scans;
    // Ground truth at every scan end: (stamp, truth).
    std::vector<std::pair<double, TruthSample>> truth;
};

/// Full deterministic dataset: IMU stream plus one scan per interval.
Dataset generate_dataset(const TrajectorySpec& spec, const SensorSpec& sensor,
                         const WorldModel& world);

}  // namespace lio

#endif  // LIO_SIM_HPP
