// lio_odom: command-line harness around the lio library.
//
// Subcommands:
//   run        end-to-end odometry over IMU + points CSV files
//   simulate   write a synthetic dataset (IMU, points, ground truth)
//   bench-gain time the standard vs information-form Kalman gain
//   classify   label a raw (kind-less) points file by local curvature
//
// Every subcommand accepts --config FILE, a plain key=value file whose keys
// mirror the flags; explicit command-line flags override the file.
//
// Exit codes: 0 success, 2 parse/input error, 3 degenerate run (every scan
// degenerate), 4 numeric failure.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lio/dataset_io.hpp"
#include "lio/errors.hpp"
#include "lio/gain_bench.hpp"
#include "lio/pipeline.hpp"
#include "lio/sim.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitNumeric = 4;

struct RunArgs {
    std::string imu_path;
    std::string points_path;
    std::string truth_path;  // optional, enables the drift metric
    std::string out_dir = ".";
    double sigma_point = 0.02;
    double epsilon = 1e-3;
    int max_iterations = 10;
    double residual_gate = 0.5;
    int knn_k = 5;
    double init_duration = 2.0;
    double scan_interval = 0.02;
    int min_effective_points = 10;
    bool use_estimated_noise = false;
    double gyro_noise = 1e-3;
    double accel_noise = 1e-2;
    double gyro_walk = 1e-5;
    double accel_walk = 1e-5;
    std::vector<double> ext_rot{0.0, 0.0, 0.0};  // rotation vector, rad
    std::vector<double> ext_pos{0.0, 0.0, 0.0};  // meters
};

struct SimArgs {
    std::string out_dir = ".";
    std::string trajectory = "circle";
    std::string world = "room";
    double duration = 30.0;
    double static_lead = 2.5;
    double radius = 1.8;
    double period = 6.0;
    double height = 0.0;
    double ramp_time = 2.0;
    bool yaw_track = true;
    int points_per_scan = 200;
    double point_noise = 0.02;
    double gyro_noise = 1e-3;
    double accel_noise = 1e-2;
    double gyro_walk = 1e-5;
    double accel_walk = 1e-5;
    std::uint64_t seed = 1;
};

lio::Vec3 to_vec3(const std::vector<double>& v) {
    return lio::Vec3(v[0], v[1], v[2]);
}

void add_config(CLI::App* sub) {
    sub->set_config("--config", "", "plain key=value file mirroring the flags");
}

int do_run(const RunArgs& a) {
    const auto imu = lio::parse_imu_csv(a.imu_path);
    const auto parsed = lio::parse_points_csv(a.points_path);
    std::vector<lio::LidarPoint> points = parsed.labeled;
    if (points.empty() && !parsed.unlabeled.empty()) {
        points = lio::classify_features(parsed.unlabeled);
    }

    lio::RunConfig cfg;
    cfg.noise.sigma_point = a.sigma_point;
    cfg.iekf.epsilon = a.epsilon;
    cfg.iekf.max_iterations = a.max_iterations;
    cfg.correspondence.residual_gate = a.residual_gate;
    cfg.correspondence.k = a.knn_k;
    cfg.init_duration = a.init_duration;
    cfg.scan_interval = a.scan_interval;
    cfg.min_effective_points = a.min_effective_points;
    cfg.use_estimated_noise = a.use_estimated_noise;
    cfg.process_noise = lio::ProcessNoise::from_stds(a.gyro_noise, a.accel_noise,
                                                     a.gyro_walk, a.accel_walk);
    cfg.extrinsic.rot_IL = lio::Rotation3::from_exp(to_vec3(a.ext_rot));
    cfg.extrinsic.pos_IL = to_vec3(a.ext_pos);

    const lio::RunResult res = lio::run_odometry(imu, points, cfg);

    namespace fs = std::filesystem;
    fs::create_directories(a.out_dir);
    lio::write_trajectory((fs::path(a.out_dir) / "trajectory.txt").string(),
                          res.trajectory);
    lio::write_map_dump((fs::path(a.out_dir) / "map.txt").string(),
                        res.map.points());

    std::ofstream metrics(fs::path(a.out_dir) / "metrics.txt");
    metrics << "scans_total = " << res.metrics.scans_total << "\n"
            << "scans_degenerate = " << res.metrics.scans_degenerate << "\n"
            << "map_points = " << res.metrics.map_points << "\n"
            << "mean_effective_points = " << res.metrics.mean_effective_points
            << "\n"
            << "mean_scan_ms = " << res.metrics.mean_scan_ms << "\n"
            << "max_scan_ms = " << res.metrics.max_scan_ms << "\n";

    if (!a.truth_path.empty() && !res.trajectory.empty()) {
        const auto truth = lio::read_trajectory(a.truth_path);
        double path_length = 0.0;
        for (std::size_t i = 1; i < truth.size(); ++i) {
            path_length +=
                (truth[i].state.pos - truth[i - 1].state.pos).norm();
        }
        // Nearest truth record to the final estimate's stamp.
        const auto& last = res.trajectory.back();
        const lio::TrajectoryRecord* best = nullptr;
        for (const auto& t : truth) {
            if (!best ||
                std::abs(t.stamp - last.stamp) < std::abs(best->stamp - last.stamp)) {
                best = &t;
            }
        }
        const double err = (last.state.pos - best->state.pos).norm();
        metrics << "final_position_error_m = " << err << "\n"
                << "path_length_m = " << path_length << "\n";
        if (path_length > 0.0) {
            metrics << "drift_fraction = " << err / path_length << "\n";
        }
    }

    std::printf("scans %zu (degenerate %zu), map %zu points, mean %.2f ms/scan\n",
                res.metrics.scans_total, res.metrics.scans_degenerate,
                res.metrics.map_points, res.metrics.mean_scan_ms);
    if (res.metrics.mean_scan_ms > 25.0) {
        std::fprintf(stderr,
                     "warning: mean scan time %.2f ms exceeds the 25 ms "
                     "soft real-time target\n",
                     res.metrics.mean_scan_ms);
    }
    if (res.metrics.scans_total > 0 &&
        res.metrics.scans_degenerate == res.metrics.scans_total) {
        std::fprintf(stderr, "error: every scan was degenerate\n");
        return kExitDegenerate;
    }
    return 0;
}

int do_simulate(const SimArgs& a) {
    lio::TrajectorySpec spec;
    if (a.trajectory == "static") {
        spec.kind = lio::TrajectoryKind::Static;
    } else if (a.trajectory == "circle") {
        spec.kind = lio::TrajectoryKind::Circle;
    } else if (a.trajectory == "figure8") {
        spec.kind = lio::TrajectoryKind::Figure8;
    } else {
        std::fprintf(stderr, "error: unknown trajectory '%s'\n",
                     a.trajectory.c_str());
        return kExitParse;
    }
    spec.duration = a.duration;
    spec.static_lead = a.static_lead;
    spec.radius = a.radius;
    spec.period = a.period;
    spec.height = a.height;
    spec.ramp_time = a.ramp_time;
    spec.yaw_mode = a.yaw_track ? lio::YawMode::TrackVelocity
                                : lio::YawMode::Fixed;

    lio::WorldModel world;
    if (a.world == "room") {
        world = lio::WorldModel::room();
    } else if (a.world == "single-plane") {
        world = lio::WorldModel::single_plane();
    } else if (a.world == "corridor") {
        world = lio::WorldModel::corridor();
    } else {
        std::fprintf(stderr, "error: unknown world '%s'\n", a.world.c_str());
        return kExitParse;
    }

    lio::SensorSpec sensor;
    sensor.points_per_scan = a.points_per_scan;
    sensor.point_noise_sigma = a.point_noise;
    sensor.gyro_noise_std = a.gyro_noise;
    sensor.accel_noise_std = a.accel_noise;
    sensor.gyro_walk_std = a.gyro_walk;
    sensor.accel_walk_std = a.accel_walk;
    sensor.rng_seed = a.seed;

    const lio::Dataset ds = lio::generate_dataset(spec, sensor, world);

    std::vector<lio::LidarPoint> points;
    for (const auto& scan : ds.scans) {
        points.insert(points.end(), scan.bundle.points.begin(),
                      scan.bundle.points.end());
    }
    std::vector<lio::TrajectoryRecord> truth;
    for (const auto& [stamp, sample] : ds.truth) {
        lio::TrajectoryRecord rec;
        rec.stamp = stamp;
        rec.state.rot = sample.rot;
        rec.state.pos = sample.pos;
        rec.state.vel = sample.vel;
        truth.push_back(rec);
    }

    namespace fs = std::filesystem;
    fs::create_directories(a.out_dir);
    lio::write_imu_csv((fs::path(a.out_dir) / "imu.csv").string(), ds.imu);
    lio::write_points_csv((fs::path(a.out_dir) / "points.csv").string(), points);
    lio::write_trajectory((fs::path(a.out_dir) / "truth.txt").string(), truth);
    std::printf("wrote %zu IMU samples, %zu points, %zu truth records to %s\n",
                ds.imu.size(), points.size(), truth.size(), a.out_dir.c_str());
    return 0;
}

int do_bench(const std::vector<int>& sizes, int trials, std::uint64_t seed) {
    const auto rows = lio::benchmark_gain(sizes, trials, seed);
    std::printf("%8s %14s %12s %10s %12s\n", "m", "standard_ms", "fast_ms",
                "speedup", "rel_diff");
    for (const auto& r : rows) {
        std::printf("%8d %14.3f %12.3f %9.1fx %12.2e\n", r.m, r.standard_ms,
                    r.fast_ms, r.standard_ms / r.fast_ms, r.rel_diff);
    }
    return 0;
}

int do_classify(const std::string& input, const std::string& output,
                const lio::ClassifierConfig& cfg) {
    const auto parsed = lio::parse_points_csv(input);
    std::vector<lio::RawPoint> raw = parsed.unlabeled;
    // Already-labeled rows are stripped back to coordinates and re-labeled.
    for (const auto& p : parsed.labeled) {
        raw.push_back(lio::RawPoint{p.stamp, p.xyz});
    }
    const auto labeled = lio::classify_features(raw, cfg);
    lio::write_points_csv(output, labeled);
    std::printf("classified %zu of %zu points (%s)\n", labeled.size(),
                raw.size(), output.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LiDAR-inertial odometry harness"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "run odometry over dataset files");
    add_config(run);
    run->add_option("--imu", run_args.imu_path, "IMU CSV file")->required();
    run->add_option("--points", run_args.points_path, "points CSV file")
        ->required();
    run->add_option("--truth", run_args.truth_path,
                    "ground-truth trajectory for the drift metric");
    run->add_option("--out-dir", run_args.out_dir, "output directory");
    run->add_option("--sigma-point", run_args.sigma_point,
                    "per-point range noise std, m");
    run->add_option("--epsilon", run_args.epsilon,
                    "iterated-update convergence threshold");
    run->add_option("--max-iterations", run_args.max_iterations,
                    "iterated-update iteration cap");
    run->add_option("--residual-gate", run_args.residual_gate,
                    "correspondence residual gate, m");
    run->add_option("--knn-k", run_args.knn_k, "neighbors per feature fit");
    run->add_option("--init-duration", run_args.init_duration,
                    "static initialization window, s");
    run->add_option("--scan-interval", run_args.scan_interval,
                    "scan accumulation interval, s");
    run->add_option("--min-effective-points", run_args.min_effective_points,
                    "scans below this count are degenerate");
    run->add_flag("--use-estimated-noise", run_args.use_estimated_noise,
                  "take process noise from static initialization");
    run->add_option("--gyro-noise", run_args.gyro_noise,
                    "gyro noise std, rad/s");
    run->add_option("--accel-noise", run_args.accel_noise,
                    "accelerometer noise std, m/s^2");
    run->add_option("--gyro-walk", run_args.gyro_walk,
                    "gyro bias walk std, rad/s/sqrt(s)");
    run->add_option("--accel-walk", run_args.accel_walk,
                    "accel bias walk std, m/s^2/sqrt(s)");
    run->add_option("--ext-rot", run_args.ext_rot,
                    "LiDAR-to-IMU rotation vector, rad")
        ->expected(3);
    run->add_option("--ext-pos", run_args.ext_pos,
                    "LiDAR-to-IMU translation, m")
        ->expected(3);

    SimArgs sim_args;
    CLI::App* sim = app.add_subcommand("simulate", "write a synthetic dataset");
    add_config(sim);
    sim->add_option("--out-dir", sim_args.out_dir, "output directory");
    sim->add_option("--trajectory", sim_args.trajectory,
                    "static | circle | figure8");
    sim->add_option("--world", sim_args.world,
                    "room | single-plane | corridor");
    sim->add_option("--duration", sim_args.duration, "motion duration, s");
    sim->add_option("--static-lead", sim_args.static_lead,
                    "standstill before the motion, s");
    sim->add_option("--radius", sim_args.radius, "circle radius, m");
    sim->add_option("--period", sim_args.period, "loop period, s");
    sim->add_option("--height", sim_args.height, "path height, m");
    sim->add_option("--ramp-time", sim_args.ramp_time, "rate ramp-up, s");
    sim->add_flag("--yaw-track,!--yaw-fixed", sim_args.yaw_track,
                  "yaw follows the velocity direction");
    sim->add_option("--points-per-scan", sim_args.points_per_scan);
    sim->add_option("--point-noise", sim_args.point_noise,
                    "point noise std, m");
    sim->add_option("--gyro-noise", sim_args.gyro_noise);
    sim->add_option("--accel-noise", sim_args.accel_noise);
    sim->add_option("--gyro-walk", sim_args.gyro_walk);
    sim->add_option("--accel-walk", sim_args.accel_walk);
    sim->add_option("--seed", sim_args.seed, "RNG seed");

    std::vector<int> bench_sizes = {307, 717, 998, 1243, 1453, 1802};
    int bench_trials = 11;
    std::uint64_t bench_seed = 1;
    CLI::App* bench =
        app.add_subcommand("bench-gain", "time both Kalman gain formulas");
    add_config(bench);
    bench->add_option("--sizes", bench_sizes, "measurement dimensions");
    bench->add_option("--trials", bench_trials, "repetitions per size");
    bench->add_option("--seed", bench_seed, "RNG seed");

    std::string cls_input, cls_output = "labeled.csv";
    lio::ClassifierConfig cls_cfg;
    CLI::App* cls =
        app.add_subcommand("classify", "label raw points by local curvature");
    add_config(cls);
    cls->add_option("--input", cls_input, "raw points CSV")->required();
    cls->add_option("--output", cls_output, "labeled points CSV");
    cls->add_option("--neighborhood", cls_cfg.neighborhood,
                    "one-sided neighbor count");
    cls->add_option("--plane-threshold", cls_cfg.plane_threshold,
                    "curvature below is planar");
    cls->add_option("--edge-threshold", cls_cfg.edge_threshold,
                    "curvature above is an edge");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitParse;
    }

    try {
        if (run->parsed()) {
            return do_run(run_args);
        }
        if (sim->parsed()) {
            return do_simulate(sim_args);
        }
        if (bench->parsed()) {
            return do_bench(bench_sizes, bench_trials, bench_seed);
        }
        if (cls->parsed()) {
            return do_classify(cls_input, cls_output, cls_cfg);
        }
    } catch (const lio::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitParse;
    } catch (const lio::NonMonotonicStamps& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitParse;
    } catch (const lio::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
    return 0;
}
