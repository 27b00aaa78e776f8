#ifndef LIO_PIPELINE_HPP
#define LIO_PIPELINE_HPP

#include <vector>

#include "lio/dataset_io.hpp"
#include "lio/iekf.hpp"

namespace lio {

struct RunConfig {
    IekfConfig iekf;
    MeasurementNoise noise;
    ProcessNoise process_noise = ProcessNoise::simulator_matched();
    Extrinsic extrinsic;
    CorrespondenceConfig correspondence;
    double init_duration = 2.0;   // s of static data consumed at the start
    double scan_interval = 0.02;  // s
    int min_effective_points = 10;
    bool use_estimated_noise = false;  // take Q from static_initialize instead
};

struct RunMetrics {
    double mean_scan_ms = 0.0;
    double max_scan_ms = 0.0;
    double mean_effective_points = 0.0;
    std::size_t scans_total = 0;
    std::size_t scans_degenerate = 0;
    std::size_t map_points = 0;
};

struct RunResult {
    std::vector<TrajectoryRecord> trajectory;  // one record per scan
    FeatureMap map;
    RunMetrics metrics;
    InitResult init;
};

/// End-to-end odometry over parsed streams: static initialization, then per
/// scan forward propagation, motion compensation, iterated update, and map
/// append. Degenerate scans (no correspondences or too few effective points)
/// carry the prior forward and are flagged.
RunResult run_odometry(const std::vector<ImuSample>& imu,
                       const std::vector<LidarPoint>& points,
                       const RunConfig& cfg);

}  // namespace lio

#endif  // LIO_PIPELINE_HPP
