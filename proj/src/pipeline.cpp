#include "lio/pipeline.hpp"

#include <algorithm>
#include <chrono>

namespace lio {

RunResult run_odometry(const std::vector<ImuSample>& imu,
                       const std::vector<LidarPoint>& points,
                       const RunConfig& cfg) {
    if (imu.empty()) {
        throw EmptyImu();
    }
    RunResult result;
    result.init = static_initialize(imu, cfg.init_duration);
    const ProcessNoise q =
        cfg.use_estimated_noise ? result.init.q : cfg.process_noise;

    IekfConfig iekf_cfg = cfg.iekf;
    iekf_cfg.residual_gate = cfg.correspondence.residual_gate;
    iekf_cfg.knn_k = cfg.correspondence.k;

    NavState x_opt = result.init.x;
    Mat18 p_opt = result.init.p;

    const double t0 = imu.front().stamp + cfg.init_duration;
    const double t_last = imu.back().stamp;
    double t_prev = t0;

    std::size_t pt_idx = 0;
    while (pt_idx < points.size() && points[pt_idx].stamp <= t0) {
        ++pt_idx;
    }

    double total_ms = 0.0;
    double total_effective = 0.0;

    for (std::size_t k = 1;; ++k) {
        const double t_k = t0 + static_cast<double>(k) * cfg.scan_interval;
        if (t_k > t_last + 1e-9) {
            break;
        }
        const auto start = std::chrono::steady_clock::now();

        // IMU slice: zero-order hold from the boundary, then samples inside.
        std::vector<ImuSample> slice;
        {
            auto it = std::upper_bound(
                imu.begin(), imu.end(), t_prev,
                [](double v, const ImuSample& s) { return v < s.stamp; });
            if (it == imu.begin()) {
                throw MissingLeftImu();
            }
            ImuSample held = *(it - 1);
            held.stamp = t_prev;
            slice.push_back(held);
            for (; it != imu.end() && it->stamp <= t_k + 1e-12; ++it) {
                slice.push_back(*it);
            }
            // Rounding of t_k can land a hair before the matching sample.
            if (slice.back().stamp > t_k) {
                slice.back().stamp = t_k;
            }
        }

        std::vector<LidarPoint> scan_points;
        while (pt_idx < points.size() && points[pt_idx].stamp <= t_k + 1e-12) {
            scan_points.push_back(points[pt_idx]);
            ++pt_idx;
        }

        auto [x_pred, p_pred] = forward_propagate(x_opt, p_opt, slice, t_k, q);

        TrajectoryRecord rec;
        rec.stamp = t_k;

        if (scan_points.empty()) {
            x_opt = x_pred;
            p_opt = p_pred;
            rec.degenerate = true;
        } else {
            ScanBundle bundle;
            bundle.points = scan_points;
            bundle.imu = slice;
            bundle.t_begin = t_prev;
            bundle.t_end = t_k;
            const auto rel_poses = backward_propagate(bundle, x_pred);

            std::vector<LidarPoint> at_end;
            at_end.reserve(scan_points.size());
            for (std::size_t j = 0; j < scan_points.size(); ++j) {
                at_end.push_back(LidarPoint{
                    t_k,
                    project_to_scan_end(scan_points[j], rel_poses[j].second,
                                        cfg.extrinsic),
                    scan_points[j].kind});
            }

            // Drop kinds the map cannot match yet (e.g. edges before any
            // edge has been appended) instead of failing the whole scan.
            std::vector<LidarPoint> usable;
            usable.reserve(at_end.size());
            for (const auto& p : at_end) {
                if (result.map.size(p.kind) >= 5) {
                    usable.push_back(p);
                }
            }

            bool degenerate = false;
            if (usable.empty()) {
                degenerate = true;
            } else {
                try {
                    UpdateResult upd =
                        iterated_update(x_pred, p_pred, usable, result.map,
                                        cfg.extrinsic, iekf_cfg, cfg.noise);
                    if (upd.effective_points < cfg.min_effective_points) {
                        degenerate = true;
                    } else {
                        x_opt = upd.x;
                        p_opt = upd.p;
                        rec.iterations_used = upd.iterations_used;
                        rec.effective_points = upd.effective_points;
                    }
                } catch (const NoCorrespondences&) {
                    degenerate = true;
                }
            }
            if (degenerate) {
                x_opt = x_pred;
                p_opt = p_pred;
                rec.degenerate = true;
            }
            append_scan(result.map, x_opt, cfg.extrinsic, at_end);
        }

        const auto stop = std::chrono::steady_clock::now();
        rec.state = x_opt;
        rec.proc_time_us =
            std::chrono::duration<double, std::micro>(stop - start).count();
        total_ms += rec.proc_time_us / 1000.0;
        total_effective += rec.effective_points;
        result.metrics.max_scan_ms =
            std::max(result.metrics.max_scan_ms, rec.proc_time_us / 1000.0);
        if (rec.degenerate) {
            ++result.metrics.scans_degenerate;
        }
        result.trajectory.push_back(rec);
        t_prev = t_k;
    }

    const auto n = result.trajectory.size();
    result.metrics.scans_total = n;
    if (n > 0) {
        result.metrics.mean_scan_ms = total_ms / static_cast<double>(n);
        result.metrics.mean_effective_points =
            total_effective / static_cast<double>(n);
    }
    result.metrics.map_points = result.map.size();
    return result;
}

}  // namespace lio
