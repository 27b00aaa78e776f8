#include "lio/gain_bench.hpp"

#include <algorithm>
#include <chrono>

#include "lio/errors.hpp"
#include "lio/sim.hpp"

namespace lio {

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

RandomGainProblem random_gain_problem(int m, std::uint64_t seed) {
    SimRng rng(seed);
    RandomGainProblem pr;
    Mat18 a;
    for (int i = 0; i < 18; ++i) {
        for (int j = 0; j < 18; ++j) {
            a(i, j) = rng.gaussian();
        }
    }
    pr.p = a * a.transpose() + 1e-3 * Mat18::Identity();
    pr.h.resize(m, 18);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < 18; ++j) {
            pr.h(i, j) = rng.gaussian();
        }
    }
    pr.r_diag.resize(m);
    for (int i = 0; i < m; ++i) {
        pr.r_diag(i) = 0.1 + rng.uniform();
    }
    return pr;
}

std::vector<GainBenchRow> benchmark_gain(const std::vector<int>& m_list,
                                         int trials, std::uint64_t seed) {
    using clock = std::chrono::steady_clock;
    std::vector<GainBenchRow> rows;
    for (int m : m_list) {
        const RandomGainProblem pr = random_gain_problem(m, seed + static_cast<std::uint64_t>(m));
        const Eigen::MatrixXd r_dense =
            Eigen::MatrixXd(pr.r_diag.asDiagonal());

        // Correctness gates the timing.
        const Eigen::MatrixXd k_std = gain_standard(pr.p, pr.h, r_dense);
        const Eigen::MatrixXd k_fast = gain_fast(pr.p, pr.h, pr.r_diag);
        const double rel = (k_fast - k_std).norm() / k_std.norm();
        if (rel > 1e-9) {
            throw Error("gain equivalence check failed at m=" + std::to_string(m) +
                        ", relative difference " + std::to_string(rel));
        }

        std::vector<double> t_std, t_fast;
        volatile double sink = 0.0;
        for (int t = 0; t < trials; ++t) {
            auto s0 = clock::now();
            sink += gain_standard(pr.p, pr.h, r_dense).sum();
            auto s1 = clock::now();
            sink += gain_fast(pr.p, pr.h, pr.r_diag).sum();
            auto s2 = clock::now();
            t_std.push_back(std::chrono::duration<double, std::milli>(s1 - s0).count());
            t_fast.push_back(std::chrono::duration<double, std::milli>(s2 - s1).count());
        }
        rows.push_back(GainBenchRow{m, median(t_std), median(t_fast), rel});
    }
    return rows;
}

}  // namespace lio
