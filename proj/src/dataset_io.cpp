#include "lio/dataset_io.hpp"

#include <charconv>

#include <Eigen/Geometry>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "lio/errors.hpp"

namespace lio {

namespace {

struct LineParser {
    const std::string& path;
    std::size_t line;
    std::size_t line_start;  // byte offset of the current line
    const char* cur;
    const char* end;

    void skip_ws() {
        while (cur != end && (*cur == ' ' || *cur == '\t')) {
            ++cur;
        }
    }

    [[noreturn]] void fail(const char* what, const char* at) const {
        throw ParseError(path, line, line_start + static_cast<std::size_t>(at - begin_),
                         what);
    }

    const char* begin_;

    double number() {
        skip_ws();
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(cur, end, v);
        if (ec != std::errc{}) {
            fail("expected a number", cur);
        }
        cur = ptr;
        return v;
    }

    bool comma() {
        skip_ws();
        if (cur != end && *cur == ',') {
            ++cur;
            return true;
        }
        return false;
    }

    bool done() {
        skip_ws();
        return cur == end;
    }
};

bool is_blank(const std::string& s) {
    for (char c : s) {
        if (c != ' ' && c != '\t' && c != '\r') {
            return false;
        }
    }
    return true;
}

std::string chomp(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) {
        s.pop_back();
    }
    return s;
}

void for_each_line(const std::string& path,
                   const std::function<void(LineParser&)>& fn) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path, 0, 0, "cannot open file");
    }
    std::string raw;
    std::size_t line = 0;
    std::size_t offset = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::size_t this_offset = offset;
        offset += raw.size() + 1;
        std::string s = chomp(raw);
        if (is_blank(s) || s[0] == '#') {
            continue;
        }
        LineParser p{path, line, this_offset, s.data(), s.data() + s.size(),
                     s.data()};
        fn(p);
    }
}

}  // namespace

std::vector<ImuSample> parse_imu_csv(const std::string& path) {
    std::vector<ImuSample> out;
    for_each_line(path, [&](LineParser& p) {
        ImuSample s;
        const double stamp_ns = p.number();
        s.stamp = stamp_ns * 1e-9;
        for (int i = 0; i < 3; ++i) {
            if (!p.comma()) p.fail("expected ','", p.cur);
            s.gyro[i] = p.number();
        }
        for (int i = 0; i < 3; ++i) {
            if (!p.comma()) p.fail("expected ','", p.cur);
            s.acc[i] = p.number();
        }
        if (!p.done()) p.fail("trailing characters", p.cur);
        if (!out.empty() && s.stamp <= out.back().stamp) {
            throw NonMonotonicStamps(path + " line " + std::to_string(p.line));
        }
        out.push_back(s);
    });
    return out;
}

ParsedPoints parse_points_csv(const std::string& path) {
    ParsedPoints out;
    double last_stamp = -1.0;
    for_each_line(path, [&](LineParser& p) {
        const double stamp = p.number() * 1e-9;
        Vec3 xyz;
        for (int i = 0; i < 3; ++i) {
            if (!p.comma()) p.fail("expected ','", p.cur);
            xyz[i] = p.number();
        }
        if (stamp < last_stamp) {
            throw NonMonotonicStamps(path + " line " + std::to_string(p.line));
        }
        last_stamp = stamp;
        if (p.comma()) {
            p.skip_ws();
            if (p.cur == p.end) p.fail("expected kind P or E", p.cur);
            const char k = *p.cur++;
            if (k != 'P' && k != 'E') p.fail("kind must be P or E", p.cur - 1);
            if (!p.done()) p.fail("trailing characters", p.cur);
            out.labeled.push_back(LidarPoint{
                stamp, xyz, k == 'P' ? FeatureKind::Plane : FeatureKind::Edge});
        } else {
            if (!p.done()) p.fail("trailing characters", p.cur);
            out.unlabeled.push_back(RawPoint{stamp, xyz});
        }
    });
    return out;
}

void write_imu_csv(const std::string& path, const std::vector<ImuSample>& imu) {
    std::ofstream out(path);
    char buf[256];
    for (const auto& s : imu) {
        std::snprintf(buf, sizeof(buf),
                      "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      static_cast<long long>(std::llround(s.stamp * 1e9)),
                      s.gyro.x(), s.gyro.y(), s.gyro.z(), s.acc.x(), s.acc.y(),
                      s.acc.z());
        out << buf;
    }
}

void write_points_csv(const std::string& path,
                      const std::vector<LidarPoint>& points) {
    std::ofstream out(path);
    char buf[256];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%c\n",
                      static_cast<long long>(std::llround(p.stamp * 1e9)),
                      p.xyz.x(), p.xyz.y(), p.xyz.z(),
                      p.kind == FeatureKind::Plane ? 'P' : 'E');
        out << buf;
    }
}

void write_trajectory(const std::string& path,
                      const std::vector<TrajectoryRecord>& records) {
    std::ofstream out(path);
    char buf[512];
    for (const auto& r : records) {
        const Eigen::Quaterniond q(r.state.rot.matrix());
        std::snprintf(buf, sizeof(buf),
                      "%.9f %.17g %.17g %.17g %.17g %.17g %.17g %.17g "
                      "%.17g %.17g %.17g\n",
                      r.stamp, r.state.pos.x(), r.state.pos.y(), r.state.pos.z(),
                      q.w(), q.x(), q.y(), q.z(), r.state.vel.x(),
                      r.state.vel.y(), r.state.vel.z());
        out << buf;
    }
}

std::vector<TrajectoryRecord> read_trajectory(const std::string& path) {
    std::vector<TrajectoryRecord> out;
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path, 0, 0, "cannot open file");
    }
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (is_blank(line)) continue;
        std::istringstream ss(line);
        TrajectoryRecord r;
        double qw, qx, qy, qz;
        if (!(ss >> r.stamp >> r.state.pos.x() >> r.state.pos.y() >>
              r.state.pos.z() >> qw >> qx >> qy >> qz >> r.state.vel.x() >>
              r.state.vel.y() >> r.state.vel.z())) {
            throw ParseError(path, n, 0, "malformed trajectory line");
        }
        r.state.rot = Rotation3(
            Eigen::Quaterniond(qw, qx, qy, qz).normalized().toRotationMatrix());
        out.push_back(r);
    }
    return out;
}

void write_map_dump(const std::string& path, const std::vector<MapPoint>& points) {
    std::ofstream out(path);
    char buf[256];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %c\n", p.xyz.x(),
                      p.xyz.y(), p.xyz.z(),
                      p.kind == FeatureKind::Plane ? 'P' : 'E');
        out << buf;
    }
}

std::vector<LidarPoint> classify_features(const std::vector<RawPoint>& raw,
                                          const ClassifierConfig& cfg) {
    const int nb = cfg.neighborhood;
    if (raw.size() < static_cast<std::size_t>(2 * nb + 1)) {
        throw TooFewPoints(raw.size());
    }
    std::vector<LidarPoint> out;
    for (std::size_t j = static_cast<std::size_t>(nb);
         j + static_cast<std::size_t>(nb) < raw.size(); ++j) {
        Vec3 sum = Vec3::Zero();
        for (int i = -nb; i <= nb; ++i) {
            if (i == 0) continue;
            sum += raw[j + static_cast<std::size_t>(i)].xyz - raw[j].xyz;
        }
        const double range = raw[j].xyz.norm();
        if (range < 1e-9) continue;
        const double c = sum.norm() / (2.0 * nb * range);
        if (c < cfg.plane_threshold) {
            out.push_back(LidarPoint{raw[j].stamp, raw[j].xyz, FeatureKind::Plane});
        } else if (c > cfg.edge_threshold) {
            out.push_back(LidarPoint{raw[j].stamp, raw[j].xyz, FeatureKind::Edge});
        }
    }
    return out;
}

}  // namespace lio
