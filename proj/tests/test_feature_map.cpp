#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "lio/feature_map.hpp"
#include "lio/sim.hpp"

using namespace lio;

namespace {

Vec3 rand_vec(SimRng& rng, double s) {
    return s * Vec3(2 * rng.uniform() - 1, 2 * rng.uniform() - 1,
                    2 * rng.uniform() - 1);
}

std::vector<KdTree3::Hit> brute_knn(const std::vector<Vec3>& coords,
                                    const Vec3& query, std::size_t k) {
    std::vector<KdTree3::Hit> all;
    all.reserve(coords.size());
    for (std::uint32_t i = 0; i < coords.size(); ++i) {
        all.push_back(KdTree3::Hit{(coords[i] - query).squaredNorm(), i});
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.dist_sq < b.dist_sq || (a.dist_sq == b.dist_sq && a.id < b.id);
    });
    if (all.size() > k) {
        all.resize(k);
    }
    return all;
}

std::vector<MapPoint> grid_plane(double z, int n, double spacing,
                                 FeatureKind kind = FeatureKind::Plane) {
    std::vector<MapPoint> out;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out.push_back(MapPoint{Vec3(i * spacing, j * spacing, z), kind});
        }
    }
    return out;
}

}  // namespace

TEST_CASE("kd-tree knn equals brute force on random clouds") {
    SimRng rng(41);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 50 + static_cast<std::size_t>(rng.uniform() * 3000);
        std::vector<Vec3> coords;
        coords.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            coords.push_back(rand_vec(rng, 10.0));
        }
        std::vector<std::uint32_t> ids(n);
        for (std::uint32_t i = 0; i < n; ++i) ids[i] = i;
        KdTree3 tree;
        tree.build(coords, ids);

        std::vector<KdTree3::Hit> hits;
        for (int q = 0; q < 50; ++q) {
            const Vec3 query = rand_vec(rng, 12.0);
            for (std::size_t k : {1u, 5u, 20u}) {
                tree.knn(coords, query, k, hits);
                const auto ref = brute_knn(coords, query, k);
                REQUIRE(hits.size() == ref.size());
                for (std::size_t i = 0; i < hits.size(); ++i) {
                    CHECK(hits[i].id == ref[i].id);
                    CHECK(hits[i].dist_sq == ref[i].dist_sq);
                }
            }
        }
    }
}

TEST_CASE("kd-tree edge cases") {
    KdTree3 tree;
    std::vector<Vec3> coords;
    std::vector<KdTree3::Hit> hits;
    tree.knn(coords, Vec3::Zero(), 3, hits);
    CHECK(hits.empty());

    coords = {Vec3(1, 0, 0), Vec3(2, 0, 0)};
    tree.build(coords, {0, 1});
    tree.knn(coords, Vec3::Zero(), 10, hits);  // k beyond the tree size
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].id == 0);
    CHECK(hits[1].id == 1);
}

TEST_CASE("feature map knn basics") {
    FeatureMap map;
    CHECK_THROWS_AS(map.knn(Vec3::Zero(), 1, FeatureKind::Plane), EmptyMap);

    map.append(MapPoint{Vec3::Zero(), FeatureKind::Plane});
    const auto one = map.knn(Vec3(1, 0, 0), 1, FeatureKind::Plane);
    REQUIRE(one.size() == 1);
    CHECK(one[0].xyz.norm() == 0.0);

    // Kinds are separate stores.
    CHECK_THROWS_AS(map.knn(Vec3::Zero(), 1, FeatureKind::Edge), EmptyMap);

    SimRng rng(43);
    std::vector<Vec3> coords{Vec3::Zero()};
    for (int i = 0; i < 99; ++i) {
        const Vec3 p = rand_vec(rng, 5.0);
        coords.push_back(p);
        map.append(MapPoint{p, FeatureKind::Plane});
    }
    for (int q = 0; q < 30; ++q) {
        const Vec3 query = rand_vec(rng, 6.0);
        const auto got = map.knn(query, 5, FeatureKind::Plane);
        const auto ref = brute_knn(coords, query, 5);
        REQUIRE(got.size() == 5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK((got[i].xyz - coords[ref[i].id]).norm() == 0.0);
        }
    }

    // Self-query returns the exact point first with distance zero.
    const auto self = map.knn(coords[17], 3, FeatureKind::Plane);
    CHECK((self[0].xyz - coords[17]).norm() == 0.0);
}

TEST_CASE("feature map stays exact across incremental appends") {
    SimRng rng(47);
    FeatureMap map;
    std::vector<Vec3> plane_coords, edge_coords;
    for (int round = 0; round < 60; ++round) {
        const int batch = 1 + static_cast<int>(rng.uniform() * 40);
        std::vector<MapPoint> pts;
        for (int i = 0; i < batch; ++i) {
            const bool edge = rng.uniform() < 0.3;
            const Vec3 p = rand_vec(rng, 8.0);
            (edge ? edge_coords : plane_coords).push_back(p);
            pts.push_back(
                MapPoint{p, edge ? FeatureKind::Edge : FeatureKind::Plane});
        }
        const std::size_t before = map.size();
        map.append(pts);
        CHECK(map.size() == before + pts.size());  // append-only, no dedup

        const Vec3 query = rand_vec(rng, 8.0);
        for (auto [kind, coords] :
             {std::pair{FeatureKind::Plane, &plane_coords},
              std::pair{FeatureKind::Edge, &edge_coords}}) {
            if (coords->empty()) continue;
            const auto got = map.knn(query, 5, kind);
            const auto ref = brute_knn(*coords, query, 5);
            REQUIRE(got.size() == ref.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK((got[i].xyz - (*coords)[ref[i].id]).norm() == 0.0);
            }
        }
    }
}

TEST_CASE("fit_plane examples") {
    std::vector<MapPoint> pts = {
        {Vec3(0, 0, 1), FeatureKind::Plane}, {Vec3(1, 0, 1), FeatureKind::Plane},
        {Vec3(0, 1, 1), FeatureKind::Plane}, {Vec3(1, 1, 1), FeatureKind::Plane},
        {Vec3(0.5, 0.5, 1), FeatureKind::Plane}};
    const auto corr = fit_plane(pts);
    REQUIRE(corr.has_value());
    CHECK(std::abs(std::abs(corr->u.z()) - 1.0) < 1e-12);
    CHECK((corr->q - Vec3(0.5, 0.5, 1)).norm() < 1e-12);
    CHECK(corr->projector_kind == FeatureKind::Plane);

    // Normal oriented toward the view point when one is given.
    const auto up = fit_plane(pts, {}, Vec3(0.5, 0.5, 3.0));
    REQUIRE(up.has_value());
    CHECK(up->u.z() > 0.0);
    const auto down = fit_plane(pts, {}, Vec3(0.5, 0.5, -3.0));
    REQUIRE(down.has_value());
    CHECK(down->u.z() < 0.0);

    SimRng rng(53);
    std::vector<MapPoint> noisy;
    for (int i = 0; i < 5; ++i) {
        noisy.push_back(MapPoint{Vec3(rng.uniform(), rng.uniform(),
                                      1.0 + 0.001 * rng.gaussian()),
                                 FeatureKind::Plane});
    }
    const auto fitted = fit_plane(noisy);
    REQUIRE(fitted.has_value());
    CHECK(std::acos(std::min(1.0, std::abs(fitted->u.z()))) < 0.01);

    std::vector<MapPoint> collinear;
    for (int i = 0; i < 5; ++i) {
        collinear.push_back(MapPoint{Vec3(i, 0, 0), FeatureKind::Plane});
    }
    CHECK_FALSE(fit_plane(collinear).has_value());

    CHECK_THROWS_AS(fit_plane({pts.begin(), pts.begin() + 4}), TooFewNeighbors);
}

TEST_CASE("fit_plane consistency: resampling a fit reproduces the normal") {
    SimRng rng(59);
    std::vector<MapPoint> noisy;
    for (int i = 0; i < 8; ++i) {
        const double x = 2 * rng.uniform() - 1, y = 2 * rng.uniform() - 1;
        noisy.push_back(MapPoint{
            Vec3(x, y, 0.2 * x - 0.4 * y + 0.002 * rng.gaussian()),
            FeatureKind::Plane});
    }
    const auto first = fit_plane(noisy);
    REQUIRE(first.has_value());

    // Exact samples of the fitted plane.
    const Vec3 a1 = first->u.unitOrthogonal();
    const Vec3 a2 = first->u.cross(a1);
    std::vector<MapPoint> exact;
    for (int i = 0; i < 6; ++i) {
        exact.push_back(MapPoint{first->q + rng.uniform() * a1 +
                                     (2 * rng.uniform() - 1) * a2,
                                 FeatureKind::Plane});
    }
    const auto second = fit_plane(exact);
    REQUIRE(second.has_value());
    CHECK(1.0 - std::abs(second->u.dot(first->u)) < 1e-9);
}

TEST_CASE("fit_edge examples") {
    std::vector<MapPoint> line;
    for (int i = 0; i < 5; ++i) {
        line.push_back(MapPoint{Vec3(i, 0, 0), FeatureKind::Edge});
    }
    const auto corr = fit_edge(line);
    REQUIRE(corr.has_value());
    CHECK(std::abs(std::abs(corr->u.x()) - 1.0) < 1e-12);
    CHECK((corr->q - Vec3(2, 0, 0)).norm() < 1e-12);
    CHECK(corr->projector_kind == FeatureKind::Edge);

    SimRng rng(61);
    std::vector<MapPoint> jitter;
    for (int i = 0; i < 5; ++i) {
        jitter.push_back(MapPoint{Vec3(i, 0.001 * rng.gaussian(),
                                       0.001 * rng.gaussian()),
                                  FeatureKind::Edge});
    }
    const auto fitted = fit_edge(jitter);
    REQUIRE(fitted.has_value());
    CHECK(std::acos(std::min(1.0, std::abs(fitted->u.x()))) < 0.01);

    // Isotropic in-plane scatter: no dominant direction.
    std::vector<MapPoint> planar = {
        {Vec3(0, 0, 0), FeatureKind::Edge}, {Vec3(1, 0, 0), FeatureKind::Edge},
        {Vec3(0, 1, 0), FeatureKind::Edge}, {Vec3(1, 1, 0), FeatureKind::Edge},
        {Vec3(0.5, 0.5, 0), FeatureKind::Edge}};
    CHECK_FALSE(fit_edge(planar).has_value());

    CHECK_THROWS_AS(fit_edge({line.begin(), line.begin() + 4}), TooFewNeighbors);
}

TEST_CASE("compute_residual examples") {
    const Correspondence plane{Vec3(0, 0, 1), Vec3::Zero(), FeatureKind::Plane};
    const Eigen::VectorXd zp = compute_residual(Vec3(1, 2, 0.3), plane);
    REQUIRE(zp.size() == 1);
    CHECK(zp(0) == doctest::Approx(0.3));
    CHECK(compute_residual(Vec3(5, -3, 0), plane).norm() == 0.0);

    const Correspondence edge{Vec3(0, 0, 1), Vec3::Zero(), FeatureKind::Edge};
    const Eigen::VectorXd ze = compute_residual(Vec3(1, 0, 0), edge);
    REQUIRE(ze.size() == 3);
    CHECK((ze - Eigen::Vector3d(0, 1, 0)).norm() < 1e-15);
    CHECK(compute_residual(Vec3(0, 0, 7), edge).norm() == 0.0);
}

TEST_CASE("build_correspondences applies the residual gate") {
    FeatureMap map;
    map.append(grid_plane(0.0, 10, 0.2));

    std::vector<GlobalFeature> queries = {
        {0, Vec3(1.0, 1.0, 0.3), FeatureKind::Plane},   // below the gate
        {1, Vec3(1.2, 0.8, 0.6), FeatureKind::Plane},   // at/above: dropped
        {2, Vec3(0.8, 1.2, 0.0), FeatureKind::Plane}};  // exactly on the plane

    const auto matches = build_correspondences(map, queries);
    REQUIRE(matches.size() == 2);
    CHECK(matches[0].index == 0);
    CHECK(matches[0].residual.norm() == doctest::Approx(0.3));
    CHECK(matches[1].index == 2);
    CHECK(matches[1].residual.norm() < 1e-12);
    for (const auto& m : matches) {
        CHECK(m.residual.norm() < 0.5);
        CHECK(m.corr.u.norm() == doctest::Approx(1.0).epsilon(1e-9));
    }

    CHECK_THROWS_AS(
        build_correspondences(map, {{0, Vec3::Zero(), FeatureKind::Edge}}),
        EmptyMap);
}

TEST_CASE("append_scan transforms by the optimal pose") {
    FeatureMap map;
    NavState x;
    Extrinsic ext;
    const std::vector<LidarPoint> pts = {
        {0.0, Vec3(1, 2, 3), FeatureKind::Plane},
        {0.0, Vec3(-1, 0, 2), FeatureKind::Edge}};

    append_scan(map, x, ext, pts);
    CHECK(map.size() == 2);
    CHECK((map.points()[0].xyz - Vec3(1, 2, 3)).norm() == 0.0);
    CHECK((map.points()[1].xyz - Vec3(-1, 0, 2)).norm() == 0.0);

    x.pos = Vec3(1, 0, 0);
    append_scan(map, x, ext, pts);
    CHECK((map.points()[2].xyz - Vec3(2, 2, 3)).norm() == 0.0);
    CHECK((map.points()[3].xyz - Vec3(0, 0, 2)).norm() == 0.0);

    // Extrinsic lever arm and rotation both participate.
    x = NavState{};
    x.rot = Rotation3::from_exp(Vec3(0, 0, M_PI / 2));
    ext.pos_IL = Vec3(0.1, 0, 0);
    append_scan(map, x, ext, {{0.0, Vec3(1, 0, 0), FeatureKind::Plane}});
    CHECK((map.points()[4].xyz - Vec3(0, 1.1, 0)).norm() < 1e-12);
}

TEST_CASE("large append keeps knn exact") {
    SimRng rng(67);
    FeatureMap map;
    std::vector<Vec3> coords;
    std::vector<MapPoint> batch;
    for (int i = 0; i < 1000; ++i) {
        const Vec3 p = rand_vec(rng, 20.0);
        coords.push_back(p);
        batch.push_back(MapPoint{p, FeatureKind::Plane});
    }
    map.append(batch);
    for (int q = 0; q < 100; ++q) {
        const Vec3 query = rand_vec(rng, 22.0);
        const auto got = map.knn(query, 5, FeatureKind::Plane);
        const auto ref = brute_knn(coords, query, 5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK((got[i].xyz - coords[ref[i].id]).norm() == 0.0);
        }
    }
}
