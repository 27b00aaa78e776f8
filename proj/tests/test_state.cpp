#include <doctest.h>

#include <cmath>

#include "lio/sim.hpp"
#include "lio/state.hpp"

using namespace lio;

namespace {

Vec3 rand_vec(SimRng& rng, double s) {
    return s * Vec3(2 * rng.uniform() - 1, 2 * rng.uniform() - 1,
                    2 * rng.uniform() - 1);
}

NavState random_state(SimRng& rng) {
    NavState x;
    x.rot = Rotation3::from_exp(rand_vec(rng, 1.0));
    x.pos = rand_vec(rng, 5.0);
    x.vel = rand_vec(rng, 2.0);
    x.bias_gyro = rand_vec(rng, 0.02);
    x.bias_acc = rand_vec(rng, 0.2);
    x.gravity = kGravity + rand_vec(rng, 0.05);
    return x;
}

ImuSample random_imu(SimRng& rng) {
    ImuSample u;
    u.gyro = rand_vec(rng, 2.0);
    u.acc = rand_vec(rng, 12.0);
    return u;
}

// One discrete error-state step used as the finite-difference target:
// ((x boxplus e) boxplus dt f(x boxplus e, u, w)) boxminus (x boxplus dt f(x, u, 0)).
Vec18 error_step(const NavState& x_hat, const Vec18& err, const ImuSample& u,
                 const Vec12& w, double dt) {
    const NavState nominal = x_hat.boxplus(dt * process_f(x_hat, u, Vec12::Zero()));
    const NavState perturbed = x_hat.boxplus(err);
    return perturbed.boxplus(dt * process_f(perturbed, u, w)).boxminus(nominal);
}

}  // namespace

TEST_CASE("process_f static equilibrium") {
    NavState x;
    x.gravity = Vec3(0, 0, -9.81);
    ImuSample u;
    u.acc = Vec3(0, 0, 9.81);
    CHECK(process_f(x, u, Vec12::Zero()).norm() == doctest::Approx(0.0));

    x.vel = Vec3(1, 0, 0);
    const Vec18 f = process_f(x, u, Vec12::Zero());
    CHECK((f.segment<3>(3) - Vec3(1, 0, 0)).norm() == 0.0);
    CHECK(f.head<3>().norm() == 0.0);
    CHECK(f.tail<12>().norm() == 0.0);
}

TEST_CASE("process_f rotated specific force") {
    NavState x;
    x.rot = Rotation3::from_exp(Vec3(0, 0, M_PI / 2));
    ImuSample u;
    u.acc = Vec3(1, 0, 0);
    const Vec18 f = process_f(x, u, Vec12::Zero());
    CHECK((f.segment<3>(6) - Vec3(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("process_f gravity rows are identically zero and biases only see w") {
    SimRng rng(31);
    for (int i = 0; i < 50; ++i) {
        const NavState x = random_state(rng);
        const ImuSample u = random_imu(rng);
        Vec12 w;
        for (int j = 0; j < 12; ++j) w[j] = rng.gaussian();
        const Vec18 f = process_f(x, u, w);
        CHECK(f.segment<3>(15).norm() == 0.0);
        CHECK((f.segment<3>(9) - w.segment<3>(6)).norm() == 0.0);
        CHECK((f.segment<3>(12) - w.segment<3>(9)).norm() == 0.0);
    }
}

TEST_CASE("step_state examples") {
    NavState x;
    x.gravity = Vec3(0, 0, -9.81);
    ImuSample u;
    u.acc = Vec3(0, 0, 9.81);
    const NavState y = step_state(x, u, 0.01);
    CHECK(y.boxminus(x).norm() < 1e-12);

    NavState v = x;
    v.vel = Vec3(1, 2, 3);
    const NavState y2 = step_state(v, u, 0.01);
    CHECK((y2.pos - Vec3(0.01, 0.02, 0.03)).norm() < 1e-12);

    ImuSample spin;
    spin.gyro = Vec3(0, 0, 1);
    spin.acc = Vec3(0, 0, 9.81);
    // Repeated quarter-step spins compose to Exp((0,0,0.5)) when dt*w is held.
    NavState s;
    s.gravity = Vec3(0, 0, -9.81);
    // dt must stay within (0, 0.1]; 0.5 s is rejected and split instead.
    CHECK_THROWS_AS(step_state(s, spin, 0.5), DtOutOfRange);
    for (int i = 0; i < 5; ++i) {
        s = step_state(s, spin, 0.1);
    }
    CHECK((s.rot.matrix() - exp_map(Vec3(0, 0, 0.5))).norm() < 1e-12);
}

TEST_CASE("step_state dt validation") {
    NavState x;
    ImuSample u;
    CHECK_THROWS_AS(step_state(x, u, 0.0), DtOutOfRange);
    CHECK_THROWS_AS(step_state(x, u, -0.01), DtOutOfRange);
    CHECK_THROWS_AS(step_state(x, u, 0.11), DtOutOfRange);
}

TEST_CASE("F matrices: printed blocks") {
    NavState x;
    x.gravity = Vec3(0, 0, -9.81);
    ImuSample u;
    u.acc = Vec3(0, 0, 9.81);
    Mat18 fx;
    Mat18x12 fw;

    compute_F_matrices(x, u, 1e-9, fx, fw);
    CHECK((fx - Mat18::Identity()).norm() < 1e-6);
    CHECK(fw.norm() < 1e-6);

    compute_F_matrices(x, u, 0.01, fx, fw);
    const Mat3 expected = -skew(Vec3(0, 0, 9.81)) * 0.01;
    CHECK((fx.block<3, 3>(6, 0) - expected).norm() < 1e-12);
    CHECK((fx.block<3, 3>(3, 6) - 0.01 * Mat3::Identity()).norm() == 0.0);
    CHECK((fx.block<3, 3>(6, 15) - 0.01 * Mat3::Identity()).norm() == 0.0);
    CHECK((fw.block<3, 3>(0, 0) - fx.block<3, 3>(0, 9)).norm() == 0.0);
}

TEST_CASE("F matrices match central finite differences (>=100 random instances)") {
    SimRng rng(37);
    const double step = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        const NavState x = random_state(rng);
        const ImuSample u = random_imu(rng);
        const double dt = 1e-3 + 0.009 * rng.uniform();

        Mat18 fx;
        Mat18x12 fw;
        compute_F_matrices(x, u, dt, fx, fw);

        for (int col = 0; col < 18; ++col) {
            Vec18 e = Vec18::Zero();
            e[col] = step;
            const Vec18 plus = error_step(x, e, u, Vec12::Zero(), dt);
            const Vec18 minus = error_step(x, -e, u, Vec12::Zero(), dt);
            const Vec18 fd = (plus - minus) / (2.0 * step);
            CHECK((fd - fx.col(col)).cwiseAbs().maxCoeff() < 1e-5);
        }
        for (int col = 0; col < 12; ++col) {
            Vec12 w = Vec12::Zero();
            w[col] = step;
            const Vec18 plus = error_step(x, Vec18::Zero(), u, w, dt);
            const Vec18 minus = error_step(x, Vec18::Zero(), u, -w, dt);
            const Vec18 fd = (plus - minus) / (2.0 * step);
            CHECK((fd - fw.col(col)).cwiseAbs().maxCoeff() < 1e-5);
        }
    }
}
