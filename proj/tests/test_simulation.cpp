#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "wander/simulation.hpp"

using namespace wander;

namespace {

IntentModel model_with(std::vector<Eigen::Vector3d> wp) {
    IntentModel m;
    m.waypoints = std::move(wp);
    return m;
}

} // namespace

TEST(IntentForce, LinearSpring) {
    IntentModel m = model_with({{0.1, 0.0, 0.0}, {5.0, 0.0, 0.0}});
    m.advance_radius = 0.05;
    const auto w = intent_force(m, MotionState{});
    ASSERT_TRUE(w);
    EXPECT_NEAR(w->fx, 20.0, 1e-12);
    EXPECT_EQ(w->fy, 0.0);
    EXPECT_EQ(w->tau_z, 0.0);
}

TEST(IntentForce, PureDamping) {
    IntentModel m = model_with({{0.0, 0.0, 0.0}, {5.0, 0.0, 0.0}});
    m.waypoints = {{1.0, 0.0, 0.0}};
    m.advance_radius = 0.05;
    MotionState s;
    s.q = {1.0, 0.0, 0.0};
    s.v = {0.5, 0.0, 0.0};
    // Inside the radius but still moving, so the final waypoint stays active.
    const auto w = intent_force(m, s);
    ASSERT_TRUE(w);
    EXPECT_NEAR(w->fx, -20.0, 1e-12);
    EXPECT_NEAR(w->fy, 0.0, 1e-12);
}

TEST(IntentForce, Saturates) {
    IntentModel m = model_with({{1.0, 0.0, 0.0}});
    m.f_max = 50.0;
    const auto w = intent_force(m, MotionState{});
    ASSERT_TRUE(w);
    EXPECT_DOUBLE_EQ(w->fx, 50.0);
}

TEST(IntentForce, SaturatesPlanarNorm) {
    IntentModel m = model_with({{1.0, 1.0, 0.0}});
    m.f_max = 50.0;
    const auto w = intent_force(m, MotionState{});
    ASSERT_TRUE(w);
    EXPECT_NEAR(std::hypot(w->fx, w->fy), 50.0, 1e-12);
    EXPECT_NEAR(w->fx, w->fy, 1e-12);
}

TEST(IntentForce, YawUsesWrappedError) {
    IntentModel m = model_with({{3.0, 0.0, 2.0 * std::numbers::pi + 0.1}});
    const auto w = intent_force(m, MotionState{});
    ASSERT_TRUE(w);
    EXPECT_NEAR(w->tau_z, m.yaw_stiffness * 0.1, 1e-9);
}

TEST(IntentForce, AdvancesAndSignalsCompletion) {
    IntentModel m = model_with({{0.1, 0.0, 0.0}, {0.2, 0.0, 0.0}});
    m.advance_radius = 0.15;
    MotionState s;
    const auto w = intent_force(m, s);
    ASSERT_TRUE(w);
    EXPECT_EQ(m.next, 1u);
    s.q = {0.2, 0.0, 0.0};
    EXPECT_FALSE(intent_force(m, s));
    EXPECT_TRUE(m.complete());

    IntentModel empty;
    EXPECT_FALSE(intent_force(empty, MotionState{}));
}

TEST(Paths, Geometry) {
    const auto fb = paths::forward_backward();
    EXPECT_NEAR(fb[19].x(), 6.0, 1e-12);
    EXPECT_EQ(fb.back(), Eigen::Vector3d::Zero());
    const auto lat = paths::lateral();
    EXPECT_NEAR(lat[19].y(), 6.0, 1e-12);
    EXPECT_NEAR(lat[19].x(), 0.0, 1e-12);
    for (const auto& p : lat)
        EXPECT_EQ(p.z(), 0.0);
    const auto f8 = paths::figure_eight();
    EXPECT_NEAR(f8.back().head<2>().norm(), 0.0, 1e-12);
    for (const auto& p : f8) {
        const double r1 = (p.head<2>() - Eigen::Vector2d(0, 1.5)).norm();
        const double r2 = (p.head<2>() - Eigen::Vector2d(0, -1.5)).norm();
        EXPECT_NEAR(std::min(std::abs(r1 - 1.5), std::abs(r2 - 1.5)), 0.0, 1e-12);
    }
    EXPECT_NEAR(paths::reference_rotation(f8), 4.0 * std::numbers::pi, 1e-12);
    EXPECT_THROW(paths::by_name("spiral"), InvalidInput);
}

TEST(SimulateRun, StraightPathReachesGoal) {
    for (const auto& [m, d] : {std::pair{10.0, 120.0}, {33.0, 72.6}, {100.0, 40.0}, {10.0, 200.0}}) {
        IntentModel model = model_with(paths::straight(6.0));
        const auto traj = simulate_run(AdmittanceParams::from_sample(m, d), model);
        traj.validate();
        const Eigen::Vector2d end = traj.back().state.q.head<2>();
        EXPECT_LE((end - Eigen::Vector2d(6.0, 0.0)).norm(), model.advance_radius) << m << ' ' << d;
        EXPECT_LT(traj.back().state.t, SimConfig{}.duration);
    }
}

TEST(SimulateRun, Deterministic) {
    const auto p = AdmittanceParams::from_sample(42.0, 88.0);
    const auto a = simulate_run(p, model_with(paths::figure_eight()));
    const auto b = simulate_run(p, model_with(paths::figure_eight()));
    std::ostringstream sa, sb;
    write_trajectory_csv(sa, a);
    write_trajectory_csv(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(SimulateRun, FigureEightAccumulatesHeading) {
    const auto traj = simulate_run(AdmittanceParams::from_sample(55.0, 120.0), model_with(paths::figure_eight()));
    double total = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k)
        total += std::abs(traj[k].state.q.z() - traj[k - 1].state.q.z());
    const double reference = paths::reference_rotation(paths::figure_eight());
    EXPECT_GT(total, 0.0);
    EXPECT_NEAR(total, reference, 0.15 * reference);
    // First lobe turns left, second turns back: net heading returns near zero.
    EXPECT_NEAR(wrap_angle(traj.back().state.q.z()), 0.0, 0.3);
}

TEST(SimulateRun, LengthBoundedByDuration) {
    SimConfig cfg;
    cfg.duration = 1.0;
    const auto traj = simulate_run(AdmittanceParams::from_sample(50, 100), model_with(paths::straight(6.0)), cfg);
    EXPECT_EQ(traj.size(), 501u);
    EXPECT_NEAR(traj.back().state.t, 1.0, 1e-12);
}

TEST(SimulateRun, RejectsBadInputs) {
    SimConfig cfg;
    cfg.dt = 0.0;
    EXPECT_THROW(simulate_run(AdmittanceParams::from_sample(50, 100), model_with(paths::straight(6.0)), cfg),
                 InvalidInput);
    IntentModel bad = model_with(paths::straight(6.0));
    bad.k_p = 0.0;
    EXPECT_THROW(simulate_run(AdmittanceParams::from_sample(50, 100), bad), InvalidInput);
}

TEST(SimulateRun, FirstOrderInDt) {
    // Smooth setting: one far waypoint keeps the force saturated, no switching.
    auto final_pose = [](double dt) {
        SimConfig cfg;
        cfg.dt = dt;
        cfg.duration = 3.0;
        IntentModel m = model_with({{30.0, 10.0, 0.5}});
        m.f_max = 40.0;
        return simulate_run(AdmittanceParams::from_sample(30.0, 90.0), m, cfg).back().state.q;
    };
    const Eigen::Vector3d q4 = final_pose(4e-3), q2 = final_pose(2e-3), q1 = final_pose(1e-3);
    const double ratio = (q4 - q2).norm() / (q2 - q1).norm();
    EXPECT_NEAR(ratio, 2.0, 0.5);
}

TEST(TrajectoryCsv, HeaderAndPrecision) {
    SimConfig cfg;
    cfg.duration = 0.01;
    const auto traj = simulate_run(AdmittanceParams::from_sample(50, 100), model_with(paths::straight(6.0)), cfg);
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "t,qx,qy,qtheta,vx,vy,wz,ax,ay,alphaz,fx,fy,tauz");
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 12);
    }
    EXPECT_EQ(rows, traj.size());
    // 17 significant digits reproduce the stored doubles.
    std::istringstream row(os.str().substr(os.str().find('\n') + 1));
    std::getline(row, line);
    std::getline(row, line);
    EXPECT_EQ(std::stod(line.substr(0, line.find(','))), traj[1].state.t);
}
