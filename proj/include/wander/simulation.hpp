#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wander/admittance.hpp"
#include "wander/error.hpp"

namespace wander {

struct TrajectorySample {
    MotionState state;
    Wrench wrench;  // wrench applied over the step that ended in `state`
};

/// Uniformly sampled closed-loop run. The first sample is the initial state
/// with zero wrench; sample k > 0 holds the state reached after step k.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    double dt = 0.0;

    std::size_t size() const { return samples.size(); }
    const TrajectorySample& operator[](std::size_t i) const { return samples[i]; }
    const TrajectorySample& back() const { return samples.back(); }

    void validate() const {
        if (!(dt > 0.0))
            throw InvalidInput("trajectory dt must be positive");
        if (samples.size() < 2)
            throw InvalidInput("trajectory needs at least two samples");
        for (std::size_t k = 1; k < samples.size(); ++k)
            if (std::abs(samples[k].state.t - samples[k - 1].state.t - dt) > 1e-9)
                throw InvalidInput("trajectory samples are not uniformly spaced");
    }
};

inline double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * std::numbers::pi);
    return a;
}

/// Synthetic user: a saturated spring-damper pulling the base toward the
/// next waypoint of a reference path.
struct IntentModel {
    std::vector<Eigen::Vector3d> waypoints;  // x, y, heading
    double k_p = 200.0;                      // N/m
    double k_d = 40.0;                       // N s/m
    double advance_radius = 0.15;            // m
    double f_max = 100.0;                    // N, bound on the planar force norm
    double yaw_stiffness = 30.0;             // N m/rad
    double yaw_damping = 5.0;                // N m s/rad
    double torque_max = 30.0;                // N m
    double stop_speed = 0.05;                // m/s, the last waypoint also requires settling
    std::size_t next = 0;                    // index of the current target

    void validate() const {
        if (!(k_p > 0.0) || !(k_d >= 0.0) || !(f_max > 0.0) || !(advance_radius > 0.0))
            throw InvalidInput("intent model requires k_p > 0, k_d >= 0, f_max > 0, advance_radius > 0");
        if (!(yaw_stiffness >= 0.0) || !(yaw_damping >= 0.0) || !(torque_max > 0.0) || !(stop_speed > 0.0))
            throw InvalidInput("intent model yaw gains must be non-negative and limits positive");
    }

    bool complete() const { return next >= waypoints.size(); }
};

/// Force the synthetic user applies in `s`; advances the target waypoint as
/// the base reaches it. Returns nullopt once the path is complete.
inline std::optional<Wrench> intent_force(IntentModel& model, const MotionState& s) {
    auto reached = [&](std::size_t i) {
        const bool close = (model.waypoints[i].head<2>() - s.q.head<2>()).norm() <= model.advance_radius;
        if (i + 1 < model.waypoints.size())
            return close;
        return close && s.v.head<2>().norm() <= model.stop_speed;
    };
    while (!model.complete() && reached(model.next))
        ++model.next;
    if (model.complete())
        return std::nullopt;

    const Eigen::Vector3d& target = model.waypoints[model.next];
    Eigen::Vector2d f = model.k_p * (target.head<2>() - s.q.head<2>()) - model.k_d * s.v.head<2>();
    if (const double n = f.norm(); n > model.f_max)
        f *= model.f_max / n;
    double tau = model.yaw_stiffness * wrap_angle(target.z() - s.q.z()) - model.yaw_damping * s.v.z();
    tau = std::clamp(tau, -model.torque_max, model.torque_max);
    return Wrench{f.x(), f.y(), tau};
}

// ---------------------------------------------------------------------------
// Reference paths

namespace paths {

inline constexpr double kDefaultSpacing = 0.3;

/// Straight segment of `length` metres along `heading`, starting at the origin.
inline std::vector<Eigen::Vector3d> straight(double length, double heading = 0.0,
                                             double spacing = kDefaultSpacing) {
    const auto n = static_cast<std::size_t>(std::ceil(length / spacing - 1e-12));
    std::vector<Eigen::Vector3d> wp;
    for (std::size_t i = 1; i <= n; ++i) {
        const double s = std::min(length, static_cast<double>(i) * spacing);
        wp.emplace_back(s * std::cos(heading), s * std::sin(heading), 0.0);
    }
    return wp;
}

/// Out and back along `heading`, ending at the origin.
inline std::vector<Eigen::Vector3d> out_and_back(double length, double heading,
                                                 double spacing = kDefaultSpacing) {
    auto wp = straight(length, heading, spacing);
    const auto n = wp.size();
    for (std::size_t i = n - 1; i-- > 0;)
        wp.push_back(wp[i]);
    wp.emplace_back(0.0, 0.0, 0.0);
    return wp;
}

inline std::vector<Eigen::Vector3d> forward_backward(double length = 6.0, double spacing = kDefaultSpacing) {
    return out_and_back(length, 0.0, spacing);
}

/// Sideways walk: the heading stays at zero while the base moves along y.
inline std::vector<Eigen::Vector3d> lateral(double length = 6.0, double spacing = kDefaultSpacing) {
    return out_and_back(length, std::numbers::pi / 2.0, spacing);
}

/// Two tangent circular lobes through the origin, first counter-clockwise
/// then clockwise. Headings follow the path tangent, unwrapped.
inline std::vector<Eigen::Vector3d> figure_eight(double radius = 1.5, double spacing = kDefaultSpacing) {
    using std::numbers::pi;
    const auto n = static_cast<std::size_t>(std::ceil(2.0 * pi * radius / spacing));
    std::vector<Eigen::Vector3d> wp;
    for (std::size_t i = 1; i <= n; ++i) {
        const double phi = 2.0 * pi * static_cast<double>(i) / static_cast<double>(n);
        wp.emplace_back(radius * std::sin(phi), radius - radius * std::cos(phi), phi);
    }
    for (std::size_t i = 1; i <= n; ++i) {
        const double phi = 2.0 * pi * static_cast<double>(i) / static_cast<double>(n);
        wp.emplace_back(radius * std::sin(phi), -radius + radius * std::cos(phi), 2.0 * pi - phi);
    }
    return wp;
}

/// Total absolute heading change along the reference waypoints, starting
/// from heading zero at the origin.
inline double reference_rotation(const std::vector<Eigen::Vector3d>& wp) {
    double total = 0.0;
    double prev = 0.0;
    for (const auto& p : wp) {
        total += std::abs(p.z() - prev);
        prev = p.z();
    }
    return total;
}

inline const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"forward_backward", "lateral", "figure_eight"};
    return names;
}

/// Built-in evaluation tracks plus `straight` (6 m forward only).
inline std::vector<Eigen::Vector3d> by_name(std::string_view name) {
    if (name == "forward_backward")
        return forward_backward();
    if (name == "lateral")
        return lateral();
    if (name == "figure_eight")
        return figure_eight();
    if (name == "straight")
        return straight(6.0);
    throw InvalidInput("unknown path '" + std::string(name) + "'");
}

} // namespace paths

struct SimConfig {
    double dt = 0.002;
    double duration = 120.0;  // s, upper bound on simulated time
    ControllerConfig controller{};
};

/// Closed loop intent -> direction -> variable damping -> dynamics, from rest
/// at the origin until the path completes or `duration` elapses. At most
/// floor(duration / dt) integration steps are taken.
inline Trajectory simulate_run(const AdmittanceParams& params, IntentModel model, const SimConfig& cfg = {}) {
    params.validate();
    model.validate();
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
        throw InvalidInput("dt must be positive");
    if (!(cfg.duration > 0.0))
        throw InvalidInput("duration must be positive");

    const auto max_steps = static_cast<std::size_t>(std::floor(cfg.duration / cfg.dt + 1e-9));
    Trajectory traj;
    traj.dt = cfg.dt;
    traj.samples.reserve(std::min<std::size_t>(max_steps + 1, 1u << 20));
    MotionState s;
    traj.samples.push_back({s, Wrench{}});
    for (std::size_t k = 0; k < max_steps; ++k) {
        const auto w = intent_force(model, s);
        if (!w)
            break;
        s = step_dynamics(s, *w, params, cfg.dt, cfg.controller);
        // t from the step count, not repeated addition, so it never drifts.
        s.t = static_cast<double>(k + 1) * cfg.dt;
        traj.samples.push_back({s, *w});
    }
    if (traj.samples.size() < 2)
        throw InvalidInput("simulation produced fewer than two samples");
    return traj;
}

inline constexpr std::string_view kTrajectoryCsvHeader = "t,qx,qy,qtheta,vx,vy,wz,ax,ay,alphaz,fx,fy,tauz";

/// One row per sample with 17 significant digits (round-trips doubles).
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << kTrajectoryCsvHeader << '\n';
    os << std::setprecision(17);
    for (const auto& [st, w] : traj.samples) {
        os << st.t << ',' << st.q.x() << ',' << st.q.y() << ',' << st.q.z() << ',' << st.v.x() << ','
           << st.v.y() << ',' << st.v.z() << ',' << st.a.x() << ',' << st.a.y() << ',' << st.a.z() << ','
           << w.fx << ',' << w.fy << ',' << w.tau_z << '\n';
    }
}

} // namespace wander
