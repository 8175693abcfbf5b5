#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>

#include <boost/math/distributions/students_t.hpp>

#include "wander/error.hpp"
#include "wander/simulation.hpp"

namespace wander {

inline constexpr double kMinPathLength = 1e-6;  // m
inline constexpr double kMinRotation = 1e-6;    // rad

/// Transparency and smoothness figures of one run. The energies are absent
/// when the run never moved (or never turned).
struct MetricReport {
    std::optional<double> e_linear;   // J/m
    std::optional<double> e_angular;  // J/rad
    double j_mean = 0.0;              // m/s^3
    double path_length_s = 0.0;       // m
    double total_rotation_theta = 0.0;  // rad

    bool operator==(const MetricReport&) const = default;
};

inline double path_length(const Trajectory& traj) {
    double s = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k)
        s += (traj[k].state.q.head<2>() - traj[k - 1].state.q.head<2>()).norm();
    return s;
}

inline double total_rotation(const Trajectory& traj) {
    double th = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k)
        th += std::abs(traj[k].state.q.z() - traj[k - 1].state.q.z());
    return th;
}

/// E_L: planar force magnitude integrated over planar distance, per metre.
inline double linear_energy(const Trajectory& traj) {
    double work = 0.0;
    double s = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const double ds = (traj[k].state.q.head<2>() - traj[k - 1].state.q.head<2>()).norm();
        work += std::hypot(traj[k].wrench.fx, traj[k].wrench.fy) * ds;
        s += ds;
    }
    if (!(s > kMinPathLength))
        throw UndefinedMetric("linear energy undefined: path length is zero");
    return work / s;
}

/// E_A: |tau_z| integrated over absolute heading change, per radian.
inline double angular_energy(const Trajectory& traj) {
    double work = 0.0;
    double th = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const double dth = std::abs(traj[k].state.q.z() - traj[k - 1].state.q.z());
        work += std::abs(traj[k].wrench.tau_z) * dth;
        th += dth;
    }
    if (!(th > kMinRotation))
        throw UndefinedMetric("angular energy undefined: no rotation");
    return work / th;
}

/// Mean planar jerk magnitude from first differences of logged acceleration.
inline double mean_jerk(const Trajectory& traj) {
    if (traj.size() < 3)
        throw UndefinedMetric("mean jerk needs at least three samples");
    double sum = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const double jx = (traj[k].state.a.x() - traj[k - 1].state.a.x()) / traj.dt;
        const double jy = (traj[k].state.a.y() - traj[k - 1].state.a.y()) / traj.dt;
        sum += std::hypot(jx, jy);
    }
    return sum / static_cast<double>(traj.size() - 1);
}

inline MetricReport compute_report(const Trajectory& traj) {
    MetricReport r;
    r.path_length_s = path_length(traj);
    r.total_rotation_theta = total_rotation(traj);
    if (r.path_length_s > kMinPathLength)
        r.e_linear = linear_energy(traj);
    if (r.total_rotation_theta > kMinRotation)
        r.e_angular = angular_energy(traj);
    r.j_mean = mean_jerk(traj);
    return r;
}

struct Correlation {
    double r = 0.0;
    double p_value = 1.0;  // two-sided
};

/// Pearson correlation with a two-sided p-value from Student's t on n - 2
/// degrees of freedom.
inline Correlation pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw InvalidInput("pearson: inputs differ in length");
    const std::size_t n = xs.size();
    if (n < 3)
        throw InvalidInput("pearson: need at least three pairs");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0))
        throw UndefinedMetric("pearson: zero variance");
    Correlation c;
    c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double dof = static_cast<double>(n - 2);
    if (std::abs(c.r) >= 1.0) {
        c.p_value = 0.0;
    } else {
        const double t = c.r * std::sqrt(dof / (1.0 - c.r * c.r));
        const boost::math::students_t dist(dof);
        c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
    return c;
}

} // namespace wander
