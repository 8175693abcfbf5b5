#pragma once

#include <cmath>
#include <optional>

#include <Eigen/Core>

#include "wander/error.hpp"

namespace wander {

/// Planar wrench [F_x, F_y, tau_z] in the world frame.
struct Wrench {
    double fx = 0.0;
    double fy = 0.0;
    double tau_z = 0.0;

    Eigen::Vector3d vec() const { return {fx, fy, tau_z}; }
    static Wrench from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

    /// Mixed-unit norm over force and torque.
    double norm() const { return std::sqrt(fx * fx + fy * fy + tau_z * tau_z); }
    bool finite() const { return std::isfinite(fx) && std::isfinite(fy) && std::isfinite(tau_z); }

    bool operator==(const Wrench&) const = default;
};

/// Default coefficient for the reduced damping along the direction of motion.
inline constexpr double kDefaultEta = 0.7;
/// Rotational terms follow the linear ones: J_z = 0.33 M, D_z = 0.33 D.
inline constexpr double kRotationalCoupling = 0.33;

/// Virtual mass/damping of the base. The linear terms are shared by x and y.
struct AdmittanceParams {
    double m_xy = 0.0;  // kg
    double d_xy = 0.0;  // N s/m
    double j_z = 0.0;   // kg m^2
    double d_z = 0.0;   // N m s/rad
    double eta = kDefaultEta;

    /// Build the full set from an optimization sample {M, D}.
    static AdmittanceParams from_sample(double mass, double damping, double eta = kDefaultEta) {
        AdmittanceParams p{mass, damping, kRotationalCoupling * mass, kRotationalCoupling * damping, eta};
        p.validate();
        return p;
    }

    void validate() const {
        auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
        if (!positive(m_xy) || !positive(d_xy) || !positive(j_z) || !positive(d_z))
            throw InvalidInput("admittance mass, inertia and damping must be finite and positive");
        if (!(eta >= 0.0 && eta <= 1.0))
            throw InvalidInput("eta must lie in [0, 1]");
    }

    Eigen::Vector3d mass_diagonal() const { return {m_xy, m_xy, j_z}; }
    Eigen::Vector3d damping_diagonal() const { return {d_xy, d_xy, d_z}; }

    bool operator==(const AdmittanceParams&) const = default;
};

struct MotionState {
    Eigen::Vector3d q = Eigen::Vector3d::Zero();  // x, y, theta
    Eigen::Vector3d v = Eigen::Vector3d::Zero();  // vx, vy, wz
    Eigen::Vector3d a = Eigen::Vector3d::Zero();  // ax, ay, alpha_z
    double t = 0.0;

    bool finite() const { return q.allFinite() && v.allFinite() && a.allFinite() && std::isfinite(t); }
};

/// Settings of the direction-variable damping law.
struct ControllerConfig {
    double deadband = 0.5;      // wrench norm below which the direction is undefined
    double torque_scale = 1.0;  // weight of tau_z when forming the direction vector
};

/// Unit direction of the wrench, or nullopt inside the deadband.
inline std::optional<Eigen::Vector3d> compute_direction(const Wrench& w, double deadband,
                                                        double torque_scale = 1.0) {
    if (!w.finite())
        throw InvalidInput("wrench components must be finite");
    if (!(deadband > 0.0))
        throw InvalidInput("deadband must be positive");
    const Eigen::Vector3d t{w.fx, w.fy, torque_scale * w.tau_z};
    const double n = t.norm();
    if (n < deadband)
        return std::nullopt;
    return Eigen::Vector3d(t / n);
}

/// D* = [I - P + eta P] D with P = rho rho^T / rho^T rho.
///
/// Evaluated as D - (1 - eta) P D, which is algebraically identical and makes
/// eta = 1 return D bit for bit.
inline Eigen::Matrix3d variable_damping(const AdmittanceParams& p,
                                        const std::optional<Eigen::Vector3d>& direction) {
    const Eigen::Matrix3d d = p.damping_diagonal().asDiagonal();
    if (!direction)
        return d;
    const Eigen::Vector3d& rho = *direction;
    const Eigen::Matrix3d proj = rho * rho.transpose() / rho.squaredNorm();
    return d - (1.0 - p.eta) * (proj * d);
}

/// One semi-implicit Euler step of M a + D* v = T.
inline MotionState step_dynamics(const MotionState& s, const Wrench& w, const AdmittanceParams& p,
                                 double dt, const ControllerConfig& ctl = {}) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw InvalidInput("dt must be positive");
    const Eigen::Matrix3d damping = variable_damping(p, compute_direction(w, ctl.deadband, ctl.torque_scale));
    MotionState next;
    next.a = (w.vec() - damping * s.v).cwiseQuotient(p.mass_diagonal());
    next.v = s.v + next.a * dt;
    next.q = s.q + next.v * dt;
    next.t = s.t + dt;
    if (!next.finite())
        throw InvalidInput("integration produced a non-finite state");
    return next;
}

} // namespace wander
