#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wander/error.hpp"

namespace wander::qp {

/// min 1/2 x'Qx + c'x  s.t.  A x <= b, with Q symmetric positive semidefinite.
struct Problem {
    Eigen::MatrixXd Q;
    Eigen::VectorXd c;
    Eigen::MatrixXd A;  // m x n, m may be zero
    Eigen::VectorXd b;
};

/// Infinity-norm KKT residuals of a primal/dual pair.
struct KktResiduals {
    double stationarity = 0.0;     // |Qx + c + A'z|
    double primal = 0.0;           // max(Ax - b, 0)
    double dual = 0.0;             // max(-z, 0)
    double complementarity = 0.0;  // |z_i (b - Ax)_i|

    double max() const { return std::max({stationarity, primal, dual, complementarity}); }
};

struct Result {
    Eigen::VectorXd x;
    Eigen::VectorXd z;  // multipliers of A x <= b
    KktResiduals residuals;
    int iterations = 0;
};

class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, KktResiduals r) : Error(what), residuals_(r) {}
    const KktResiduals& residuals() const noexcept { return residuals_; }

private:
    KktResiduals residuals_;
};

struct Options {
    int max_iterations = 200;
    double tolerance = 1e-6;     // bound every residual must meet
    double target = 1e-10;       // interior-point stopping level
};

inline KktResiduals kkt_residuals(const Problem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
    KktResiduals r;
    Eigen::VectorXd grad = p.Q * x + p.c;
    if (p.A.rows() > 0)
        grad += p.A.transpose() * z;
    r.stationarity = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
    if (p.A.rows() > 0) {
        const Eigen::VectorXd slack = p.b - p.A * x;
        r.primal = std::max(0.0, -slack.minCoeff());
        r.dual = std::max(0.0, -z.minCoeff());
        r.complementarity = z.cwiseProduct(slack).cwiseAbs().maxCoeff();
    }
    return r;
}

namespace detail {

inline double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0)
            alpha = std::min(alpha, -v[i] / dv[i]);
    return alpha;
}

} // namespace detail

namespace detail {

inline bool refine_on(const Problem& p, const std::vector<Eigen::Index>& active, Eigen::VectorXd& x,
                      Eigen::VectorXd& z, KktResiduals& res) {
    const Eigen::Index n = p.Q.rows();
    const auto m = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m, n + m);
    Eigen::VectorXd rhs(n + m);
    K.topLeftCorner(n, n) = p.Q;
    rhs.head(n) = -p.c;
    for (Eigen::Index k = 0; k < m; ++k) {
        K.block(n + k, 0, 1, n) = p.A.row(active[k]);
        K.block(0, n + k, n, 1) = p.A.row(active[k]).transpose();
        rhs[n + k] = p.b[active[k]];
    }
    const Eigen::VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite())
        return false;
    Eigen::VectorXd zc = Eigen::VectorXd::Zero(p.A.rows());
    for (Eigen::Index k = 0; k < m; ++k)
        zc[active[k]] = sol[n + k];
    const Eigen::VectorXd xc = sol.head(n);
    const KktResiduals rc = kkt_residuals(p, xc, zc);
    if (!(rc.max() < res.max()) && std::isfinite(res.max()))
        return false;
    x = xc;
    z = zc;
    res = rc;
    return true;
}

} // namespace detail

/// Active-set polish of an approximate primal/dual pair. Starting from the
/// constraints (x, z) identifies as active, re-solve the equality-constrained
/// KKT system, drop constraints with negative multipliers, add violated ones
/// and repeat. Keeps a candidate only if it lowers the worst KKT residual;
/// returns whether one did.
inline bool refine(const Problem& p, Eigen::VectorXd& x, Eigen::VectorXd& z, KktResiduals& res) {
    const Eigen::Index m = p.A.rows();
    if (m == 0)
        return false;
    const double tight = 1e-8 * (1.0 + p.b.cwiseAbs().maxCoeff());
    const Eigen::VectorXd slack0 = p.b - p.A * x;
    std::vector<std::vector<Eigen::Index>> starts(2);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (z[i] > slack0[i])
            starts[0].push_back(i);
        if (slack0[i] <= tight)
            starts[1].push_back(i);
    }
    bool improved = false;
    for (auto active : starts) {
        for (int round = 0; round < 20; ++round) {
            Eigen::VectorXd xc = x, zc = z;
            KktResiduals rc;
            rc.stationarity = std::numeric_limits<double>::infinity();
            detail::refine_on(p, active, xc, zc, rc);
            if (!std::isfinite(rc.max()))
                break;
            if (rc.max() < res.max()) {
                x = xc;
                z = zc;
                res = rc;
                improved = true;
            }
            const Eigen::VectorXd slack = p.b - p.A * xc;
            std::vector<Eigen::Index> next;
            for (Eigen::Index i = 0; i < m; ++i) {
                const bool in = std::find(active.begin(), active.end(), i) != active.end();
                if ((in && zc[i] >= 0.0) || (!in && slack[i] < -tight))
                    next.push_back(i);
            }
            if (next == active)
                break;
            active = std::move(next);
        }
    }
    return improved;
}

/// Mehrotra predictor-corrector interior point, followed by an active-set
/// polish. Throws SolverFailure if the KKT residuals stay above
/// `opt.tolerance`.
inline Result solve(const Problem& p, const Options& opt = {}) {
    const Eigen::Index n = p.Q.rows();
    const Eigen::Index m = p.A.rows();
    if (p.Q.cols() != n || p.c.size() != n || (m > 0 && p.A.cols() != n) || p.b.size() != m)
        throw InvalidInput("qp: inconsistent problem dimensions");
    if (!p.Q.allFinite() || !p.c.allFinite() || !p.A.allFinite() || !p.b.allFinite())
        throw InvalidInput("qp: non-finite problem data");

    Result out;
    out.x = Eigen::VectorXd::Zero(n);
    out.z = Eigen::VectorXd::Zero(m);

    if (m == 0) {
        out.x = p.Q.completeOrthogonalDecomposition().solve(-p.c);
        out.residuals = kkt_residuals(p, out.x, out.z);
        if (!(out.residuals.max() <= opt.tolerance))
            throw SolverFailure("qp: unconstrained problem has no stationary point", out.residuals);
        return out;
    }

    Eigen::VectorXd& x = out.x;
    Eigen::VectorXd& z = out.z;
    Eigen::VectorXd s = (p.b - p.A * x).cwiseMax(1.0);
    z.setOnes();

    const double scale = 1.0 + std::max(p.b.cwiseAbs().maxCoeff(), p.c.cwiseAbs().maxCoeff());
    const Eigen::MatrixXd At = p.A.transpose();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;

    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        const Eigen::VectorXd rd = p.Q * x + p.c + At * z;
        const Eigen::VectorXd rp = p.A * x + s - p.b;
        const double mu = s.dot(z) / static_cast<double>(m);
        if (rd.cwiseAbs().maxCoeff() <= opt.target * scale && rp.cwiseAbs().maxCoeff() <= opt.target * scale
            && s.cwiseProduct(z).maxCoeff() <= opt.target * scale)
            break;
        if (mu < 1e-300)
            break;

        // Augmented Newton system [Q A'; A -S/Z] [dx; dz] = [-rd; -rp + rc/z],
        // better conditioned than the normal equations once slacks vanish.
        Eigen::MatrixXd K(n + m, n + m);
        K.topLeftCorner(n, n) = p.Q;
        K.topRightCorner(n, m) = At;
        K.bottomLeftCorner(m, n) = p.A;
        K.bottomRightCorner(m, m) = (-s.cwiseQuotient(z)).asDiagonal();
        lu.compute(K);

        auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& ds,
                             Eigen::VectorXd& dz) {
            Eigen::VectorXd rhs(n + m);
            rhs.head(n) = -rd;
            rhs.tail(m) = -rp + rc.cwiseQuotient(z);
            const Eigen::VectorXd sol = lu.solve(rhs);
            dx = sol.head(n);
            dz = sol.tail(m);
            ds = (-rc - s.cwiseProduct(dz)).cwiseQuotient(z);
        };

        Eigen::VectorXd dx, ds, dz;
        direction(s.cwiseProduct(z), dx, ds, dz);
        const double a_aff = std::min(detail::max_step(s, ds), detail::max_step(z, dz));
        const double mu_aff = (s + a_aff * ds).dot(z + a_aff * dz) / static_cast<double>(m);
        const double sigma = std::pow(mu_aff / mu, 3.0);

        const Eigen::VectorXd rc =
            s.cwiseProduct(z) + ds.cwiseProduct(dz) - Eigen::VectorXd::Constant(m, sigma * mu);
        direction(rc, dx, ds, dz);
        const double alpha = 0.99 * std::min(detail::max_step(s, ds), detail::max_step(z, dz));
        const Eigen::VectorXd xn = x + alpha * dx, sn = s + alpha * ds, zn = z + alpha * dz;
        if (!xn.allFinite() || !sn.allFinite() || !zn.allFinite())
            break;
        x = xn;
        s = sn;
        z = zn;
    }
    out.iterations = it;
    out.residuals = kkt_residuals(p, x, z);
    refine(p, x, z, out.residuals);
    if (!(out.residuals.max() <= opt.tolerance))
        throw SolverFailure("qp: interior point did not converge", out.residuals);
    return out;
}

} // namespace wander::qp
