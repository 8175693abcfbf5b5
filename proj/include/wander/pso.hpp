#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "wander/error.hpp"
#include "wander/rng.hpp"
#include "wander/surrogate.hpp"

namespace wander {

/// Constriction-coefficient defaults (Clerc & Kennedy).
struct PsoConfig {
    int particles = 40;
    int iterations = 200;
    double inertia = 0.729;
    double cognitive = 1.49445;
    double social = 1.49445;
    std::uint64_t seed = 0;

    void validate() const {
        std::vector<std::string> bad;
        if (particles < 2)
            bad.emplace_back("pso.particles");
        if (iterations < 1)
            bad.emplace_back("pso.iterations");
        if (!std::isfinite(inertia) || !std::isfinite(cognitive) || !std::isfinite(social))
            bad.emplace_back("pso.coefficients");
        if (!bad.empty())
            throw ValidationError(bad, "invalid PSO configuration");
    }

    bool operator==(const PsoConfig&) const = default;
};

struct PsoResult {
    Eigen::VectorXd x;
    double f = std::numeric_limits<double>::infinity();
};

/// Global-best particle swarm over a box. Positions are clamped to the box
/// before every evaluation, so the objective is never queried outside it.
/// Evaluation order is fixed, making results a pure function of the seed.
template <typename Objective>
PsoResult pso_minimize(Objective&& objective, const Bounds& box, const PsoConfig& cfg) {
    box.validate();
    cfg.validate();
    const Eigen::Index n = box.dim();
    const Eigen::VectorXd range = box.upper - box.lower;
    Rng rng(cfg.seed);

    auto eval = [&](const Eigen::VectorXd& x) {
        const double f = objective(x);
        if (!std::isfinite(f))
            throw InvalidInput("pso: objective returned a non-finite value");
        return f;
    };

    const auto P = static_cast<std::size_t>(cfg.particles);
    std::vector<Eigen::VectorXd> pos(P), vel(P), best(P);
    std::vector<double> best_f(P);
    PsoResult g;
    for (std::size_t i = 0; i < P; ++i) {
        pos[i].resize(n);
        vel[i].resize(n);
        for (Eigen::Index d = 0; d < n; ++d) {
            pos[i][d] = uniform(rng, box.lower[d], box.upper[d]);
            vel[i][d] = uniform(rng, -0.5, 0.5) * range[d];
        }
        best[i] = pos[i];
        best_f[i] = eval(pos[i]);
        if (best_f[i] < g.f) {
            g.f = best_f[i];
            g.x = pos[i];
        }
    }

    for (int it = 0; it < cfg.iterations; ++it) {
        for (std::size_t i = 0; i < P; ++i) {
            for (Eigen::Index d = 0; d < n; ++d) {
                const double r1 = uniform01(rng);
                const double r2 = uniform01(rng);
                double v = cfg.inertia * vel[i][d] + cfg.cognitive * r1 * (best[i][d] - pos[i][d])
                           + cfg.social * r2 * (g.x[d] - pos[i][d]);
                v = std::clamp(v, -range[d], range[d]);
                double p = pos[i][d] + v;
                if (p < box.lower[d]) {
                    p = box.lower[d];
                    v = 0.0;
                } else if (p > box.upper[d]) {
                    p = box.upper[d];
                    v = 0.0;
                }
                pos[i][d] = p;
                vel[i][d] = v;
            }
            const double f = eval(pos[i]);
            if (f < best_f[i]) {
                best_f[i] = f;
                best[i] = pos[i];
                if (f < g.f) {
                    g.f = f;
                    g.x = pos[i];
                }
            }
        }
    }
    return g;
}

} // namespace wander
