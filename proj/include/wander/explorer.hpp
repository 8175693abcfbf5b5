#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <vector>

#include <Eigen/Core>

#include "wander/error.hpp"
#include "wander/pso.hpp"
#include "wander/rng.hpp"
#include "wander/surrogate.hpp"

namespace wander {

struct AcquisitionConfig {
    double delta = 0.5;      // exploration weight
    std::size_t n_max = 16;  // sample budget
    Bounds bounds = Bounds::unit(2);

    void validate() const {
        std::vector<std::string> bad;
        if (!(delta >= 0.0) || !std::isfinite(delta))
            bad.emplace_back("delta");
        if (n_max < 1)
            bad.emplace_back("n_max");
        if (!bad.empty())
            throw ValidationError(bad, "invalid acquisition configuration");
        bounds.validate();
    }
};

/// Inverse squared-distance weight 1 / d(x, x_k)^2, d the squared distance.
inline double idw_weight(const Eigen::VectorXd& x, const Eigen::VectorXd& xk) {
    const double d = squared_distance(x, xk);
    return 1.0 / (d * d);
}

/// IDW exploration term z_N(x).
///
///   z = (1 - N/N_max) atan(sum_{k != *} w_k(x*) / sum_k w_k(x))
///     + (N/N_max) atan(1 / sum_k w_k(x))
///
/// and z = 0 on the samples. The incumbent's own weight w_*(x*) is infinite
/// and is left out of the first numerator. `n_tested` is N, `star` indexes
/// the incumbent in X.
inline double idw_z(const Eigen::VectorXd& x, const std::vector<Eigen::VectorXd>& X, std::size_t star,
                    std::size_t n_tested, std::size_t n_max) {
    if (X.empty())
        throw InvalidInput("idw_z: empty sample set");
    if (star >= X.size())
        throw InvalidInput("idw_z: incumbent is not a sample");
    if (n_max == 0)
        throw InvalidInput("idw_z: n_max must be positive");
    double sum_x = 0.0;
    for (const auto& xk : X) {
        if (squared_distance(x, xk) == 0.0)
            return 0.0;
        sum_x += idw_weight(x, xk);
    }
    double sum_star = 0.0;
    for (std::size_t k = 0; k < X.size(); ++k)
        if (k != star)
            sum_star += idw_weight(X[star], X[k]);
    const double ratio = static_cast<double>(n_tested) / static_cast<double>(n_max);
    return (1.0 - ratio) * std::atan(sum_star / sum_x) + ratio * std::atan(1.0 / sum_x);
}

/// Range of the surrogate over its own samples, clamped to 1 when flat.
inline double surrogate_range(const SurrogateModel& model) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& xk : model.samples()) {
        const double f = model.predict(xk);
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    const double range = hi - lo;
    return range < 1e-12 ? 1.0 : range;
}

/// Acquisition a_N(x) = f(x) / dF - delta z_N(x), with the sample set taken
/// from the model. Build one per proposal so dF is evaluated once.
class Acquisition {
public:
    Acquisition(const SurrogateModel& model, std::size_t star, const AcquisitionConfig& cfg)
        : model_(model), star_(star), cfg_(cfg), range_(surrogate_range(model)) {
        cfg_.validate();
        if (star >= model.samples().size())
            throw InvalidInput("acquisition: incumbent is not a sample");
    }

    double surrogate(const Eigen::VectorXd& x) const { return model_.predict(x); }
    double exploration(const Eigen::VectorXd& x) const {
        return idw_z(x, model_.samples(), star_, model_.samples().size(), cfg_.n_max);
    }
    double operator()(const Eigen::VectorXd& x) const {
        return surrogate(x) / range_ - cfg_.delta * exploration(x);
    }

    double range() const { return range_; }
    const AcquisitionConfig& config() const { return cfg_; }
    const SurrogateModel& model() const { return model_; }

private:
    const SurrogateModel& model_;
    std::size_t star_;
    AcquisitionConfig cfg_;
    double range_;
};

inline double acquisition(const Eigen::VectorXd& x, const SurrogateModel& model, std::size_t star,
                          const AcquisitionConfig& cfg) {
    return Acquisition(model, star, cfg)(x);
}

inline constexpr double kDuplicateRadius = 1e-6;  // normalized
inline constexpr int kProposalRetries = 10;

inline double min_normalized_distance(const Eigen::VectorXd& x, const std::vector<Eigen::VectorXd>& X,
                                      const Bounds& box) {
    double best = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd u = box.normalize(x);
    for (const auto& xk : X)
        best = std::min(best, (u - box.normalize(xk)).norm());
    return best;
}

/// Next sample: argmin of a_N over the box by PSO. If the minimizer lands
/// on an existing sample (often a box corner, where clamping pins the swarm)
/// the swarm is rerun with a derived seed and with points inside the
/// duplicate radius rejected, so it settles on the best distinct point.
inline Eigen::VectorXd propose_next(const SurrogateModel& model, std::size_t star, const AcquisitionConfig& cfg,
                                    const PsoConfig& pso) {
    if (model.samples().size() >= cfg.n_max)
        throw ProtocolError("propose_next: sample budget exhausted");
    const Acquisition acq(model, star, cfg);
    constexpr double rejected = std::numeric_limits<double>::max();
    auto distinct = [&](const Eigen::VectorXd& x) {
        return min_normalized_distance(x, model.samples(), cfg.bounds) > kDuplicateRadius;
    };
    auto guarded = [&](const Eigen::VectorXd& x) { return distinct(x) ? acq(x) : rejected; };
    for (int attempt = 0; attempt <= kProposalRetries; ++attempt) {
        PsoConfig run = pso;
        PsoResult r;
        if (attempt == 0) {
            r = pso_minimize(acq, cfg.bounds, run);
        } else {
            run.seed = sub_seed(pso.seed, static_cast<std::uint64_t>(attempt));
            r = pso_minimize(guarded, cfg.bounds, run);
        }
        if (r.f < rejected && distinct(r.x))
            return r.x;
    }
    throw ProposalFailure("propose_next: every retry collided with an existing sample");
}

/// Acquisition landscape on a uniform grid over the acquisition box, as CSV
/// `x1,x2,fhat,z,a`. Coordinates are written mapped through `display`, so a
/// session can report physical (M, D) while the model lives in the unit box.
inline void write_landscape_csv(std::ostream& os, const Acquisition& acq, std::size_t resolution,
                                const Bounds& display) {
    const Bounds& box = acq.config().bounds;
    if (box.dim() != 2 || display.dim() != 2)
        throw InvalidInput("landscape export needs a 2-D box");
    if (resolution < 2)
        throw InvalidInput("landscape resolution must be at least 2");
    os << "x1,x2,fhat,z,a\n" << std::setprecision(17);
    Eigen::VectorXd u(2), x(2);
    const double last = static_cast<double>(resolution - 1);
    for (std::size_t i = 0; i < resolution; ++i) {
        for (std::size_t j = 0; j < resolution; ++j) {
            u[0] = static_cast<double>(i) / last;
            u[1] = static_cast<double>(j) / last;
            x = box.denormalize(u);
            const Eigen::VectorXd shown = display.denormalize(u);
            os << shown[0] << ',' << shown[1] << ',' << acq.surrogate(x) << ',' << acq.exploration(x) << ','
               << acq(x) << '\n';
        }
    }
}

inline void write_landscape_csv(std::ostream& os, const Acquisition& acq, std::size_t resolution) {
    write_landscape_csv(os, acq, resolution, acq.config().bounds);
}

} // namespace wander
