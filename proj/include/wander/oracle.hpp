#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "wander/error.hpp"
#include "wander/metrics.hpp"
#include "wander/rng.hpp"
#include "wander/simulation.hpp"
#include "wander/surrogate.hpp"

namespace wander {

/// Default search box: M in [10, 100] kg, D in [40, 200] N s/m.
inline Bounds default_bounds() {
    return {Eigen::Vector2d(10.0, 40.0), Eigen::Vector2d(100.0, 200.0)};
}

inline AdmittanceParams params_of(const Eigen::VectorXd& x, double eta = kDefaultEta) {
    if (x.size() != 2)
        throw InvalidInput("parameter vector must be (M, D)");
    return AdmittanceParams::from_sample(x[0], x[1], eta);
}

/// Mean metrics of one parameter set over an evaluation suite.
struct SuiteMetrics {
    double e_linear = 0.0;
    double j_mean = 0.0;
};

/// Simulation setup shared by the hidden cost and the benchmark.
struct EvaluationSuite {
    std::vector<std::string> paths = paths::builtin_names();
    IntentModel intent;
    SimConfig sim;

    SuiteMetrics evaluate(const AdmittanceParams& p) const {
        if (paths.empty())
            throw InvalidInput("evaluation suite has no paths");
        SuiteMetrics m;
        for (const auto& name : paths) {
            IntentModel model = intent;
            model.waypoints = paths::by_name(name);
            const MetricReport r = compute_report(simulate_run(p, model, sim));
            if (!r.e_linear)
                throw UndefinedMetric("evaluation path '" + name + "' moved no distance");
            m.e_linear += *r.e_linear;
            m.j_mean += r.j_mean;
        }
        m.e_linear /= static_cast<double>(paths.size());
        m.j_mean /= static_cast<double>(paths.size());
        return m;
    }
};

/// Hidden cost w_e E_L / E_L(mid) + w_j J / J(mid), averaged over the suite,
/// with both metrics normalized by their value at the box midpoint. Results
/// are memoized on the exact parameter values; copies share the cache.
class SimulatedCost {
public:
    explicit SimulatedCost(double w_e = 1.0, double w_j = 1.0, Bounds box = default_bounds(),
                           EvaluationSuite suite = {})
        : w_e_(w_e), w_j_(w_j), suite_(std::move(suite)), cache_(std::make_shared<Cache>()) {
        box.validate();
        if (!std::isfinite(w_e) || !std::isfinite(w_j) || w_e < 0.0 || w_j < 0.0 || w_e + w_j <= 0.0)
            throw ValidationError({"oracle.weights"}, "cost weights must be non-negative and not both zero");
        mid_ = suite_.evaluate(params_of(0.5 * (box.lower + box.upper)));
    }

    double operator()(const Eigen::VectorXd& x) const {
        const auto key = std::make_pair(x[0], x[1]);
        if (auto it = cache_->find(key); it != cache_->end())
            return it->second;
        const SuiteMetrics m = suite_.evaluate(params_of(x));
        const double f = w_e_ * m.e_linear / mid_.e_linear + w_j_ * m.j_mean / mid_.j_mean;
        cache_->emplace(key, f);
        return f;
    }

    const SuiteMetrics& midpoint() const { return mid_; }

private:
    using Cache = std::map<std::pair<double, double>, double>;
    double w_e_, w_j_;
    EvaluationSuite suite_;
    SuiteMetrics mid_;
    std::shared_ptr<Cache> cache_;
};

/// Euclidean distance to `target` in the unit box, divided by the box
/// diagonal so values lie in [0, 1].
class DistanceCost {
public:
    DistanceCost(Eigen::VectorXd target, Bounds box) : target_(std::move(target)), box_(std::move(box)) {
        box_.validate();
        if (target_.size() != box_.dim() || !box_.contains(target_))
            throw ValidationError({"oracle.target"}, "distance target must lie inside the bounds");
    }

    double operator()(const Eigen::VectorXd& x) const {
        return (box_.normalize(x) - box_.normalize(target_)).norm() / std::sqrt(static_cast<double>(box_.dim()));
    }

private:
    Eigen::VectorXd target_;
    Bounds box_;
};

/// Synthetic stand-in for the human: compares two parameter sets through a
/// hidden cost, reporting "comparable" inside a tie band and flipping the
/// answer with probability p_flip.
class PreferenceOracle {
public:
    using Objective = std::function<double(const Eigen::VectorXd&)>;

    explicit PreferenceOracle(Objective f, double tie_tolerance = 0.0, double p_flip = 0.0, std::uint64_t seed = 0)
        : f_(std::move(f)), tie_(tie_tolerance), p_flip_(p_flip), rng_(seed) {
        std::vector<std::string> bad;
        if (!(tie_ >= 0.0) || !std::isfinite(tie_))
            bad.emplace_back("oracle.tie_tolerance");
        if (!(p_flip_ >= 0.0 && p_flip_ < 0.5))
            bad.emplace_back("oracle.p_flip");
        if (!bad.empty())
            throw ValidationError(bad, "invalid oracle configuration");
    }

    double cost(const Eigen::VectorXd& x) const { return f_(x); }

    int compare(const Eigen::VectorXd& xi, const Eigen::VectorXd& xj) {
        if (xi == xj)
            throw InvalidInput("oracle: cannot compare a parameter set with itself");
        const double d = f_(xi) - f_(xj);
        if (!std::isfinite(d))
            throw InvalidInput("oracle: hidden cost is not finite");
        int pi = std::abs(d) <= tie_ ? 0 : (d < 0.0 ? -1 : 1);
        if (p_flip_ > 0.0 && pi != 0 && uniform01(rng_) < p_flip_)
            pi = -pi;
        return pi;
    }

private:
    Objective f_;
    double tie_;
    double p_flip_;
    Rng rng_;
};

inline int oracle_compare(PreferenceOracle& oracle, const Eigen::VectorXd& xi, const Eigen::VectorXd& xj) {
    return oracle.compare(xi, xj);
}

/// Serializable description of a synthetic oracle.
struct OracleConfig {
    std::string objective = "simulated";  // "simulated" or "distance"
    Eigen::VectorXd target = Eigen::Vector2d(55.0, 120.0);
    double w_e = 1.0;
    double w_j = 1.0;
    double tie_tolerance = 0.0;
    double p_flip = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const OracleConfig& o) const {
        return objective == o.objective && target.size() == o.target.size() && target == o.target && w_e == o.w_e
               && w_j == o.w_j && tie_tolerance == o.tie_tolerance && p_flip == o.p_flip && seed == o.seed;
    }
};

inline PreferenceOracle::Objective make_objective(const OracleConfig& c, const Bounds& box) {
    if (c.objective == "simulated")
        return SimulatedCost(c.w_e, c.w_j, box);
    if (c.objective == "distance")
        return DistanceCost(c.target, box);
    throw ValidationError({"oracle.objective"}, "oracle objective must be 'simulated' or 'distance'");
}

inline PreferenceOracle make_oracle(const OracleConfig& c, const Bounds& box) {
    return PreferenceOracle(make_objective(c, box), c.tie_tolerance, c.p_flip, c.seed);
}

} // namespace wander
