#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "wander/error.hpp"
#include "wander/metrics.hpp"
#include "wander/oracle.hpp"
#include "wander/rng.hpp"
#include "wander/simulation.hpp"

namespace wander {

/// A named parameter set under comparison.
struct Condition {
    std::string name;
    double mass = 0.0;     // kg
    double damping = 0.0;  // N s/m

    Eigen::VectorXd x() const { return Eigen::Vector2d(mass, damping); }
    bool operator==(const Condition&) const = default;
};

/// Literature baselines.
inline Condition lt1() { return {"LT1", 10.0, 120.0}; }
inline Condition lt2() { return {"LT2", 33.0, 72.6}; }

inline Condition builtin_condition(const std::string& name) {
    if (name == "LT1")
        return lt1();
    if (name == "LT2")
        return lt2();
    throw ValidationError({"conditions"}, "unknown condition '" + name + "' (built-ins are LT1 and LT2)");
}

struct BenchmarkSpec {
    std::vector<Condition> conditions{lt1(), lt2()};
    std::vector<std::string> paths = paths::builtin_names();
    int repetitions = 3;
    std::uint64_t seed = 0;
    /// Repetitions after the first scale the user's stiffness and damping
    /// gains by a factor drawn uniformly from [1 - spread, 1 + spread].
    double gain_spread = 0.1;
    SimConfig sim;

    void validate() const {
        std::vector<std::string> bad;
        std::set<std::string> names;
        for (const auto& c : conditions)
            if (c.name.empty() || !names.insert(c.name).second || !(c.mass > 0.0) || !(c.damping > 0.0))
                bad.emplace_back("conditions");
        if (conditions.size() < 2)
            bad.emplace_back("conditions");
        if (paths.empty())
            bad.emplace_back("paths");
        for (const auto& p : paths) {
            try {
                paths::by_name(p);
            } catch (const Error&) {
                bad.emplace_back("paths");
            }
        }
        if (repetitions < 1)
            bad.emplace_back("repetitions");
        if (!(gain_spread >= 0.0 && gain_spread < 1.0))
            bad.emplace_back("gain_spread");
        if (!(sim.dt > 0.0) || !(sim.duration > 0.0))
            bad.emplace_back("dt");
        if (!bad.empty()) {
            std::sort(bad.begin(), bad.end());
            bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
            throw ValidationError(bad, "invalid benchmark specification");
        }
    }
};

struct BenchmarkRun {
    std::string condition;
    std::string path;
    int repetition = 0;
    MetricReport report;
};

struct ConditionSummary {
    std::string condition;
    std::optional<double> e_linear;
    std::optional<double> e_angular;
    double j_mean = 0.0;
    std::optional<double> hidden_cost;
};

struct BenchmarkResult {
    std::vector<BenchmarkRun> runs;
    std::vector<ConditionSummary> summary;
};

/// Synthetic user for repetition `rep`: nominal for rep 0, otherwise gains
/// perturbed from a seed shared by every condition so all conditions face
/// the same users.
inline IntentModel repetition_user(const BenchmarkSpec& spec, int rep) {
    IntentModel m;
    if (rep == 0)
        return m;
    Rng rng(sub_seed(spec.seed, static_cast<std::uint64_t>(rep)));
    const double scale = 1.0 + spec.gain_spread * (2.0 * uniform01(rng) - 1.0);
    m.k_p *= scale;
    m.k_d *= scale;
    return m;
}

/// Every condition on every path and repetition, then per-condition means.
/// `hidden` (optional) adds the oracle's cost of each condition.
inline BenchmarkResult run_benchmark(const BenchmarkSpec& spec,
                                     const std::optional<PreferenceOracle::Objective>& hidden = std::nullopt) {
    spec.validate();
    BenchmarkResult out;
    for (const auto& c : spec.conditions) {
        const AdmittanceParams p = params_of(c.x());
        ConditionSummary sum{c.name, 0.0, 0.0, 0.0, std::nullopt};
        int linear = 0, angular = 0, n = 0;
        for (const auto& path : spec.paths) {
            for (int rep = 0; rep < spec.repetitions; ++rep) {
                IntentModel user = repetition_user(spec, rep);
                user.waypoints = paths::by_name(path);
                const MetricReport r = compute_report(simulate_run(p, user, spec.sim));
                out.runs.push_back({c.name, path, rep, r});
                if (r.e_linear) {
                    *sum.e_linear += *r.e_linear;
                    ++linear;
                }
                if (r.e_angular) {
                    *sum.e_angular += *r.e_angular;
                    ++angular;
                }
                sum.j_mean += r.j_mean;
                ++n;
            }
        }
        sum.e_linear = linear ? std::optional<double>(*sum.e_linear / linear) : std::nullopt;
        sum.e_angular = angular ? std::optional<double>(*sum.e_angular / angular) : std::nullopt;
        sum.j_mean /= n;
        if (hidden)
            sum.hidden_cost = (*hidden)(c.x());
        out.summary.push_back(sum);
    }
    return out;
}

inline void write_optional(std::ostream& os, const std::optional<double>& v) {
    if (v)
        os << *v;
}

inline void write_runs_csv(std::ostream& os, const BenchmarkResult& r) {
    os << "condition,path,repetition,e_linear,e_angular,j_mean\n" << std::setprecision(17);
    for (const auto& run : r.runs) {
        os << run.condition << ',' << run.path << ',' << run.repetition << ',';
        write_optional(os, run.report.e_linear);
        os << ',';
        write_optional(os, run.report.e_angular);
        os << ',' << run.report.j_mean << '\n';
    }
}

inline void write_summary_csv(std::ostream& os, const BenchmarkResult& r) {
    os << "condition,e_linear,e_angular,j_mean,hidden_cost\n" << std::setprecision(17);
    for (const auto& s : r.summary) {
        os << s.condition << ',';
        write_optional(os, s.e_linear);
        os << ',';
        write_optional(os, s.e_angular);
        os << ',' << s.j_mean << ',';
        write_optional(os, s.hidden_cost);
        os << '\n';
    }
}

} // namespace wander
