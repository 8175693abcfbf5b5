#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "wander/error.hpp"
#include "wander/explorer.hpp"
#include "wander/oracle.hpp"
#include "wander/pso.hpp"
#include "wander/rng.hpp"
#include "wander/surrogate.hpp"

namespace wander {

inline bool same_vector(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.size() == b.size() && (a.array() == b.array()).all();
}

inline bool same_vectors(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), same_vector);
}

struct SessionConfig {
    Bounds bounds = default_bounds();
    int h_max = 15;
    int n_init = 2;
    SurrogateSettings rbf;
    double delta = 0.5;
    PsoConfig pso;
    std::uint64_t seed = 0;
    std::optional<int> gamma_recalibration_at = 9;

    /// Total samples a finished session has tested.
    std::size_t n_max() const { return static_cast<std::size_t>(h_max) + 1; }

    void validate() const {
        std::vector<std::string> bad;
        try {
            bounds.validate();
            if (bounds.dim() != 2)
                bad.emplace_back("bounds");
        } catch (const ValidationError&) {
            bad.emplace_back("bounds");
        }
        if (n_init < 2)
            bad.emplace_back("n_init");
        if (h_max < 1 || h_max < n_init - 1)
            bad.emplace_back("h_max");
        try {
            rbf.validate();
        } catch (const ValidationError& e) {
            for (const auto& f : e.fields())
                bad.push_back("rbf." + f);
        }
        if (!(delta >= 0.0) || !std::isfinite(delta))
            bad.emplace_back("delta");
        try {
            pso.validate();
        } catch (const ValidationError& e) {
            bad.insert(bad.end(), e.fields().begin(), e.fields().end());
        }
        if (gamma_recalibration_at && *gamma_recalibration_at < 1)
            bad.emplace_back("gamma_recalibration_at");
        if (!bad.empty())
            throw ValidationError(bad, "invalid session configuration");
    }

    bool operator==(const SessionConfig&) const = default;
};

enum class Phase { awaiting_preference, proposing, done };

inline std::string_view to_string(Phase p) {
    switch (p) {
    case Phase::awaiting_preference: return "awaiting_preference";
    case Phase::proposing: return "proposing";
    default: return "done";
    }
}

inline Phase phase_from_string(std::string_view s) {
    if (s == "awaiting_preference")
        return Phase::awaiting_preference;
    if (s == "proposing")
        return Phase::proposing;
    if (s == "done")
        return Phase::done;
    throw ValidationError({"phase"}, "unknown session phase '" + std::string(s) + "'");
}

/// One answered comparison. Coordinates are physical (M, D). `timestamp` is
/// the state version after the event, a logical clock that keeps traces
/// reproducible.
struct TraceEvent {
    int h = 0;
    std::optional<Eigen::VectorXd> proposed_x;
    std::array<Eigen::VectorXd, 2> pair;
    int pi = 0;
    Eigen::VectorXd best_x;
    double gamma = 0.0;
    std::uint64_t timestamp = 0;

    bool operator==(const TraceEvent& o) const {
        return h == o.h && proposed_x.has_value() == o.proposed_x.has_value()
               && (!proposed_x || same_vector(*proposed_x, *o.proposed_x)) && same_vector(pair[0], o.pair[0])
               && same_vector(pair[1], o.pair[1]) && pi == o.pi && same_vector(best_x, o.best_x)
               && gamma == o.gamma && timestamp == o.timestamp;
    }
};

/// Samples are kept in unit-box coordinates, the space the surrogate and the
/// proposal work in; physical values are derived through the bounds.
struct SessionState {
    SessionConfig config;
    std::vector<Eigen::VectorXd> samples;
    std::vector<PreferenceRecord> preferences;
    std::optional<std::size_t> best;
    int h = 0;
    Phase phase = Phase::awaiting_preference;
    std::string rng;
    std::vector<TraceEvent> log;
    double gamma = 0.0;
    std::uint64_t version = 0;
    std::array<std::size_t, 2> pair{0, 1};
    std::vector<std::size_t> queue;

    Eigen::VectorXd physical(std::size_t k) const { return config.bounds.denormalize(samples.at(k)); }

    bool operator==(const SessionState& o) const {
        return config == o.config && same_vectors(samples, o.samples) && preferences == o.preferences
               && best == o.best && h == o.h && phase == o.phase && rng == o.rng && log == o.log
               && gamma == o.gamma && version == o.version && pair == o.pair && queue == o.queue;
    }
};

/// Latin hypercube of n points in the unit box of dimension `dim`.
inline std::vector<Eigen::VectorXd> latin_hypercube(Rng& rng, std::size_t n, Eigen::Index dim) {
    std::vector<Eigen::VectorXd> pts(n, Eigen::VectorXd(dim));
    std::vector<std::size_t> perm(n);
    for (Eigen::Index d = 0; d < dim; ++d) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t k = n; k > 1; --k) {
            const auto r = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(k));
            std::swap(perm[k - 1], perm[std::min(r, k - 1)]);
        }
        for (std::size_t k = 0; k < n; ++k)
            pts[k][d] = (static_cast<double>(perm[k]) + uniform01(rng)) / static_cast<double>(n);
    }
    return pts;
}

/// Fresh session: n_init Latin hypercube samples, first pair (x1, x2), the
/// rest queued to be compared one by one against the incumbent.
inline SessionState init_session(const SessionConfig& cfg) {
    cfg.validate();
    SessionState s;
    s.config = cfg;
    Rng rng(cfg.seed);
    s.samples = latin_hypercube(rng, static_cast<std::size_t>(cfg.n_init), cfg.bounds.dim());
    s.rng = rng_state(rng);
    s.gamma = cfg.rbf.gamma;
    s.pair = {0, 1};
    for (std::size_t k = 2; k < s.samples.size(); ++k)
        s.queue.push_back(k);
    return s;
}

inline SurrogateSettings current_settings(const SessionState& s) {
    SurrogateSettings rbf = s.config.rbf;
    rbf.gamma = s.gamma;
    return rbf;
}

/// Surrogate fitted to every preference so far.
inline SurrogateModel current_model(const SessionState& s) {
    if (s.preferences.empty())
        throw ProtocolError("no preferences yet, nothing to fit");
    return fit(s.samples, s.preferences, current_settings(s));
}

inline AcquisitionConfig acquisition_config(const SessionState& s) {
    AcquisitionConfig a;
    a.delta = s.config.delta;
    a.n_max = s.config.n_max();
    a.bounds = Bounds::unit(s.config.bounds.dim());
    return a;
}

inline constexpr std::array<double, 6> kGammaGrid{0.5, 1.0, 2.0, 3.0, 5.0, 10.0};

/// Fraction of preferences reproduced by a surrogate fitted without them.
inline double leave_one_out_consistency(const std::vector<Eigen::VectorXd>& X, const std::vector<PreferenceRecord>& B,
                                        const SurrogateSettings& rbf) {
    int hits = 0;
    for (std::size_t h = 0; h < B.size(); ++h) {
        std::vector<PreferenceRecord> rest;
        for (std::size_t k = 0; k < B.size(); ++k)
            if (k != h)
                rest.push_back(B[k]);
        const SurrogateModel m = fit(X, rest, rbf);
        const double d = m.predict(X[B[h].i]) - m.predict(X[B[h].j]);
        const bool ok = B[h].pi == -1 ? d < 0.0 : B[h].pi == 1 ? d > 0.0 : std::abs(d) <= rbf.sigma;
        hits += ok ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(B.size());
}

/// Grid search of the RBF shape over kGammaGrid (plus the current gamma) by
/// leave-one-preference-out consistency. Ties go to the current gamma, then
/// to the candidate nearest it on a log scale, then to the smaller one.
/// Candidates whose fits fail are skipped.
inline double recalibrate_gamma(const SessionState& s) {
    if (s.preferences.size() < 3)
        throw ProtocolError("gamma recalibration needs at least three preferences");
    const double incumbent = s.gamma;
    std::vector<double> candidates(kGammaGrid.begin(), kGammaGrid.end());
    if (std::find(candidates.begin(), candidates.end(), incumbent) == candidates.end())
        candidates.push_back(incumbent);
    auto rank = [&](double g) { return std::make_pair(std::abs(std::log(g / incumbent)), g); };

    double best_gamma = incumbent;
    double best_score = -1.0;
    for (double g : candidates) {
        SurrogateSettings rbf = s.config.rbf;
        rbf.gamma = g;
        double score;
        try {
            score = leave_one_out_consistency(s.samples, s.preferences, rbf);
        } catch (const qp::SolverFailure&) {
            continue;
        }
        if (score > best_score || (score == best_score && rank(g) < rank(best_gamma))) {
            best_score = score;
            best_gamma = g;
        }
    }
    return best_gamma;
}

/// Record the answer to the current pair and advance the session: update
/// the incumbent, recalibrate gamma when scheduled, then either pull the
/// next queued initial sample or fit and propose a new one. Leaves `s`
/// untouched if anything throws.
inline void submit_preference(SessionState& s, int pi) {
    if (s.phase != Phase::awaiting_preference)
        throw ProtocolError("session is not awaiting a preference (phase " + std::string(to_string(s.phase)) + ")");
    validate_preference(pi);

    SessionState next = s;
    const auto [i, j] = next.pair;
    next.preferences.push_back({i, j, pi});
    ++next.h;
    if (pi == -1)
        next.best = i;
    else if (pi == 1)
        next.best = j;
    else if (!next.best)
        next.best = i;

    std::optional<Eigen::VectorXd> proposed;
    if (next.h >= next.config.h_max) {
        next.phase = Phase::done;
    } else {
        next.phase = Phase::proposing;
        if (next.config.gamma_recalibration_at && next.h == *next.config.gamma_recalibration_at
            && next.preferences.size() >= 3)
            next.gamma = recalibrate_gamma(next);
        if (!next.queue.empty()) {
            next.pair = {*next.best, next.queue.front()};
            next.queue.erase(next.queue.begin());
        } else {
            const SurrogateModel model = current_model(next);
            Rng rng = rng_from_state(next.rng);
            PsoConfig pso = next.config.pso;
            pso.seed = rng();
            const Eigen::VectorXd x = propose_next(model, *next.best, acquisition_config(next), pso);
            next.rng = rng_state(rng);
            next.samples.push_back(x);
            next.pair = {*next.best, next.samples.size() - 1};
            proposed = next.physical(next.samples.size() - 1);
        }
        next.phase = Phase::awaiting_preference;
    }
    ++next.version;
    next.log.push_back({next.h, proposed, {next.physical(i), next.physical(j)}, pi, next.physical(*next.best),
                        next.gamma, next.version});
    s = std::move(next);
}

/// Physical parameters of the incumbent.
inline Eigen::VectorXd best_x(const SessionState& s) {
    if (!s.best)
        throw ProtocolError("no incumbent before the first preference");
    return s.physical(*s.best);
}

struct AutoSessionResult {
    SessionState state;
    AdmittanceParams best;
    std::vector<TraceEvent> trace;
    std::vector<double> best_cost;  // hidden cost of the incumbent after each preference
};

/// Closed loop against a synthetic oracle until the budget is spent.
inline AutoSessionResult run_auto_session(const SessionConfig& cfg, PreferenceOracle& oracle) {
    AutoSessionResult out;
    SessionState s = init_session(cfg);
    while (s.phase != Phase::done) {
        const int pi = oracle_compare(oracle, s.physical(s.pair[0]), s.physical(s.pair[1]));
        submit_preference(s, pi);
        out.best_cost.push_back(oracle.cost(best_x(s)));
    }
    out.best = params_of(best_x(s));
    out.trace = s.log;
    out.state = std::move(s);
    return out;
}

} // namespace wander
