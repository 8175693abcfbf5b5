#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "wander/benchmark.hpp"
#include "wander/error.hpp"
#include "wander/metrics.hpp"
#include "wander/oracle.hpp"
#include "wander/session.hpp"
#include "wander/surrogate.hpp"

namespace nlohmann {

template <>
struct adl_serializer<Eigen::VectorXd> {
    static void to_json(json& j, const Eigen::VectorXd& v) {
        j = json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i)
            j.push_back(v[i]);
    }
    static void from_json(const json& j, Eigen::VectorXd& v) {
        if (!j.is_array())
            throw json::type_error::create(302, "expected an array of numbers", &j);
        v.resize(static_cast<Eigen::Index>(j.size()));
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number())
                throw json::type_error::create(302, "expected an array of numbers", &j);
            v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
        }
    }
};

} // namespace nlohmann

namespace wander {

using json = nlohmann::json;

/// Seeds travel as decimal strings so 64-bit values survive any JSON reader.
inline json seed_to_json(std::uint64_t s) { return std::to_string(s); }

inline std::uint64_t seed_from_json(const json& j) {
    if (j.is_number_unsigned())
        return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        std::size_t used = 0;
        if (!s.empty() && s[0] != '-') {
            try {
                const auto v = std::stoull(s, &used, 10);
                if (used == s.size())
                    return v;
            } catch (const std::exception&) {
            }
        }
    }
    throw json::type_error::create(302, "seed must be a non-negative integer or decimal string", &j);
}

/// Reads an object field by field, recording the dotted name of every
/// missing-typed or unknown key instead of stopping at the first one.
class FieldReader {
public:
    FieldReader(const json& j, std::string prefix, std::vector<std::string>& bad)
        : j_(j), prefix_(std::move(prefix)), bad_(bad) {
        if (!j_.is_object())
            bad_.push_back(prefix_.empty() ? "<root>" : prefix_.substr(0, prefix_.size() - 1));
    }

    template <typename T>
    void get(const char* key, T& out) {
        read(key, [&](const json& v) { out = v.get<T>(); });
    }

    void seed(const char* key, std::uint64_t& out) {
        read(key, [&](const json& v) { out = seed_from_json(v); });
    }

    template <typename F>
    void read(const char* key, F&& f) {
        seen_.insert(key);
        if (!j_.is_object() || !j_.contains(key))
            return;
        try {
            f(j_.at(key));
        } catch (const json::exception&) {
            bad_.push_back(prefix_ + key);
        } catch (const ValidationError&) {
            bad_.push_back(prefix_ + key);
        }
    }

    /// Nested object handled by `f(reader)`.
    template <typename F>
    void object(const char* key, F&& f) {
        seen_.insert(key);
        if (!j_.is_object() || !j_.contains(key))
            return;
        FieldReader sub(j_.at(key), prefix_ + key + ".", bad_);
        f(sub);
        sub.finish();
    }

    void finish() {
        if (!j_.is_object())
            return;
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k))
                bad_.push_back(prefix_ + k);
    }

    const std::string& prefix() const { return prefix_; }

private:
    const json& j_;
    std::string prefix_;
    std::vector<std::string>& bad_;
    std::set<std::string> seen_;
};

// ---- Bounds, surrogate settings, PSO ------------------------------------

inline void to_json(json& j, const Bounds& b) { j = {{"lower", b.lower}, {"upper", b.upper}}; }

inline void read_bounds(FieldReader& r, Bounds& b) {
    r.get("lower", b.lower);
    r.get("upper", b.upper);
}

inline void to_json(json& j, const SurrogateSettings& s) {
    j = {{"kind", std::string(to_string(s.kind))}, {"gamma", s.gamma}, {"sigma", s.sigma}, {"lambda", s.lambda}};
}

inline void read_surrogate_settings(FieldReader& r, SurrogateSettings& s) {
    r.read("kind", [&](const json& v) { s.kind = kernel_from_string(v.get<std::string>()); });
    r.get("gamma", s.gamma);
    r.get("sigma", s.sigma);
    r.get("lambda", s.lambda);
}

inline void to_json(json& j, const PsoConfig& p) {
    j = {{"particles", p.particles}, {"iterations", p.iterations}, {"inertia", p.inertia},
         {"cognitive", p.cognitive}, {"social", p.social},         {"seed", seed_to_json(p.seed)}};
}

inline void read_pso(FieldReader& r, PsoConfig& p) {
    r.get("particles", p.particles);
    r.get("iterations", p.iterations);
    r.get("inertia", p.inertia);
    r.get("cognitive", p.cognitive);
    r.get("social", p.social);
    r.seed("seed", p.seed);
}

// ---- Session configuration -----------------------------------------------

inline void to_json(json& j, const SessionConfig& c) {
    j = {{"bounds", c.bounds},
         {"h_max", c.h_max},
         {"n_init", c.n_init},
         {"rbf", c.rbf},
         {"delta", c.delta},
         {"pso", c.pso},
         {"seed", seed_to_json(c.seed)},
         {"gamma_recalibration_at", c.gamma_recalibration_at ? json(*c.gamma_recalibration_at) : json(nullptr)}};
}

inline void read_session_config(FieldReader& r, SessionConfig& c) {
    r.object("bounds", [&](FieldReader& b) { read_bounds(b, c.bounds); });
    r.get("h_max", c.h_max);
    r.get("n_init", c.n_init);
    r.object("rbf", [&](FieldReader& s) { read_surrogate_settings(s, c.rbf); });
    r.get("delta", c.delta);
    r.object("pso", [&](FieldReader& p) { read_pso(p, c.pso); });
    r.seed("seed", c.seed);
    r.read("gamma_recalibration_at", [&](const json& v) {
        c.gamma_recalibration_at = v.is_null() ? std::nullopt : std::optional<int>(v.get<int>());
    });
}

/// Parse and validate, listing every offending field in one error.
inline SessionConfig session_config_from_json(const json& j, SessionConfig c = {}) {
    std::vector<std::string> bad;
    FieldReader r(j, "", bad);
    read_session_config(r, c);
    r.finish();
    try {
        c.validate();
    } catch (const ValidationError& e) {
        bad.insert(bad.end(), e.fields().begin(), e.fields().end());
    }
    if (!bad.empty())
        throw ValidationError(bad, "invalid session configuration");
    return c;
}

inline void from_json(const json& j, SessionConfig& c) { c = session_config_from_json(j); }

// ---- Oracle --------------------------------------------------------------

inline void to_json(json& j, const OracleConfig& o) {
    j = {{"objective", o.objective}, {"target", o.target},     {"w_e", o.w_e},
         {"w_j", o.w_j},             {"tie_tolerance", o.tie_tolerance}, {"p_flip", o.p_flip},
         {"seed", seed_to_json(o.seed)}};
}

inline void read_oracle(FieldReader& r, OracleConfig& o) {
    r.get("objective", o.objective);
    r.get("target", o.target);
    r.get("w_e", o.w_e);
    r.get("w_j", o.w_j);
    r.get("tie_tolerance", o.tie_tolerance);
    r.get("p_flip", o.p_flip);
    r.seed("seed", o.seed);
}

inline OracleConfig oracle_config_from_json(const json& j, OracleConfig o = {}) {
    std::vector<std::string> bad;
    FieldReader r(j, "oracle.", bad);
    read_oracle(r, o);
    r.finish();
    if (o.objective != "simulated" && o.objective != "distance")
        bad.emplace_back("oracle.objective");
    if (!(o.tie_tolerance >= 0.0))
        bad.emplace_back("oracle.tie_tolerance");
    if (!(o.p_flip >= 0.0 && o.p_flip < 0.5))
        bad.emplace_back("oracle.p_flip");
    if (!bad.empty())
        throw ValidationError(bad, "invalid oracle configuration");
    return o;
}

inline void from_json(const json& j, OracleConfig& o) { o = oracle_config_from_json(j); }

// ---- Records, metrics, models ----------------------------------------------

inline void to_json(json& j, const PreferenceRecord& r) { j = {{"i", r.i}, {"j", r.j}, {"pi", r.pi}}; }

inline void from_json(const json& j, PreferenceRecord& r) {
    r.i = j.at("i").get<std::size_t>();
    r.j = j.at("j").get<std::size_t>();
    r.pi = j.at("pi").get<int>();
    validate_preference(r.pi);
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::optional<double> optional_number(const json& j) {
    return j.is_null() ? std::nullopt : std::optional<double>(j.get<double>());
}

inline void to_json(json& j, const MetricReport& m) {
    j = {{"e_linear", optional_number(m.e_linear)},
         {"e_angular", optional_number(m.e_angular)},
         {"j_mean", m.j_mean},
         {"path_length_s", m.path_length_s},
         {"total_rotation_theta", m.total_rotation_theta}};
}

inline void from_json(const json& j, MetricReport& m) {
    m.e_linear = optional_number(j.at("e_linear"));
    m.e_angular = optional_number(j.at("e_angular"));
    m.j_mean = j.at("j_mean").get<double>();
    m.path_length_s = j.at("path_length_s").get<double>();
    m.total_rotation_theta = j.at("total_rotation_theta").get<double>();
}

namespace qp {

inline void to_json(json& j, const KktResiduals& r) {
    j = {{"stationarity", r.stationarity},
         {"primal", r.primal},
         {"dual", r.dual},
         {"complementarity", r.complementarity}};
}

inline void from_json(const json& j, KktResiduals& r) {
    r.stationarity = j.at("stationarity").get<double>();
    r.primal = j.at("primal").get<double>();
    r.dual = j.at("dual").get<double>();
    r.complementarity = j.at("complementarity").get<double>();
}

} // namespace qp

inline void to_json(json& j, const SurrogateModel& m) {
    j = {{"settings", m.settings()},
         {"samples", m.samples()},
         {"beta", m.beta()},
         {"slacks", m.slacks()},
         {"residuals", m.residuals()}};
}

inline void from_json(const json& j, SurrogateModel& m) {
    std::vector<std::string> bad;
    SurrogateSettings s;
    FieldReader r(j.at("settings"), "settings.", bad);
    read_surrogate_settings(r, s);
    r.finish();
    if (!bad.empty())
        throw ValidationError(bad, "invalid surrogate settings");
    m = SurrogateModel(s, j.at("samples").get<std::vector<Eigen::VectorXd>>(), j.at("beta").get<Eigen::VectorXd>(),
                       j.at("slacks").get<Eigen::VectorXd>());
    if (j.contains("residuals"))
        m.set_residuals(j.at("residuals").get<qp::KktResiduals>());
}

// ---- Session state and trace ---------------------------------------------

inline void to_json(json& j, const TraceEvent& e) {
    j = {{"h", e.h},
         {"proposed_x", e.proposed_x ? json(*e.proposed_x) : json(nullptr)},
         {"pair", json::array({e.pair[0], e.pair[1]})},
         {"pi", e.pi},
         {"best_x", e.best_x},
         {"gamma", e.gamma},
         {"timestamp", e.timestamp}};
}

inline void from_json(const json& j, TraceEvent& e) {
    e.h = j.at("h").get<int>();
    const json& p = j.at("proposed_x");
    e.proposed_x = p.is_null() ? std::nullopt : std::optional<Eigen::VectorXd>(p.get<Eigen::VectorXd>());
    const json& pair = j.at("pair");
    if (!pair.is_array() || pair.size() != 2)
        throw ValidationError({"pair"}, "trace pair must hold two parameter sets");
    e.pair = {pair[0].get<Eigen::VectorXd>(), pair[1].get<Eigen::VectorXd>()};
    e.pi = j.at("pi").get<int>();
    e.best_x = j.at("best_x").get<Eigen::VectorXd>();
    e.gamma = j.at("gamma").get<double>();
    e.timestamp = j.at("timestamp").get<std::uint64_t>();
}

inline void to_json(json& j, const SessionState& s) {
    j = {{"config", s.config},
         {"samples", s.samples},
         {"preferences", s.preferences},
         {"best", s.best ? json(*s.best) : json(nullptr)},
         {"h", s.h},
         {"phase", std::string(to_string(s.phase))},
         {"rng", s.rng},
         {"log", s.log},
         {"gamma", s.gamma},
         {"version", s.version},
         {"pair", s.pair},
         {"queue", s.queue}};
}

inline void from_json(const json& j, SessionState& s) {
    s.config = session_config_from_json(j.at("config"));
    s.samples = j.at("samples").get<std::vector<Eigen::VectorXd>>();
    s.preferences = j.at("preferences").get<std::vector<PreferenceRecord>>();
    const json& b = j.at("best");
    s.best = b.is_null() ? std::nullopt : std::optional<std::size_t>(b.get<std::size_t>());
    s.h = j.at("h").get<int>();
    s.phase = phase_from_string(j.at("phase").get<std::string>());
    s.rng = j.at("rng").get<std::string>();
    s.log = j.at("log").get<std::vector<TraceEvent>>();
    s.gamma = j.at("gamma").get<double>();
    s.version = j.at("version").get<std::uint64_t>();
    s.pair = j.at("pair").get<std::array<std::size_t, 2>>();
    s.queue = j.at("queue").get<std::vector<std::size_t>>();
    for (std::size_t k : {s.pair[0], s.pair[1]})
        if (k >= s.samples.size())
            throw ValidationError({"pair"}, "session pair references an unknown sample");
    if (s.best && *s.best >= s.samples.size())
        throw ValidationError({"best"}, "incumbent references an unknown sample");
}

inline json params_json(const AdmittanceParams& p) {
    return {{"mass", p.m_xy}, {"damping", p.d_xy}, {"inertia", p.j_z}, {"rot_damping", p.d_z}, {"eta", p.eta}};
}

// ---- Benchmark -------------------------------------------------------------

inline void to_json(json& j, const Condition& c) { j = {{"name", c.name}, {"mass", c.mass}, {"damping", c.damping}}; }

/// A condition is either a built-in name ("LT1") or {"name", "mass", "damping"}.
inline void from_json(const json& j, Condition& c) {
    if (j.is_string()) {
        c = builtin_condition(j.get<std::string>());
        return;
    }
    c.name = j.at("name").get<std::string>();
    c.mass = j.at("mass").get<double>();
    c.damping = j.at("damping").get<double>();
}

inline json benchmark_spec_json(const BenchmarkSpec& b) {
    return {{"conditions", b.conditions}, {"paths", b.paths},           {"repetitions", b.repetitions},
            {"seed", seed_to_json(b.seed)}, {"gain_spread", b.gain_spread}, {"dt", b.sim.dt},
            {"duration", b.sim.duration}};
}

inline BenchmarkSpec benchmark_spec_from_json(const json& j, BenchmarkSpec b = {}) {
    std::vector<std::string> bad;
    FieldReader r(j, "benchmark.", bad);
    r.get("conditions", b.conditions);
    r.get("paths", b.paths);
    r.get("repetitions", b.repetitions);
    r.seed("seed", b.seed);
    r.get("gain_spread", b.gain_spread);
    r.get("dt", b.sim.dt);
    r.get("duration", b.sim.duration);
    r.finish();
    try {
        b.validate();
    } catch (const ValidationError& e) {
        for (const auto& f : e.fields())
            bad.push_back("benchmark." + f);
    }
    if (!bad.empty())
        throw ValidationError(bad, "invalid benchmark specification");
    return b;
}

inline json summary_json(const BenchmarkResult& r) {
    json rows = json::array();
    for (const auto& s : r.summary)
        rows.push_back({{"condition", s.condition},
                        {"e_linear", optional_number(s.e_linear)},
                        {"e_angular", optional_number(s.e_angular)},
                        {"j_mean", s.j_mean},
                        {"hidden_cost", optional_number(s.hidden_cost)}});
    return rows;
}

// ---- Files -----------------------------------------------------------------

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError({path}, "malformed JSON in '" + path + "': " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InvalidInput("cannot write '" + path + "'");
    out << text;
    if (!out)
        throw InvalidInput("write failed for '" + path + "'");
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

} // namespace wander
