#include <algorithm>
#include <limits>

#include <gtest/gtest.h>

#include "wander/serialize.hpp"

using namespace wander;

namespace {

template <typename T>
T round_trip(const T& v) {
    return json::parse(json(v).dump()).get<T>();
}

PreferenceOracle distance_oracle(const SessionConfig& cfg) {
    return PreferenceOracle(DistanceCost(Eigen::Vector2d(55, 120), cfg.bounds));
}

std::vector<std::string> fields_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        return e.fields();
    }
    ADD_FAILURE() << "no ValidationError";
    return {};
}

bool has(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

} // namespace

TEST(Json, VectorsRoundTripBitExact) {
    Eigen::VectorXd v(4);
    v << 0.1, 1.0 / 3.0, std::numeric_limits<double>::denorm_min(), -123456.789e-300;
    const auto back = round_trip(v);
    ASSERT_EQ(back.size(), 4);
    for (int k = 0; k < 4; ++k)
        EXPECT_EQ(back[k], v[k]);
}

TEST(Json, SeedsAreDecimalStrings) {
    SessionConfig cfg;
    cfg.seed = 18446744073709551557ull;
    const json j = cfg;
    EXPECT_EQ(j.at("seed"), "18446744073709551557");
    EXPECT_EQ(round_trip(cfg), cfg);
    EXPECT_EQ(session_config_from_json(json{{"seed", 7}}).seed, 7u);
    EXPECT_TRUE(has(fields_of([] { session_config_from_json(json{{"seed", "-1"}}); }), "seed"));
    EXPECT_TRUE(has(fields_of([] { session_config_from_json(json{{"seed", "12x"}}); }), "seed"));
}

TEST(Json, SessionConfigRoundTrip) {
    SessionConfig cfg;
    cfg.bounds = Bounds(Eigen::Vector2d(12.5, 41.0), Eigen::Vector2d(99.0, 0.1 + 199.8));
    cfg.h_max = 9;
    cfg.n_init = 3;
    cfg.delta = 0.3;
    cfg.rbf.gamma = 2.0;
    cfg.pso.particles = 17;
    cfg.gamma_recalibration_at.reset();
    EXPECT_EQ(round_trip(cfg), cfg);
    cfg.gamma_recalibration_at = 4;
    EXPECT_EQ(round_trip(cfg), cfg);
}

TEST(Json, ValidationListsEveryBadField) {
    const json j{{"h_max", 0}, {"delta", "big"}, {"colour", "red"}, {"rbf", {{"gamma", -1.0}, {"kernel", "x"}}}};
    const auto f = fields_of([&] { session_config_from_json(j); });
    for (const char* name : {"h_max", "delta", "colour", "rbf.kernel"})
        EXPECT_TRUE(has(f, name)) << name;
}

TEST(Json, MalformedBoundsRejected) {
    const json j{{"bounds", {{"lower", {50, 40}}, {"upper", {20, 200}}}}};
    EXPECT_TRUE(has(fields_of([&] { session_config_from_json(j); }), "bounds"));
    const json wrong_dim{{"bounds", {{"lower", {10}}, {"upper", {20, 200}}}}};
    EXPECT_FALSE(fields_of([&] { session_config_from_json(wrong_dim); }).empty());
}

TEST(Json, OracleConfigRoundTrip) {
    OracleConfig o;
    o.objective = "distance";
    o.target = Eigen::Vector2d(60.25, 100.0 / 3.0 + 50.0);
    o.w_e = 0.7;
    o.tie_tolerance = 0.05;
    o.p_flip = 0.1;
    o.seed = 99;
    EXPECT_EQ(round_trip(o), o);
    EXPECT_TRUE(has(fields_of([] { oracle_config_from_json(json{{"p_flip", 0.7}, {"bogus", 1}}); }), "oracle.bogus"));
}

TEST(Json, MetricReportRoundTrip) {
    IntentModel user;
    user.waypoints = paths::by_name("figure_eight");
    const MetricReport r = compute_report(simulate_run(params_of(Eigen::Vector2d(30, 90)), user));
    EXPECT_EQ(round_trip(r), r);
    MetricReport still;
    EXPECT_EQ(json(still).at("e_linear"), nullptr);
    EXPECT_EQ(round_trip(still), still);
}

TEST(Json, SurrogateModelRoundTrip) {
    const std::vector<Eigen::VectorXd> X{Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(0.7, 0.4),
                                         Eigen::Vector2d(0.3, 0.9)};
    const std::vector<PreferenceRecord> B{{0, 1, -1}, {0, 2, 1}};
    const SurrogateModel m = fit(X, B, SurrogateSettings{});
    const SurrogateModel back = round_trip(m);
    EXPECT_EQ(back, m);
    EXPECT_EQ(back.predict(Eigen::Vector2d(0.45, 0.55)), m.predict(Eigen::Vector2d(0.45, 0.55)));
}

TEST(Json, BenchmarkSpecRoundTrip) {
    BenchmarkSpec b;
    b.conditions.push_back({"PBO", 88.5, 91.25});
    b.paths = {"lateral", "straight"};
    b.repetitions = 2;
    b.seed = 5;
    b.sim.duration = 4.0;
    const BenchmarkSpec back = benchmark_spec_from_json(benchmark_spec_json(b));
    EXPECT_EQ(back.conditions, b.conditions);
    EXPECT_EQ(back.paths, b.paths);
    EXPECT_EQ(back.repetitions, 2);
    EXPECT_EQ(back.seed, 5u);
    EXPECT_EQ(back.sim.duration, 4.0);
    EXPECT_EQ(benchmark_spec_from_json(json{{"conditions", {"LT2", "LT1"}}}).conditions,
              (std::vector<Condition>{lt2(), lt1()}));
    EXPECT_TRUE(has(fields_of([] { benchmark_spec_from_json(json{{"conditions", {"LT9"}}}); }), "benchmark.conditions"));
}

TEST(Json, SessionStateRoundTripMidAndDone) {
    SessionConfig cfg;
    cfg.seed = 21;
    auto s = init_session(cfg);
    auto oracle = distance_oracle(cfg);
    EXPECT_EQ(round_trip(s), s);
    for (int k = 0; k < 10; ++k)
        submit_preference(s, oracle.compare(s.physical(s.pair[0]), s.physical(s.pair[1])));
    EXPECT_EQ(round_trip(s), s);
    EXPECT_EQ(round_trip(s.log.back()), s.log.back());
    while (s.phase != Phase::done)
        submit_preference(s, oracle.compare(s.physical(s.pair[0]), s.physical(s.pair[1])));
    EXPECT_EQ(round_trip(s), s);
}

TEST(Json, ResumedSessionContinuesIdentically) {
    SessionConfig cfg;
    cfg.seed = 8;
    auto live = init_session(cfg);
    auto oracle = distance_oracle(cfg);
    auto step = [&](SessionState& st) {
        submit_preference(st, oracle.compare(st.physical(st.pair[0]), st.physical(st.pair[1])));
    };
    for (int k = 0; k < 6; ++k)
        step(live);
    SessionState resumed = json::parse(json(live).dump()).get<SessionState>();
    while (live.phase != Phase::done) {
        step(live);
        step(resumed);
    }
    EXPECT_EQ(resumed, live);
}

TEST(Json, StateIndicesChecked) {
    json j = init_session(SessionConfig{});
    j["pair"] = {0, 7};
    EXPECT_THROW(j.get<SessionState>(), ValidationError);
}
