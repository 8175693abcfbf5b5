// wander: simulate, optimize, benchmark and serve admittance tuning sessions.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "wander/benchmark.hpp"
#include "wander/explorer.hpp"
#include "wander/metrics.hpp"
#include "wander/oracle.hpp"
#include "wander/serialize.hpp"
#include "wander/service.hpp"
#include "wander/session.hpp"
#include "wander/simulation.hpp"

namespace fs = std::filesystem;
using namespace wander;

namespace {

/// Section `key` of the --config file, or an empty object.
json config_section(const std::string& path, const char* key) {
    if (path.empty())
        return json::object();
    const json root = read_json_file(path);
    if (!root.is_object())
        throw ValidationError({"<root>"}, "config file must hold a JSON object");
    static const std::vector<std::string> known{"simulate", "session", "oracle", "benchmark", "serve"};
    std::vector<std::string> bad;
    for (const auto& [k, v] : root.items())
        if (std::find(known.begin(), known.end(), k) == known.end())
            bad.push_back(k);
    if (!bad.empty())
        throw ValidationError(bad, "unknown config section");
    return root.contains(key) ? root.at(key) : json::object();
}

fs::path prepare_out(const std::string& out) {
    const fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

std::string text_of(const std::function<void(std::ostream&)>& write) {
    std::ostringstream os;
    write(os);
    return os.str();
}

struct SimulateArgs {
    std::string config, out = "out", path = "forward_backward", condition;
    std::optional<double> mass, damping, eta, dt, duration;
};

int cmd_simulate(const SimulateArgs& a) {
    const json cfg = config_section(a.config, "simulate");
    double mass = 10.0, damping = 120.0, eta = kDefaultEta;
    std::string path = a.path;
    SimConfig sim;
    {
        std::vector<std::string> bad;
        FieldReader r(cfg, "simulate.", bad);
        std::string condition;
        r.get("condition", condition);
        if (!condition.empty()) {
            const Condition c = builtin_condition(condition);
            mass = c.mass;
            damping = c.damping;
        }
        r.get("mass", mass);
        r.get("damping", damping);
        r.get("eta", eta);
        r.get("path", path);
        r.get("dt", sim.dt);
        r.get("duration", sim.duration);
        r.finish();
        if (!bad.empty())
            throw ValidationError(bad, "invalid simulate configuration");
    }
    if (!a.condition.empty()) {
        const Condition c = builtin_condition(a.condition);
        mass = c.mass;
        damping = c.damping;
    }
    mass = a.mass.value_or(mass);
    damping = a.damping.value_or(damping);
    eta = a.eta.value_or(eta);
    sim.dt = a.dt.value_or(sim.dt);
    sim.duration = a.duration.value_or(sim.duration);

    std::vector<std::string> bad;
    if (!(mass > 0.0) || !std::isfinite(mass))
        bad.emplace_back("mass");
    if (!(damping > 0.0) || !std::isfinite(damping))
        bad.emplace_back("damping");
    if (!(eta >= 0.0 && eta <= 1.0))
        bad.emplace_back("eta");
    if (!(sim.dt > 0.0) || !std::isfinite(sim.dt))
        bad.emplace_back("dt");
    if (!(sim.duration > 0.0) || !std::isfinite(sim.duration))
        bad.emplace_back("duration");
    const auto& names = paths::builtin_names();
    if (path != "straight" && std::find(names.begin(), names.end(), path) == names.end())
        bad.emplace_back("path");
    if (!bad.empty())
        throw ValidationError(bad, "invalid simulation parameters");

    const AdmittanceParams p = AdmittanceParams::from_sample(mass, damping, eta);
    IntentModel user;
    user.waypoints = paths::by_name(path);
    const Trajectory traj = simulate_run(p, user, sim);
    const fs::path dir = prepare_out(a.out);
    write_text_file((dir / "trajectory.csv").string(), text_of([&](std::ostream& os) { write_trajectory_csv(os, traj); }));
    const json metrics{{"params", params_json(p)},
                       {"path", path},
                       {"dt", sim.dt},
                       {"samples", traj.size()},
                       {"metrics", compute_report(traj)}};
    write_json_file((dir / "metrics.json").string(), metrics);
    std::cout << metrics["metrics"].dump() << '\n';
    return 0;
}

struct OptimizeArgs {
    std::string config, out = "out", oracle;
    std::optional<std::uint64_t> seed;
    std::optional<int> h_max;
    std::optional<double> delta;
    std::size_t landscape = 50;
};

int cmd_optimize(const OptimizeArgs& a) {
    SessionConfig cfg = session_config_from_json(config_section(a.config, "session"));
    OracleConfig oc = oracle_config_from_json(config_section(a.config, "oracle"));
    if (a.seed)
        cfg.seed = *a.seed;
    if (a.h_max)
        cfg.h_max = *a.h_max;
    if (a.delta)
        cfg.delta = *a.delta;
    if (!a.oracle.empty())
        oc.objective = a.oracle;
    cfg.validate();
    oc = oracle_config_from_json(json::object(), oc);

    PreferenceOracle oracle = make_oracle(oc, cfg.bounds);
    const AutoSessionResult r = run_auto_session(cfg, oracle);
    const fs::path dir = prepare_out(a.out);
    write_json_file((dir / "trace.json").string(), r.trace);
    write_json_file((dir / "state.json").string(), r.state);
    const Eigen::VectorXd bx = best_x(r.state);
    json best = params_json(r.best);
    best["x"] = bx;
    best["hidden_cost"] = r.best_cost.back();
    best["best_cost_history"] = r.best_cost;
    best["oracle"] = oc;
    best["seed"] = seed_to_json(cfg.seed);
    write_json_file((dir / "best.json").string(), best);
    if (a.landscape >= 2) {
        const SurrogateModel model = current_model(r.state);
        write_json_file((dir / "surrogate.json").string(), model);
        write_text_file((dir / "landscape.csv").string(), text_of([&](std::ostream& os) {
                            write_landscape_csv(os, Acquisition(model, *r.state.best, acquisition_config(r.state)),
                                                a.landscape, cfg.bounds);
                        }));
    }
    std::cout << json{{"mass", r.best.m_xy}, {"damping", r.best.d_xy}, {"hidden_cost", r.best_cost.back()},
                      {"preferences", r.state.h}}
                     .dump()
              << '\n';
    return 0;
}

struct BenchmarkArgs {
    std::string config, out = "out", pbo;
    std::vector<std::string> conditions, paths;
    std::optional<int> repetitions;
    std::optional<std::uint64_t> seed;
};

int cmd_benchmark(const BenchmarkArgs& a) {
    BenchmarkSpec spec = benchmark_spec_from_json(config_section(a.config, "benchmark"));
    if (!a.conditions.empty()) {
        spec.conditions.clear();
        for (const auto& name : a.conditions)
            spec.conditions.push_back(builtin_condition(name));
    }
    if (!a.pbo.empty()) {
        const json best = read_json_file(a.pbo);
        try {
            spec.conditions.push_back({"PBO", best.at("mass").get<double>(), best.at("damping").get<double>()});
        } catch (const json::exception&) {
            throw ValidationError({"pbo"}, "PBO result must carry numeric 'mass' and 'damping'");
        }
    }
    if (!a.paths.empty())
        spec.paths = a.paths;
    if (a.repetitions)
        spec.repetitions = *a.repetitions;
    if (a.seed)
        spec.seed = *a.seed;
    spec.validate();

    const OracleConfig oc = oracle_config_from_json(config_section(a.config, "oracle"));
    const BenchmarkResult r = run_benchmark(spec, make_objective(oc, default_bounds()));
    const fs::path dir = prepare_out(a.out);
    write_text_file((dir / "runs.csv").string(), text_of([&](std::ostream& os) { write_runs_csv(os, r); }));
    write_text_file((dir / "summary.csv").string(), text_of([&](std::ostream& os) { write_summary_csv(os, r); }));
    const json summary{{"spec", benchmark_spec_json(spec)}, {"oracle", oc}, {"summary", summary_json(r)}};
    write_json_file((dir / "summary.json").string(), summary);
    std::cout << summary["summary"].dump() << '\n';
    return 0;
}

struct ServeArgs {
    std::string config, host = "127.0.0.1";
    int port = 8080;
};

int cmd_serve(const ServeArgs& a) {
    const SessionConfig defaults = session_config_from_json(config_section(a.config, "session"));
    if (a.port < 0 || a.port > 65535)
        throw ValidationError({"port"}, "port must lie in [0, 65535]");
    SessionApi api(defaults);
    httplib::Server srv;
    api.bind(srv);
    int port = a.port;
    if (port == 0) {
        port = srv.bind_to_any_port(a.host);
        if (port < 0)
            throw InvalidInput("cannot bind " + a.host);
        std::cout << "listening on http://" << a.host << ':' << port << std::endl;
        return srv.listen_after_bind() ? 0 : 1;
    }
    std::cout << "listening on http://" << a.host << ':' << port << std::endl;
    if (!srv.listen(a.host, port))
        throw InvalidInput("cannot listen on " + a.host + ":" + std::to_string(port));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable admittance simulation and preference-based tuning"};
    app.require_subcommand(1);
    std::string config;
    app.add_option("--config", config, "JSON config file with simulate/session/oracle/benchmark sections")
        ->envname("WANDER_CONFIG");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Run one parameter set on one path; write trajectory.csv, metrics.json");
    s->add_option("--out", sim.out, "output directory")->envname("WANDER_OUT");
    s->add_option("--mass", sim.mass, "virtual mass M [kg]")->envname("WANDER_MASS");
    s->add_option("--damping", sim.damping, "virtual damping D [N s/m]")->envname("WANDER_DAMPING");
    s->add_option("--eta", sim.eta, "damping reduction along the force direction")->envname("WANDER_ETA");
    s->add_option("--condition", sim.condition, "built-in parameter set (LT1, LT2)")->envname("WANDER_CONDITION");
    s->add_option("--path", sim.path, "forward_backward, lateral, figure_eight or straight")->envname("WANDER_PATH");
    s->add_option("--dt", sim.dt, "integration step [s]")->envname("WANDER_DT");
    s->add_option("--duration", sim.duration, "time limit [s]")->envname("WANDER_DURATION");

    OptimizeArgs opt;
    auto* o = app.add_subcommand("optimize", "Run a preference-based session against a synthetic oracle");
    o->add_option("--out", opt.out, "output directory")->envname("WANDER_OUT");
    o->add_option("--seed", opt.seed, "session seed")->envname("WANDER_SEED");
    o->add_option("--h-max", opt.h_max, "number of preferences")->envname("WANDER_H_MAX");
    o->add_option("--delta", opt.delta, "exploration weight")->envname("WANDER_DELTA");
    o->add_option("--oracle", opt.oracle, "hidden objective: simulated or distance")->envname("WANDER_ORACLE");
    o->add_option("--landscape", opt.landscape, "acquisition grid resolution (0 disables)")
        ->envname("WANDER_LANDSCAPE");

    BenchmarkArgs bench;
    auto* b = app.add_subcommand("benchmark", "Compare parameter sets; write runs.csv, summary.csv, summary.json");
    b->add_option("--out", bench.out, "output directory")->envname("WANDER_OUT");
    b->add_option("--conditions", bench.conditions, "built-in conditions")->delimiter(',')->envname("WANDER_CONDITIONS");
    b->add_option("--pbo", bench.pbo, "best.json from optimize, added as condition PBO")->envname("WANDER_PBO");
    b->add_option("--paths", bench.paths, "evaluation paths")->delimiter(',')->envname("WANDER_PATHS");
    b->add_option("--repetitions", bench.repetitions, "repetitions per path")->envname("WANDER_REPETITIONS");
    b->add_option("--seed", bench.seed, "seed for user variation")->envname("WANDER_SEED");

    ServeArgs serve;
    auto* v = app.add_subcommand("serve", "Serve the HTTP/JSON session API");
    v->add_option("--port", serve.port, "TCP port (0 picks a free one)")->envname("WANDER_PORT");
    v->add_option("--host", serve.host, "bind address")->envname("WANDER_HOST");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        sim.config = opt.config = bench.config = serve.config = config;
        if (s->parsed())
            return cmd_simulate(sim);
        if (o->parsed())
            return cmd_optimize(opt);
        if (b->parsed())
            return cmd_benchmark(bench);
        return cmd_serve(serve);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (!e.fields().empty()) {
            std::cerr << "invalid fields:";
            for (const auto& f : e.fields())
                std::cerr << ' ' << f;
            std::cerr << '\n';
        }
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
