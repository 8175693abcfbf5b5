#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>

#include "wander/error.hpp"
#include "wander/explorer.hpp"
#include "wander/metrics.hpp"
#include "wander/serialize.hpp"
#include "wander/session.hpp"
#include "wander/simulation.hpp"

// After Eigen: <resolv.h> defines a `_res` macro that collides with Eigen internals.
#include "httplib.h"

namespace wander {

/// Decimated run of one candidate on one path, for side-by-side display.
/// Every `stride`-th sample is kept; jerk is the first difference of the
/// full-rate acceleration at that sample.
inline json run_view_json(const AdmittanceParams& p, const std::string& path, std::size_t stride) {
    IntentModel user;
    user.waypoints = paths::by_name(path);
    const Trajectory traj = simulate_run(p, user);
    json t = json::array(), qx = json::array(), qy = json::array(), qtheta = json::array(), speed = json::array(),
         jerk = json::array();
    for (std::size_t k = 0; k < traj.size(); k += stride) {
        const MotionState& s = traj[k].state;
        t.push_back(s.t);
        qx.push_back(s.q.x());
        qy.push_back(s.q.y());
        qtheta.push_back(s.q.z());
        speed.push_back(s.v.head<2>().norm());
        jerk.push_back(k == 0 ? 0.0 : (s.a - traj[k - 1].state.a).norm() / traj.dt);
    }
    return {{"path", path},
            {"metrics", compute_report(traj)},
            {"t", t},
            {"qx", qx},
            {"qy", qy},
            {"qtheta", qtheta},
            {"speed", speed},
            {"jerk", jerk}};
}

inline json point_json(const Eigen::VectorXd& x) { return {{"mass", x[0]}, {"damping", x[1]}}; }

/// Fields every response carries.
inline json session_header(const std::string& id, const SessionState& s) {
    return {{"id", id},
            {"phase", std::string(to_string(s.phase))},
            {"version", s.version},
            {"h", s.h},
            {"h_max", s.config.h_max}};
}

inline json session_view_json(const std::string& id, const SessionState& s) {
    json j = session_header(id, s);
    j["best"] = s.best ? point_json(best_x(s)) : json(nullptr);
    j["pair"] = s.phase == Phase::awaiting_preference
                    ? json::array({point_json(s.physical(s.pair[0])), point_json(s.physical(s.pair[1]))})
                    : json(nullptr);
    j["history"] = s.log;
    j["state"] = s;
    return j;
}

inline json pair_view_json(const std::string& id, const SessionState& s, std::size_t stride = 25) {
    if (s.phase != Phase::awaiting_preference)
        throw ProtocolError("session has no pending pair (phase " + std::string(to_string(s.phase)) + ")");
    json j = session_header(id, s);
    json pair = json::array();
    const char* labels[] = {"A", "B"};
    for (int k = 0; k < 2; ++k) {
        const Eigen::VectorXd x = s.physical(s.pair[k]);
        json runs = json::array();
        for (const auto& path : paths::builtin_names())
            runs.push_back(run_view_json(params_of(x), path, stride));
        pair.push_back({{"label", labels[k]}, {"x", point_json(x)}, {"runs", runs}});
    }
    j["pair"] = pair;
    return j;
}

inline json result_json(const std::string& id, const SessionState& s) {
    json j = session_header(id, s);
    j["final"] = s.phase == Phase::done;
    j["best"] = s.best ? params_json(params_of(best_x(s))) : json(nullptr);
    j["best_x"] = s.best ? json(best_x(s)) : json(nullptr);
    j["trace"] = s.log;
    return j;
}

/// HTTP/JSON session API. Handlers are plain functions returning a status
/// and body so they can be exercised without a socket; `bind` attaches them
/// to an httplib server.
class SessionApi {
public:
    struct Reply {
        int status = 200;
        std::string body;
        std::string content_type = "application/json";
    };

    explicit SessionApi(SessionConfig defaults = {}) : defaults_(std::move(defaults)) { defaults_.validate(); }

    Reply create(const std::string& body) {
        return guard([&] {
            const json req = body.empty() ? json::object() : parse(body);
            SessionConfig cfg = session_config_from_json(req, defaults_);
            auto entry = std::make_shared<Entry>();
            entry->state = init_session(cfg);
            std::string id;
            {
                std::lock_guard lock(map_mutex_);
                id = "s" + std::to_string(++counter_);
                sessions_[id] = entry;
            }
            std::lock_guard lock(entry->mutex);
            json j = session_view_json(id, entry->state);
            return Reply{201, j.dump()};
        });
    }

    Reply get_state(const std::string& id) {
        return with_session(id, [&](SessionState& s) { return Reply{200, session_view_json(id, s).dump()}; });
    }

    Reply get_pair(const std::string& id) {
        return with_session(id, [&](SessionState& s) { return Reply{200, pair_view_json(id, s).dump()}; });
    }

    Reply get_result(const std::string& id) {
        return with_session(id, [&](SessionState& s) { return Reply{200, result_json(id, s).dump()}; });
    }

    Reply get_landscape(const std::string& id, std::size_t resolution) {
        return with_session(id, [&](SessionState& s) {
            if (resolution < 2 || resolution > 400)
                throw ValidationError({"resolution"}, "resolution must lie in [2, 400]");
            if (!s.best)
                throw ProtocolError("no surrogate before the first preference");
            const SurrogateModel model = current_model(s);
            std::ostringstream os;
            write_landscape_csv(os, Acquisition(model, *s.best, acquisition_config(s)), resolution, s.config.bounds);
            return Reply{200, os.str(), "text/csv"};
        });
    }

    /// Body {"pi": -1|0|1, "h": n}. `h` is the number of preferences the
    /// client had seen when it was shown the pair; resending an answer
    /// already recorded at that h is acknowledged without a new transition.
    Reply submit(const std::string& id, const std::string& body) {
        return with_session(id, [&](SessionState& s) {
            const json req = parse(body);
            std::vector<std::string> bad;
            int pi = 0;
            std::optional<int> h;
            FieldReader r(req, "", bad);
            r.get("pi", pi);
            r.read("h", [&](const json& v) { h = v.get<int>(); });
            r.finish();
            if (!req.contains("pi"))
                bad.emplace_back("pi");
            if (bad.empty() && pi != -1 && pi != 0 && pi != 1)
                bad.emplace_back("pi");
            if (!bad.empty())
                throw ValidationError(bad, "preference body must be {\"pi\": -1|0|1, \"h\": int}");
            if (h && *h < s.h) {
                if (*h < 0 || s.preferences[static_cast<std::size_t>(*h)].pi != pi)
                    throw ProtocolError("a different preference was already recorded at h = " + std::to_string(*h));
                json j = session_view_json(id, s);
                j["replayed"] = true;
                return Reply{200, j.dump()};
            }
            if (h && *h > s.h)
                throw ProtocolError("h = " + std::to_string(*h) + " is ahead of the session (h = " +
                                    std::to_string(s.h) + ")");
            submit_preference(s, pi);
            json j = session_view_json(id, s);
            j["replayed"] = false;
            return Reply{200, j.dump()};
        });
    }

    void bind(httplib::Server& srv) {
        auto send = [](httplib::Response& res, const Reply& r) {
            res.status = r.status;
            res.set_content(r.body, r.content_type);
        };
        srv.Post("/sessions", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, create(req.body));
        });
        srv.Get(R"(/sessions/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, get_state(req.matches[1]));
        });
        srv.Get(R"(/sessions/([^/]+)/pair)", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, get_pair(req.matches[1]));
        });
        srv.Get(R"(/sessions/([^/]+)/result)", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, get_result(req.matches[1]));
        });
        srv.Get(R"(/sessions/([^/]+)/landscape)", [this, send](const httplib::Request& req, httplib::Response& res) {
            std::size_t n = 50;
            if (req.has_param("resolution")) {
                try {
                    n = std::stoul(req.get_param_value("resolution"));
                } catch (const std::exception&) {
                    n = 0;
                }
            }
            send(res, get_landscape(req.matches[1], n));
        });
        srv.Post(R"(/sessions/([^/]+)/preference)",
                 [this, send](const httplib::Request& req, httplib::Response& res) {
                     send(res, submit(req.matches[1], req.body));
                 });
        srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
            res.status = 500;
            res.set_content(json{{"error", "internal error"}}.dump(), "application/json");
        });
    }

private:
    struct Entry {
        std::mutex mutex;
        SessionState state;
    };

    static json parse(const std::string& body) {
        try {
            return json::parse(body);
        } catch (const json::parse_error&) {
            throw ValidationError({"body"}, "request body is not valid JSON");
        }
    }

    static Reply error(int status, const std::string& what, const std::vector<std::string>& fields = {}) {
        json j{{"error", what}};
        if (!fields.empty())
            j["fields"] = fields;
        return Reply{status, j.dump()};
    }

    template <typename F>
    Reply guard(F&& f) {
        try {
            return f();
        } catch (const ValidationError& e) {
            return error(400, e.what(), e.fields());
        } catch (const ProtocolError& e) {
            return error(409, e.what());
        } catch (const Error& e) {
            return error(422, e.what());
        }
    }

    /// Look up a session and run `f` on it under its own lock; requests on
    /// different sessions proceed in parallel.
    template <typename F>
    Reply with_session(const std::string& id, F&& f) {
        std::shared_ptr<Entry> entry;
        {
            std::lock_guard lock(map_mutex_);
            auto it = sessions_.find(id);
            if (it == sessions_.end())
                return error(404, "unknown session '" + id + "'");
            entry = it->second;
        }
        std::lock_guard lock(entry->mutex);
        Reply r = guard([&] { return f(entry->state); });
        if (r.status != 200 && r.content_type == "application/json") {
            json j = json::parse(r.body);
            j["id"] = id;
            j["phase"] = std::string(to_string(entry->state.phase));
            r.body = j.dump();
        }
        return r;
    }

    SessionConfig defaults_;
    std::mutex map_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::uint64_t counter_ = 0;
};

} // namespace wander
