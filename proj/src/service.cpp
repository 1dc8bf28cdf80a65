#include "aels/service.hpp"

#include <chrono>

#include <httplib.h>
#include <json.hpp>

#include "aels/canonical.hpp"

namespace aels {

namespace {

constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, int status, std::string_view rule, std::string_view detail) {
    res.status = status;
    res.set_content(CanonicalObject().field("error", rule).field("detail", detail).str() + "\n", kJson);
}

void send_json(httplib::Response& res, int status, const std::string& body) {
    res.status = status;
    res.set_content(body + "\n", kJson);
}

// Maps engine exceptions onto HTTP statuses.
template <class F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const RuleViolation& v) {
        send_error(res, 422, v.rule(), v.what());
    } catch (const NotFound& e) {
        send_error(res, 404, "not_found", e.what());
    } catch (const ArgumentError& e) {
        send_error(res, 400, "bad_request", e.what());
    } catch (const DimensionError& e) {
        send_error(res, 422, "dimension_mismatch", e.what());
    } catch (const DomainError& e) {
        send_error(res, 422, "domain_error", e.what());
    } catch (const IoError& e) {
        send_error(res, 500, "io_error", e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, "internal_error", e.what());
    }
}

Timestamp at_param(const httplib::Request& req, const Repository& repo) {
    if (req.has_param("at")) return Timestamp::parse(req.get_param_value("at"));
    return now_at_least(repo);
}

bool course_known(const Repository& repo, const CourseId& course) {
    return repo.read([&](const RepositoryState& st, auto) { return st.semesters.contains(course); });
}

}  // namespace

Timestamp now_at_least(const Repository& repo) {
    const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    const auto last = repo.read([](const RepositoryState& st, auto) { return st.last_ts; });
    return Timestamp{std::max<std::int64_t>(now, last.ms)};
}

Service::Service(Repository& repo, ServiceConfig config, std::map<std::string, TestDefinition> tests)
    : repo_(repo),
      config_(std::move(config)),
      tests_(std::move(tests)),
      engine_(repo_, config_.engine_config()),
      server_(std::make_unique<httplib::Server>()) {
    config_.validate();
    routes();
}

Service::~Service() { stop(); }

bool Service::listen(const std::string& host) { return server_->listen(host, config_.port); }

int Service::bind_any(const std::string& host) { return server_->bind_to_any_port(host); }

void Service::serve() { server_->listen_after_bind(); }

void Service::stop() {
    if (server_) server_->stop();
}

void Service::routes() {
    auto& srv = *server_;

    srv.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, CanonicalObject().field("status", "ok").field("events", repo_.size()).str());
    });

    srv.Post("/events", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            EventRecord e;
            try {
                e = decode_event_line(req.body);
            } catch (const Error& err) {
                send_error(res, 400, "malformed_body", err.what());
                return;
            }
            const auto seq = repo_.append(std::move(e));
            send_json(res, 201, CanonicalObject().field("seq", seq).str());
        });
    });

    srv.Post("/estimates", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            nlohmann::json body;
            try {
                body = nlohmann::json::parse(req.body);
            } catch (const nlohmann::json::parse_error& err) {
                send_error(res, 400, "malformed_body", err.what());
                return;
            }
            if (!body.is_object() || !body.contains("test") || !body.contains("student") || !body.contains("results")) {
                send_error(res, 400, "malformed_body", "expected {test, student, results}");
                return;
            }
            std::optional<TestDefinition> def;
            TestResponse resp;
            Timestamp at;
            try {
                const auto& t = body.at("test");
                if (t.is_object()) {
                    def = parse_test_definition(t.dump());
                } else {
                    const auto id = t.get<std::string>();
                    auto it = tests_.find(id);
                    if (it == tests_.end()) throw NotFound("unknown test '" + id + "'");
                    def = it->second;
                }
                resp.test = def->id();
                resp.student = StudentId(body.at("student").get<std::string>());
                resp.results = body.at("results").get<std::vector<int>>();
                at = body.contains("at") ? Timestamp::parse(body.at("at").get<std::string>()) : now_at_least(repo_);
            } catch (const nlohmann::json::exception& err) {
                send_error(res, 400, "malformed_body", err.what());
                return;
            }
            const auto estimate = engine_.record_estimate(*def, resp, at);
            send_json(res, 200, to_canonical_json(estimate));
        });
    });

    srv.Get("/courses/:course/rankings", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const CourseId course(req.path_params.at("course"));
            std::optional<SemesterId> semester;
            if (req.has_param("semester")) semester = SemesterId(req.get_param_value("semester"));
            if (!semester) {
                const auto* latest = repo_.read([&](const RepositoryState& st, auto) { return st.latest_rank_table(course); });
                if (!latest) throw NotFound("no closed semester for course '" + course.str() + "'");
                semester = latest->semester;
            }
            try {
                send_json(res, 200, ranking::to_canonical_json(engine_.rank_table(course, *semester)));
            } catch (const RuleViolation& v) {
                send_error(res, 404, v.rule(), v.what());
            }
        });
    });

    srv.Get("/courses/:course/students", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const CourseId course(req.path_params.at("course"));
            if (!course_known(repo_, course)) throw NotFound("unknown course '" + course.str() + "'");
            std::optional<SemesterId> semester;
            if (req.has_param("semester")) semester = SemesterId(req.get_param_value("semester"));
            send_json(res, 200, to_canonical_json(engine_.rank_students(course, semester)));
        });
    });

    srv.Get("/students/:student/courses/:course/suggestions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const StudentId student(req.path_params.at("student"));
            const CourseId course(req.path_params.at("course"));
            std::optional<int> k;
            if (req.has_param("k")) {
                try {
                    k = std::stoi(req.get_param_value("k"));
                } catch (const std::exception&) {
                    throw ArgumentError("k must be an integer");
                }
            }
            send_json(res, 200, to_canonical_json(engine_.suggest(student, course, k, at_param(req, repo_))));
        });
    });

    srv.Get("/courses/:course/search", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const CourseId course(req.path_params.at("course"));
            if (!course_known(repo_, course)) throw NotFound("unknown course '" + course.str() + "'");
            const auto query = req.has_param("q") ? req.get_param_value("q") : std::string{};
            const auto items =
                repo_.read([&](const RepositoryState& st, auto) { return search_catalog(st, course, query); });
            std::vector<std::string> parts;
            for (const auto& item : items) parts.push_back(to_canonical_json(item));
            send_json(res, 200, json_array(parts));
        });
    });
}

}  // namespace aels
