#pragma once
// JSON-over-HTTP adapter over the repository and adaptive engine.
//
//   POST /events                                     201 {"seq": N}      | 400 | 422
//   POST /estimates                                  200 SkillEstimate   | 400 | 404 | 422
//   GET  /courses/{c}/rankings?semester=s            200 RankTable       | 404
//   GET  /courses/{c}/students?semester=s            200 StudentRankList | 404
//   GET  /students/{s}/courses/{c}/suggestions?k=n   200 SuggestionSet   | 400 | 404 | 422
//   GET  /courses/{c}/search?q=...                   200 [ContentItem]   | 404
//   GET  /health                                     200
//
// Suggestion retrieval is a GET that appends suggest events: the log records
// what was shown to whom, which later feeds the suggested-download metric.
// Error bodies are {"error": "<rule>", "detail": "..."}.

#include <map>
#include <memory>
#include <string>

#include "aels/adaptation.hpp"
#include "aels/config.hpp"
#include "aels/repository.hpp"

namespace httplib {
class Server;
}

namespace aels {

// Current wall-clock time, never earlier than the last logged event.
Timestamp now_at_least(const Repository& repo);

class Service {
public:
    Service(Repository& repo, ServiceConfig config, std::map<std::string, TestDefinition> tests = {});
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Binds to config.port and serves until stop(). Returns false if binding failed.
    bool listen(const std::string& host = "0.0.0.0");
    // Binds to a free port and returns it; call serve() afterwards.
    int bind_any(const std::string& host = "127.0.0.1");
    void serve();
    void stop();

private:
    void routes();

    Repository& repo_;
    ServiceConfig config_;
    std::map<std::string, TestDefinition> tests_;
    AdaptiveEngine engine_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace aels
