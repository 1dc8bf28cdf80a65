#include "aels/event.hpp"

#include <json.hpp>

namespace aels {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Action action) {
    switch (action) {
        case Action::upload: return "upload";
        case Action::download: return "download";
        case Action::approve: return "approve";
        case Action::suggest: return "suggest";
        case Action::exam: return "exam";
        case Action::enroll: return "enroll";
        case Action::test_result: return "test_result";
        case Action::semester_close: return "semester_close";
    }
    return "download";
}

std::optional<Action> parse_action(std::string_view text) {
    for (Action a : kAllActions) {
        if (to_string(a) == text) return a;
    }
    return std::nullopt;
}

std::string_view to_string(Role role) { return role == Role::lecturer ? "lecturer" : "student"; }

namespace {

ordered_json payload_json(const Payload& payload) {
    return std::visit(
        [](const auto& p) -> ordered_json {
            using T = std::decay_t<decltype(p)>;
            ordered_json j;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return nullptr;
            } else if constexpr (std::is_same_v<T, UploadPayload>) {
                j["kind"] = to_string(p.kind);
                j["title"] = p.title;
                j["keywords"] = p.keywords;
            } else if constexpr (std::is_same_v<T, ExamPayload>) {
                j["grade"] = p.grade;
            } else if constexpr (std::is_same_v<T, EnrollPayload>) {
                j["role"] = to_string(p.role);
            } else if constexpr (std::is_same_v<T, TestResultPayload>) {
                j["test"] = p.test;
                j["weights"] = p.weights;
                j["results"] = p.results;
                j["method"] = to_string(p.method);
            }
            return j;
        },
        payload);
}

std::string require_string(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ArgumentError(std::string("missing field '") + key + "'");
    if (!it->is_string()) throw ArgumentError(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

Payload decode_payload(Action action, const json& p) {
    if (!p.is_object()) throw ArgumentError("payload must be an object");
    switch (action) {
        case Action::upload: {
            UploadPayload up;
            if (p.contains("kind")) up.kind = parse_content_kind(require_string(p, "kind"));
            up.title = p.contains("title") ? require_string(p, "title") : std::string{};
            if (auto it = p.find("keywords"); it != p.end()) {
                if (!it->is_array()) throw ArgumentError("payload.keywords must be an array");
                for (const auto& k : *it) {
                    if (!k.is_string()) throw ArgumentError("payload.keywords must hold strings");
                    up.keywords.push_back(k.get<std::string>());
                }
            }
            return up;
        }
        case Action::exam: {
            auto it = p.find("grade");
            if (it == p.end() || it->is_null()) return std::monostate{};
            if (!it->is_number_integer()) throw ArgumentError("payload.grade must be an integer");
            return ExamPayload{it->get<int>()};
        }
        case Action::enroll: {
            EnrollPayload en;
            if (p.contains("role")) {
                const auto role = require_string(p, "role");
                if (role == "lecturer")
                    en.role = Role::lecturer;
                else if (role != "student")
                    throw ArgumentError("payload.role must be student or lecturer");
            }
            return en;
        }
        case Action::test_result: {
            if (!p.contains("results")) return std::monostate{};
            TestResultPayload tr;
            tr.test = require_string(p, "test");
            const auto& w = p.at("weights");
            const auto& r = p.at("results");
            if (!w.is_array() || !r.is_array()) throw ArgumentError("payload weights/results must be arrays");
            for (const auto& x : w) {
                if (!x.is_number()) throw ArgumentError("payload.weights must hold numbers");
                tr.weights.push_back(x.get<double>());
            }
            for (const auto& x : r) {
                if (!x.is_number_integer()) throw ArgumentError("payload.results must hold 0/1 integers");
                tr.results.push_back(x.get<int>());
            }
            if (p.contains("method")) tr.method = parse_defuzzifier(require_string(p, "method"));
            return tr;
        }
        default:
            throw ArgumentError("action '" + std::string(to_string(action)) + "' takes no payload");
    }
}

}  // namespace

std::string encode_event_line(const EventRecord& e) {
    ordered_json j;
    if (e.seq != 0) j["seq"] = e.seq;
    j["ts"] = e.ts.iso();
    j["action"] = to_string(e.action);
    j["actor"] = e.actor.str();
    if (e.content) j["content"] = e.content->str();
    j["course"] = e.course.str();
    j["semester"] = e.semester.str();
    if (!std::holds_alternative<std::monostate>(e.payload)) j["payload"] = payload_json(e.payload);
    return j.dump();
}

EventRecord decode_event_line(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& err) {
        throw ArgumentError(std::string("malformed record: ") + err.what());
    }
    if (!j.is_object()) throw ArgumentError("record must be an object");

    EventRecord e;
    try {
        if (auto it = j.find("seq"); it != j.end() && !it->is_null()) {
            if (!it->is_number_unsigned() || it->get<std::uint64_t>() == 0)
                throw ArgumentError("seq must be a positive integer");
            e.seq = it->get<std::uint64_t>();
        }
        e.ts = Timestamp::parse(require_string(j, "ts"));
        const auto action_text = require_string(j, "action");
        const auto action = parse_action(action_text);
        if (!action) throw ArgumentError("unknown action '" + action_text + "'");
        e.action = *action;
        e.actor = UserId(require_string(j, "actor"));
        if (auto it = j.find("content"); it != j.end() && !it->is_null()) e.content = ContentId(require_string(j, "content"));
        e.course = CourseId(require_string(j, "course"));
        e.semester = SemesterId(require_string(j, "semester"));
        if (auto it = j.find("payload"); it != j.end() && !it->is_null()) e.payload = decode_payload(e.action, *it);
    } catch (const json::exception& err) {
        throw ArgumentError(std::string("malformed record: ") + err.what());
    }
    return e;
}

}  // namespace aels
