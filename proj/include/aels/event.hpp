#pragma once
// Interaction log records and their event-lines encoding (one JSON object per
// line with keys seq?, ts, action, actor, content?, course, semester, payload?).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aels/domain.hpp"

namespace aels {

enum class Action { upload, download, approve, suggest, exam, enroll, test_result, semester_close };

inline constexpr Action kAllActions[] = {Action::upload, Action::download,    Action::approve,
                                         Action::suggest, Action::exam,       Action::enroll,
                                         Action::test_result, Action::semester_close};

std::string_view to_string(Action action);
std::optional<Action> parse_action(std::string_view text);

enum class Role { student, lecturer };

std::string_view to_string(Role role);

struct UploadPayload {
    ContentKind kind = ContentKind::supplement;
    std::string title;
    std::vector<std::string> keywords;

    friend bool operator==(const UploadPayload&, const UploadPayload&) = default;
};

struct ExamPayload {
    int grade = kMinGrade;

    friend bool operator==(const ExamPayload&, const ExamPayload&) = default;
};

struct EnrollPayload {
    Role role = Role::student;

    friend bool operator==(const EnrollPayload&, const EnrollPayload&) = default;
};

// Self-contained so that replay never needs an external test registry.
struct TestResultPayload {
    std::string test;
    std::vector<double> weights;
    std::vector<int> results;
    Defuzzifier method = Defuzzifier::maximum;

    friend bool operator==(const TestResultPayload&, const TestResultPayload&) = default;
};

using Payload = std::variant<std::monostate, UploadPayload, ExamPayload, EnrollPayload, TestResultPayload>;

struct EventRecord {
    std::uint64_t seq = 0;  // 0 = not yet assigned
    Timestamp ts;
    Action action = Action::download;
    UserId actor;
    std::optional<ContentId> content;
    CourseId course;
    SemesterId semester;
    Payload payload;

    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

// Event-lines codec. decode throws ArgumentError with a readable reason.
std::string encode_event_line(const EventRecord& e);
EventRecord decode_event_line(std::string_view line);

}  // namespace aels
