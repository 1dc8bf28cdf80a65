#pragma once
// Shared domain types: identifiers, catalog records, grades, tests and skill
// estimates. Everything here is an immutable value.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aels {

//-----------------------------------------------------------------------------
// Errors
//-----------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller passed something outside an operation's contract (bad id, K <= 0...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Vector lengths disagree (test weights vs. results).
class DimensionError : public Error {
public:
    using Error::Error;
};

// Real value outside its mathematical domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// A write was refused by the repository. rule() is a stable machine name
// such as "unknown_content" or "not_lecturer".
class RuleViolation : public Error {
public:
    RuleViolation(std::string rule, const std::string& detail)
        : Error(rule + ": " + detail), rule_(std::move(rule)) {}
    const std::string& rule() const noexcept { return rule_; }

private:
    std::string rule_;
};

class NotFound : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

//-----------------------------------------------------------------------------
// Identifiers
//-----------------------------------------------------------------------------

// Validates the shared identifier rule: non-empty, no surrounding whitespace.
void check_identifier(std::string_view value, std::string_view what);

template <class Tag>
class Id {
public:
    Id() = default;
    explicit Id(std::string value) : value_(std::move(value)) {
        check_identifier(value_, Tag::name);
    }

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend auto operator<=>(const Id&, const Id&) = default;
    friend bool operator==(const Id&, const Id&) = default;

private:
    std::string value_;
};

struct CourseTag { static constexpr const char* name = "course id"; };
struct UserTag { static constexpr const char* name = "user id"; };
struct ContentTag { static constexpr const char* name = "content id"; };

using CourseId = Id<CourseTag>;
// Students and lecturers share one id space; the role comes from enrollment.
using UserId = Id<UserTag>;
using StudentId = UserId;
using ContentId = Id<ContentTag>;

// "YYYY-S1" or "YYYY-S2"; lexicographic order is chronological order.
class SemesterId {
public:
    SemesterId() = default;
    explicit SemesterId(std::string value);

    const std::string& str() const noexcept { return value_; }
    int year() const;
    int term() const;
    SemesterId next() const;

    friend auto operator<=>(const SemesterId&, const SemesterId&) = default;
    friend bool operator==(const SemesterId&, const SemesterId&) = default;

private:
    std::string value_;
};

//-----------------------------------------------------------------------------
// Time
//-----------------------------------------------------------------------------

// UTC instant with millisecond precision.
struct Timestamp {
    std::int64_t ms = 0;

    // Accepts "YYYY-MM-DDTHH:MM:SS[.fff]Z".
    static Timestamp parse(std::string_view iso);
    // Always "YYYY-MM-DDTHH:MM:SS.fffZ".
    std::string iso() const;

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
    friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

//-----------------------------------------------------------------------------
// Catalog and grades
//-----------------------------------------------------------------------------

enum class ContentKind { supplement, book, article };

std::string_view to_string(ContentKind kind);
ContentKind parse_content_kind(std::string_view text);

struct ContentItem {
    ContentId id;
    CourseId course;
    ContentKind kind = ContentKind::supplement;
    std::string title;
    UserId submitter;
    bool approved = false;
    std::vector<std::string> keywords;

    friend bool operator==(const ContentItem&, const ContentItem&) = default;
};

inline constexpr int kMinGrade = 5;
inline constexpr int kMaxGrade = 10;
inline constexpr int kDefaultPassThreshold = 6;

struct GradeRecord {
    StudentId student;
    CourseId course;
    SemesterId semester;
    int grade = kMinGrade;
    bool passed = false;

    // passed is derived from grade; grade must lie in [5, 10].
    static GradeRecord make(StudentId student, CourseId course, SemesterId semester, int grade,
                            int pass_threshold = kDefaultPassThreshold);

    friend bool operator==(const GradeRecord&, const GradeRecord&) = default;
};

//-----------------------------------------------------------------------------
// Tests and estimates
//-----------------------------------------------------------------------------

inline constexpr double kWeightSumTolerance = 1e-9;

// An n-task test with per-task weights summing to n. Raw weights are rescaled
// at construction; weights already within tolerance are kept bit-for-bit.
class TestDefinition {
public:
    TestDefinition(std::string id, CourseId course, std::vector<double> weights);
    static TestDefinition uniform(std::string id, CourseId course, std::size_t n);

    const std::string& id() const noexcept { return id_; }
    const CourseId& course() const noexcept { return course_; }
    std::size_t size() const noexcept { return weights_.size(); }
    const std::vector<double>& weights() const noexcept { return weights_; }

    friend bool operator==(const TestDefinition&, const TestDefinition&) = default;

private:
    std::string id_;
    CourseId course_;
    std::vector<double> weights_;
};

struct TestResponse {
    std::string test;
    StudentId student;
    std::vector<int> results;  // each entry 0 or 1

    friend bool operator==(const TestResponse&, const TestResponse&) = default;
};

enum class Defuzzifier { maximum, centroid };

std::string_view to_string(Defuzzifier method);
Defuzzifier parse_defuzzifier(std::string_view text);

struct SkillEstimate {
    StudentId student;
    CourseId course;
    double level = 0.0;
    double solved = 0.0;
    Defuzzifier method = Defuzzifier::maximum;
    Timestamp at;

    friend bool operator==(const SkillEstimate&, const SkillEstimate&) = default;
};

}  // namespace aels

template <class Tag>
struct std::hash<aels::Id<Tag>> {
    std::size_t operator()(const aels::Id<Tag>& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};
