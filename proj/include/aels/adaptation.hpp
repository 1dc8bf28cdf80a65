#pragma once
// Adaptive content selection.
//
// Students are ranked by their latest fuzzy skill estimate and content by the
// latest closed-semester rank table. A student at level L in [0, 1] receives
// the K-item window of the rank table starting at offset
//
//     round(L * max(0, M - K))      (M = rank table size)
//
// so the weakest students get the most helpful items and the strongest get
// the tail of the table.

#include <optional>
#include <string>
#include <vector>

#include "aels/domain.hpp"
#include "aels/ranking.hpp"
#include "aels/repository.hpp"

namespace aels {

struct StudentLevel {
    StudentId student;
    double level = 0.0;

    friend bool operator==(const StudentLevel&, const StudentLevel&) = default;
};

struct StudentRankList {
    CourseId course;
    std::optional<SemesterId> semester;
    std::vector<StudentLevel> entries;  // level descending, ties by ascending id
    std::vector<StudentId> unranked;    // enrolled without an estimate this semester
    std::vector<std::string> diagnostics;
};

struct SuggestionSet {
    StudentId student;
    CourseId course;
    std::vector<ContentId> items;
    Timestamp generated_at;
    std::optional<SemesterId> rank_table_semester;
    std::vector<std::string> diagnostics;
};

std::size_t slice_offset(double level, std::size_t table_size, std::size_t k);

// Pure window selection over a rank table.
std::vector<ContentId> select_slice(const ranking::RankTable& table, double level, std::size_t k);

struct EngineConfig {
    Defuzzifier method = Defuzzifier::maximum;
    int default_k = 3;
};

class AdaptiveEngine {
public:
    AdaptiveEngine(Repository& repo, EngineConfig config = {});

    // Defaults to the course's greatest semester.
    StudentRankList rank_students(const CourseId& course, std::optional<SemesterId> semester = std::nullopt) const;

    // Suggests up to k items (default from config) and logs one suggest event
    // per item at time `at`. Students without an estimate are treated as level 0.
    // Throws ArgumentError for k <= 0, NotFound for an unknown course,
    // RuleViolation("no_open_semester") when there is nowhere to log.
    SuggestionSet suggest(const StudentId& student, const CourseId& course, std::optional<int> k, Timestamp at);

    // Estimates the level with the configured defuzzifier and logs it as a
    // test_result event in the student's open semester.
    SkillEstimate record_estimate(const TestDefinition& def, const TestResponse& resp, Timestamp at);

    ranking::RankTable rank_table(const CourseId& course, const SemesterId& semester) const;

    const EngineConfig& config() const noexcept { return config_; }
    Repository& repository() noexcept { return repo_; }

private:
    Repository& repo_;
    EngineConfig config_;
};

std::string to_canonical_json(const StudentRankList& list);
std::string to_canonical_json(const SuggestionSet& set);

}  // namespace aels
