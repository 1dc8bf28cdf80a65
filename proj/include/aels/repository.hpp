#pragma once
// Event-sourced repository: the append-only interaction log plus the state
// folded from it (catalog, enrollments, grades, skill estimates, closed
// semesters and their rank tables).
//
// The log is the source of truth. append() validates an event against the
// current state, persists it, then applies the same fold replay() uses, so an
// incrementally maintained repository and a replayed one always agree.

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "aels/domain.hpp"
#include "aels/event.hpp"
#include "aels/ranking.hpp"

namespace aels {

class CorruptionError : public Error {
public:
    CorruptionError(const std::string& what, std::uint64_t position) : Error(what), position_(position) {}
    // Sequence number (or line) at which the log stopped being well formed.
    std::uint64_t position() const noexcept { return position_; }

private:
    std::uint64_t position_;
};

struct RepositoryConfig {
    int pass_threshold = kDefaultPassThreshold;
    ranking::MetricWeights weights;
};

using CourseSemester = std::pair<CourseId, SemesterId>;

struct RecordedEstimate {
    SemesterId semester;
    SkillEstimate estimate;

    friend bool operator==(const RecordedEstimate&, const RecordedEstimate&) = default;
};

// Materialised views. Every container is ordered so iteration is canonical.
struct RepositoryState {
    std::uint64_t last_seq = 0;
    Timestamp last_ts{};
    std::map<ContentId, ContentItem> catalog;
    std::map<CourseId, std::set<UserId>> lecturers;
    std::map<CourseSemester, std::set<StudentId>> enrollments;
    std::map<CourseId, std::set<SemesterId>> semesters;  // every semester seen per course
    std::map<CourseSemester, std::uint64_t> closed;  // value: seq of the close event
    std::map<ContentId, std::uint64_t> approved_at;   // seq at which each item became approved
    // key: (course, semester, student)
    std::map<std::tuple<CourseId, SemesterId, StudentId>, GradeRecord> grades;
    // latest estimate per (course, semester, student)
    std::map<std::tuple<CourseId, SemesterId, StudentId>, SkillEstimate> estimates;
    std::map<std::pair<CourseId, StudentId>, SkillEstimate> latest_estimates;
    std::map<CourseSemester, ranking::RankTable> rank_tables;

    bool is_closed(const CourseId& c, const SemesterId& s) const { return closed.contains({c, s}); }
    bool is_lecturer(const CourseId& c, const UserId& u) const;
    bool is_enrolled(const CourseId& c, const SemesterId& s, const StudentId& u) const;
    std::optional<GradeRecord> grade(const CourseId& c, const SemesterId& s, const StudentId& u) const;
    // Greatest semester of the course that is not closed.
    std::optional<SemesterId> open_semester(const CourseId& c) const;
    // Greatest semester of the course that is open and has `student` enrolled.
    std::optional<SemesterId> open_semester_for(const CourseId& c, const StudentId& student) const;
    // Rank table of the greatest closed semester of the course.
    const ranking::RankTable* latest_rank_table(const CourseId& c) const;
    // Most recent estimate for the student in the course, across semesters.
    std::optional<SkillEstimate> latest_estimate(const CourseId& c, const StudentId& student) const;
    std::vector<GradeRecord> grades_of(const CourseId& c, const SemesterId& s) const;
    std::vector<ContentItem> catalog_of(const CourseId& c) const;
};

// Immutable point-in-time copy of the state with its digest.
struct Snapshot {
    std::uint64_t as_of_seq = 0;
    std::vector<ContentItem> catalog;
    std::vector<GradeRecord> grades;
    std::vector<RecordedEstimate> estimates;
    std::vector<ranking::RankTable> rank_tables;
    std::vector<std::pair<CourseId, UserId>> lecturers;
    std::vector<std::tuple<CourseId, SemesterId, StudentId>> enrollments;
    std::vector<std::pair<CourseSemester, std::uint64_t>> closed;
    std::string digest;  // "sha256:<hex>" of canonical_body()

    std::string canonical_body() const;
    // canonical_body() followed by the digest line.
    std::string serialize() const;
};

Snapshot make_snapshot(const RepositoryState& state);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

class Repository {
public:
    // In-memory repository.
    explicit Repository(RepositoryConfig config = {});
    // Durable repository backed by an event-lines file; existing records are
    // replayed on open. Throws IoError / CorruptionError.
    Repository(std::filesystem::path log_path, RepositoryConfig config);

    ~Repository();

    Repository(const Repository&) = delete;
    Repository& operator=(const Repository&) = delete;

    // Validates, persists, folds. Returns the assigned seq. Throws
    // RuleViolation (state unchanged) or IoError (state unchanged).
    std::uint64_t append(EventRecord event);

    // Runs the validation rules without appending.
    void validate(const EventRecord& event) const;

    Snapshot snapshot() const;

    // Recomputes the rank table of a closed semester from the log.
    // Throws RuleViolation("semester_not_closed") otherwise.
    ranking::RankTable build_rank_table(const CourseId& course, const SemesterId& semester) const;

    // Runs f(const RepositoryState&, std::span<const EventRecord>) under a shared lock.
    template <class F>
    decltype(auto) read(F&& f) const {
        std::shared_lock lock(mutex_);
        return std::forward<F>(f)(state_, std::span<const EventRecord>(log_));
    }

    const RepositoryConfig& config() const noexcept { return config_; }
    std::uint64_t size() const;

private:
    void check(const EventRecord& e) const;
    void apply(const EventRecord& e);
    void persist(const EventRecord& e);
    ranking::RankTable compute_rank_table(const CourseId& course, const SemesterId& semester,
                                          std::uint64_t as_of_seq) const;

    RepositoryConfig config_;
    std::optional<std::filesystem::path> path_;
    int fd_ = -1;
    RepositoryState state_;
    std::vector<EventRecord> log_;
    std::map<CourseSemester, std::vector<std::size_t>> activity_;  // download/suggest per course-semester
    mutable std::shared_mutex mutex_;
};

// Replays a complete log from an empty state. Events must carry seq 1..N in
// order; a gap or disorder throws CorruptionError naming the position.
Snapshot replay(std::span<const EventRecord> events, const RepositoryConfig& config = {});

// Reads an event-lines file; blank lines are skipped.
std::vector<EventRecord> read_event_log(const std::filesystem::path& path);

// Case-insensitive keyword search over approved items of a course. Items
// are ranked by the number of query terms found in the title or keywords,
// ties by id. An empty query lists every approved item.
std::vector<ContentItem> search_catalog(const RepositoryState& state, const CourseId& course,
                                        std::string_view query);

// Canonical JSON for records exposed over the CLI and HTTP API.
std::string to_canonical_json(const ContentItem& item);
std::string to_canonical_json(const SkillEstimate& estimate);

}  // namespace aels
