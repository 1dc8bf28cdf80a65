#include "aels/adaptation.hpp"

#include <algorithm>
#include <cmath>

#include "aels/canonical.hpp"

namespace aels {

std::size_t slice_offset(double level, std::size_t table_size, std::size_t k) {
    if (!(level >= 0.0 && level <= 1.0)) throw DomainError("level outside [0, 1]");
    const std::size_t span = table_size > k ? table_size - k : 0;
    return static_cast<std::size_t>(std::llround(level * static_cast<double>(span)));
}

std::vector<ContentId> select_slice(const ranking::RankTable& table, double level, std::size_t k) {
    if (k == 0) throw ArgumentError("k must be positive");
    const std::size_t m = table.entries.size();
    const std::size_t offset = slice_offset(level, m, k);
    const std::size_t end = std::min(offset + k, m);
    std::vector<ContentId> out;
    for (std::size_t i = offset; i < end; ++i) out.push_back(table.entries[i].content);
    return out;
}

AdaptiveEngine::AdaptiveEngine(Repository& repo, EngineConfig config) : repo_(repo), config_(config) {
    if (config_.default_k <= 0) throw ArgumentError("default k must be positive");
}

StudentRankList AdaptiveEngine::rank_students(const CourseId& course, std::optional<SemesterId> semester) const {
    return repo_.read([&](const RepositoryState& st, auto) {
        StudentRankList list;
        list.course = course;
        if (!semester) {
            auto it = st.semesters.find(course);
            if (it != st.semesters.end() && !it->second.empty()) semester = *it->second.rbegin();
        }
        list.semester = semester;
        if (!semester) {
            list.diagnostics.push_back("no activity recorded for course " + course.str());
            return list;
        }
        for (auto it = st.estimates.lower_bound({course, *semester, StudentId{}}); it != st.estimates.end(); ++it) {
            if (std::get<0>(it->first) != course || std::get<1>(it->first) != *semester) break;
            list.entries.push_back({std::get<2>(it->first), it->second.level});
        }
        std::stable_sort(list.entries.begin(), list.entries.end(), [](const StudentLevel& a, const StudentLevel& b) {
            if (a.level != b.level) return a.level > b.level;
            return a.student < b.student;
        });
        if (auto en = st.enrollments.find({course, *semester}); en != st.enrollments.end()) {
            for (const auto& s : en->second) {
                if (!st.estimates.contains({course, *semester, s})) list.unranked.push_back(s);
            }
        }
        if (list.entries.empty()) list.diagnostics.push_back("no skill estimates for " + course.str() + " " + semester->str());
        if (!list.unranked.empty())
            list.diagnostics.push_back(std::to_string(list.unranked.size()) + " enrolled student(s) without an estimate");
        return list;
    });
}

SuggestionSet AdaptiveEngine::suggest(const StudentId& student, const CourseId& course, std::optional<int> k,
                                      Timestamp at) {
    const int window = k.value_or(config_.default_k);
    if (window <= 0) throw ArgumentError("k must be positive, got " + std::to_string(window));

    SuggestionSet set;
    set.student = student;
    set.course = course;
    set.generated_at = at;

    std::optional<SemesterId> log_semester;
    repo_.read([&](const RepositoryState& st, auto) {
        if (!st.semesters.contains(course)) throw NotFound("unknown course '" + course.str() + "'");
        const auto* table = st.latest_rank_table(course);
        if (!table) {
            set.diagnostics.push_back("no closed-semester rank table for " + course.str());
            return;
        }
        set.rank_table_semester = table->semester;
        if (table->entries.empty()) {
            set.diagnostics.push_back("rank table for " + course.str() + " " + table->semester.str() + " is empty");
            return;
        }
        const auto estimate = st.latest_estimate(course, student);
        if (!estimate) set.diagnostics.push_back("no estimate for " + student.str() + "; using level 0");
        set.items = select_slice(*table, estimate ? estimate->level : 0.0, static_cast<std::size_t>(window));
        log_semester = st.open_semester_for(course, student);
        if (!log_semester) log_semester = st.open_semester(course);
    });

    if (set.items.empty()) return set;
    if (!log_semester)
        throw RuleViolation("no_open_semester", "course " + course.str() + " has no open semester to log suggestions in");
    for (const auto& item : set.items) {
        EventRecord e;
        e.ts = at;
        e.action = Action::suggest;
        e.actor = student;
        e.content = item;
        e.course = course;
        e.semester = *log_semester;
        repo_.append(std::move(e));
    }
    return set;
}

SkillEstimate AdaptiveEngine::record_estimate(const TestDefinition& def, const TestResponse& resp, Timestamp at) {
    if (resp.test != def.id())
        throw ArgumentError("response is for test '" + resp.test + "' but the definition is '" + def.id() + "'");
    const auto semester =
        repo_.read([&](const RepositoryState& st, auto) { return st.open_semester_for(def.course(), resp.student); });
    if (!semester) {
        throw RuleViolation("not_enrolled",
                            "'" + resp.student.str() + "' has no open enrollment in " + def.course().str());
    }
    EventRecord e;
    e.ts = at;
    e.action = Action::test_result;
    e.actor = resp.student;
    e.course = def.course();
    e.semester = *semester;
    e.payload = TestResultPayload{def.id(), def.weights(), resp.results, config_.method};
    repo_.append(std::move(e));
    return repo_.read([&](const RepositoryState& st, auto) { return *st.latest_estimate(def.course(), resp.student); });
}

ranking::RankTable AdaptiveEngine::rank_table(const CourseId& course, const SemesterId& semester) const {
    return repo_.build_rank_table(course, semester);
}

std::string to_canonical_json(const StudentRankList& list) {
    std::vector<std::string> entries;
    for (const auto& e : list.entries)
        entries.push_back(CanonicalObject().field("student", e.student.str()).field("level", e.level).str());
    std::vector<std::string> unranked;
    for (const auto& s : list.unranked) unranked.push_back(s.str());
    CanonicalObject o;
    o.field("course", list.course.str());
    if (list.semester)
        o.field("semester", list.semester->str());
    else
        o.raw("semester", "null");
    return o.raw("entries", json_array(entries)).field("unranked", unranked).str();
}

std::string to_canonical_json(const SuggestionSet& set) {
    std::vector<std::string> items;
    for (const auto& i : set.items) items.push_back(i.str());
    CanonicalObject o;
    o.field("student", set.student.str())
        .field("course", set.course.str())
        .field("items", items)
        .field("generated_at", set.generated_at.iso());
    if (set.rank_table_semester)
        o.field("rank_table_semester", set.rank_table_semester->str());
    else
        o.raw("rank_table_semester", "null");
    return o.str();
}

}  // namespace aels
