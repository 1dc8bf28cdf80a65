#pragma once
// Fixture builders and independent oracles shared by the unit tests and the
// acceptance runner. Nothing here calls into the code under test except to
// construct its value types.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "aels/domain.hpp"
#include "aels/event.hpp"
#include "aels/repository.hpp"

namespace testsupport {

using namespace aels;

inline Timestamp T(std::int64_t minutes) { return Timestamp{1704067200000 + minutes * 60000}; }

inline EventRecord make_event(Action a, const std::string& actor, std::optional<std::string> content,
                              const std::string& course, const std::string& semester, Timestamp ts,
                              Payload payload = {}) {
    EventRecord e;
    e.ts = ts;
    e.action = a;
    e.actor = UserId(actor);
    if (content) e.content = ContentId(*content);
    e.course = CourseId(course);
    e.semester = SemesterId(semester);
    e.payload = std::move(payload);
    return e;
}

inline EventRecord upload(const std::string& actor, const std::string& item, const std::string& course,
                          const std::string& sem, Timestamp ts, ContentKind kind = ContentKind::supplement,
                          std::string title = "", std::vector<std::string> keywords = {}) {
    if (title.empty()) title = "Item " + item;
    return make_event(Action::upload, actor, item, course, sem, ts,
                      UploadPayload{kind, std::move(title), std::move(keywords)});
}
inline EventRecord approve(const std::string& lecturer, const std::string& item, const std::string& course,
                           const std::string& sem, Timestamp ts) {
    return make_event(Action::approve, lecturer, item, course, sem, ts);
}
inline EventRecord download(const std::string& student, const std::string& item, const std::string& course,
                            const std::string& sem, Timestamp ts) {
    return make_event(Action::download, student, item, course, sem, ts);
}
inline EventRecord suggest(const std::string& student, const std::string& item, const std::string& course,
                           const std::string& sem, Timestamp ts) {
    return make_event(Action::suggest, student, item, course, sem, ts);
}
inline EventRecord exam(const std::string& student, int grade, const std::string& course, const std::string& sem,
                        Timestamp ts) {
    return make_event(Action::exam, student, std::nullopt, course, sem, ts, ExamPayload{grade});
}
inline EventRecord enroll(const std::string& user, const std::string& course, const std::string& sem, Timestamp ts,
                          Role role = Role::student) {
    return make_event(Action::enroll, user, std::nullopt, course, sem, ts, EnrollPayload{role});
}
inline EventRecord test_result(const std::string& student, const std::string& course, const std::string& sem,
                               Timestamp ts, std::vector<int> results, std::vector<double> weights = {},
                               Defuzzifier method = Defuzzifier::maximum) {
    if (weights.empty()) weights.assign(results.size(), 1.0);
    return make_event(Action::test_result, student, std::nullopt, course, sem, ts,
                      TestResultPayload{"t1", std::move(weights), std::move(results), method});
}
inline EventRecord close_semester(const std::string& lecturer, const std::string& course, const std::string& sem,
                                  Timestamp ts) {
    return make_event(Action::semester_close, lecturer, std::nullopt, course, sem, ts);
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("aels-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << text;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

//-----------------------------------------------------------------------------
// Fuzzy oracles
//-----------------------------------------------------------------------------

// Weighted count of correct answers, rescaling raw weights to sum to n.
inline double oracle_solved(const std::vector<double>& raw_weights, const std::vector<int>& results) {
    long double total = 0;
    for (double w : raw_weights) total += w;
    long double hit = 0;
    for (std::size_t i = 0; i < results.size(); ++i)
        if (results[i] == 1) hit += raw_weights[i];
    return static_cast<double>(hit / total);
}

// Centre of gravity of f(L) = s*L + m*(1-L) on [0, 1] by the trapezoidal rule.
inline double oracle_centroid(double s, double m, int intervals = 100000) {
    const double h = 1.0 / intervals;
    long double num = 0, den = 0;
    for (int i = 0; i <= intervals; ++i) {
        const long double x = static_cast<long double>(i) * h;
        const long double f = s * x + m * (1.0L - x);
        const long double c = (i == 0 || i == intervals) ? 0.5L : 1.0L;
        num += c * x * f;
        den += c * f;
    }
    return static_cast<double>(num / den);
}

//-----------------------------------------------------------------------------
// Ranking oracle
//-----------------------------------------------------------------------------

struct OracleMetrics {
    std::uint64_t downloads = 0;
    std::uint64_t downloaders_passed = 0;
    std::uint64_t suggested_downloads = 0;
    std::uint64_t unsuggested_downloads = 0;
    std::optional<double> avg_grade_all;
    std::optional<double> avg_grade_downloaders;
};

// Counts straight from the raw log. Grades come from exam events of the
// course-semester, the one with the greatest seq winning.
inline std::map<std::string, OracleMetrics> oracle_metrics(const std::string& course, const std::string& semester,
                                                            const std::vector<EventRecord>& events,
                                                            const std::vector<ContentItem>& catalog,
                                                            int pass_threshold = kDefaultPassThreshold) {
    std::map<std::string, int> grade;
    std::map<std::string, std::uint64_t> grade_seq;
    for (const auto& e : events) {
        if (e.action != Action::exam || e.course.str() != course || e.semester.str() != semester) continue;
        const auto who = e.actor.str();
        if (!grade_seq.count(who) || e.seq >= grade_seq[who]) {
            grade_seq[who] = e.seq;
            grade[who] = std::get<ExamPayload>(e.payload).grade;
        }
    }
    std::optional<double> avg_all;
    if (!grade.empty()) {
        double sum = 0;
        for (const auto& kv : grade) sum += kv.second;
        avg_all = sum / static_cast<double>(grade.size());
    }

    std::map<std::string, OracleMetrics> out;
    for (const auto& item : catalog) {
        if (item.course.str() != course || !item.approved) continue;
        const auto id = item.id.str();
        OracleMetrics m;
        m.avg_grade_all = avg_all;
        std::set<std::string> students;
        for (const auto& e : events)
            if (e.action == Action::download && e.content && e.content->str() == id && e.course.str() == course &&
                e.semester.str() == semester)
                students.insert(e.actor.str());
        double gsum = 0;
        int graded = 0;
        for (const auto& s : students) {
            ++m.downloads;
            std::optional<std::int64_t> first_dl, first_sg;
            for (const auto& e : events) {
                if (!e.content || e.content->str() != id || e.actor.str() != s || e.course.str() != course ||
                    e.semester.str() != semester)
                    continue;
                if (e.action == Action::download && (!first_dl || e.ts.ms < *first_dl)) first_dl = e.ts.ms;
                if (e.action == Action::suggest && (!first_sg || e.ts.ms < *first_sg)) first_sg = e.ts.ms;
            }
            if (first_sg && *first_sg <= *first_dl)
                ++m.suggested_downloads;
            else
                ++m.unsuggested_downloads;
            auto g = grade.find(s);
            if (g != grade.end()) {
                if (g->second >= pass_threshold) ++m.downloaders_passed;
                gsum += g->second;
                ++graded;
            }
        }
        if (graded > 0) m.avg_grade_downloaders = gsum / graded;
        out[id] = m;
    }
    return out;
}

// Equal thirds on pass rate, download count and grade lift; min-max over
// downloaded items; constant columns map to 1; weights renormalised over the
// metrics an item has. Returns item ids by descending score, ties by id.
inline std::vector<std::pair<std::string, double>> oracle_ranking(const std::map<std::string, OracleMetrics>& ms) {
    auto pass_rate = [](const OracleMetrics& m) -> std::optional<double> {
        if (m.downloads == 0) return std::nullopt;
        return static_cast<double>(m.downloaders_passed) / static_cast<double>(m.downloads);
    };
    auto dl = [](const OracleMetrics& m) -> std::optional<double> {
        if (m.downloads == 0) return std::nullopt;
        return static_cast<double>(m.downloads);
    };
    auto lift = [](const OracleMetrics& m) -> std::optional<double> {
        if (m.downloads == 0 || !m.avg_grade_downloaders || !m.avg_grade_all) return std::nullopt;
        return *m.avg_grade_downloaders - *m.avg_grade_all;
    };
    using Fn = std::optional<double> (*)(const OracleMetrics&);
    const Fn fns[] = {+pass_rate, +dl, +lift};

    std::vector<std::pair<std::string, double>> scored;
    for (const auto& [id, m] : ms) {
        double num = 0, den = 0;
        for (Fn f : fns) {
            const auto v = f(m);
            if (!v) continue;
            double lo = INFINITY, hi = -INFINITY;
            for (const auto& kv : ms) {
                if (const auto o = f(kv.second)) {
                    lo = std::min(lo, *o);
                    hi = std::max(hi, *o);
                }
            }
            const double norm = hi == lo ? 1.0 : (*v - lo) / (hi - lo);
            num += norm / 3.0;
            den += 1.0 / 3.0;
        }
        scored.emplace_back(id, den > 0 ? num / den : 0.0);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (std::abs(a.second - b.second) > 1e-12) return a.second > b.second;
        return a.first < b.first;
    });
    return scored;
}

//-----------------------------------------------------------------------------
// Random valid logs
//-----------------------------------------------------------------------------

// Proposes plausible events and keeps those the repository accepts, so the
// result is a valid log by construction. Seq numbers are left for the
// repository to assign.
inline std::vector<EventRecord> random_valid_log(std::mt19937_64& rng, Repository& repo, int target_events) {
    const std::vector<std::string> courses = {"C1", "C2"};
    std::vector<std::string> semesters;
    for (SemesterId s("2024-S1"); semesters.size() < 12; s = s.next()) semesters.push_back(s.str());
    std::map<std::string, std::size_t> sem_index;  // current semester per course
    std::vector<std::string> items;
    auto pick = [&](auto n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    auto coin = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; };
    std::int64_t clock = 0;
    int attempts = 0;
    std::vector<EventRecord> accepted;

    while (static_cast<int>(accepted.size()) < target_events && attempts < target_events * 20) {
        ++attempts;
        clock += static_cast<std::int64_t>(pick(3));  // repeated timestamps are allowed
        const auto course = courses[pick(courses.size())];
        auto& si = sem_index[course];
        const auto sem = semesters[si];
        const auto student = "s" + std::to_string(pick(8));
        const auto lecturer = "lect-" + course;
        const auto item = items.empty() || coin(0.1) ? "i" + std::to_string(items.size()) : items[pick(items.size())];
        EventRecord e;
        switch (pick(10)) {
            case 0: e = enroll(lecturer, course, sem, T(clock), Role::lecturer); break;
            case 1: {
                const ContentKind kinds[] = {ContentKind::supplement, ContentKind::supplement, ContentKind::book,
                                             ContentKind::article};
                e = upload(student, "i" + std::to_string(items.size()), course, sem, T(clock), kinds[pick(4)],
                           "Title " + std::to_string(items.size()), {"kw" + std::to_string(pick(4))});
                break;
            }
            case 2: e = approve(coin(0.8) ? lecturer : student, item, course, sem, T(clock)); break;
            case 3: e = download(student, item, course, sem, T(clock)); break;
            case 4: e = suggest(student, item, course, sem, T(clock)); break;
            case 5: e = exam(student, 5 + static_cast<int>(pick(6)), course, sem, T(clock)); break;
            case 6: e = enroll(student, course, sem, T(clock)); break;
            case 7: {
                std::vector<int> r(4);
                for (auto& x : r) x = coin(0.5);
                e = test_result(student, course, sem, T(clock), r, {1, 2, 1, 0.5},
                                coin(0.5) ? Defuzzifier::maximum : Defuzzifier::centroid);
                break;
            }
            case 8: e = download(student, item, course, sem, T(clock)); break;
            default:
                if (!coin(0.15) || si + 1 >= semesters.size()) continue;
                e = close_semester(lecturer, course, sem, T(clock));
                break;
        }
        try {
            repo.validate(e);
        } catch (const RuleViolation&) {
            continue;
        }
        e.seq = repo.append(e);
        if (e.action == Action::upload) items.push_back(e.content->str());
        if (e.action == Action::semester_close) ++si;
        accepted.push_back(e);
    }
    return accepted;
}

}  // namespace testsupport
