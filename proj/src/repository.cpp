#include "aels/repository.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "aels/canonical.hpp"
#include "aels/fes.hpp"

namespace aels {

namespace {

bool takes_content(Action a) {
    return a == Action::upload || a == Action::download || a == Action::approve || a == Action::suggest;
}

[[noreturn]] void reject(const char* rule, const std::string& detail) { throw RuleViolation(rule, detail); }

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

//-----------------------------------------------------------------------------
// RepositoryState queries
//-----------------------------------------------------------------------------

bool RepositoryState::is_lecturer(const CourseId& c, const UserId& u) const {
    auto it = lecturers.find(c);
    return it != lecturers.end() && it->second.contains(u);
}

bool RepositoryState::is_enrolled(const CourseId& c, const SemesterId& s, const StudentId& u) const {
    auto it = enrollments.find({c, s});
    return it != enrollments.end() && it->second.contains(u);
}

std::optional<GradeRecord> RepositoryState::grade(const CourseId& c, const SemesterId& s, const StudentId& u) const {
    auto it = grades.find({c, s, u});
    if (it == grades.end()) return std::nullopt;
    return it->second;
}

std::optional<SemesterId> RepositoryState::open_semester(const CourseId& c) const {
    auto it = semesters.find(c);
    if (it == semesters.end()) return std::nullopt;
    for (auto s = it->second.rbegin(); s != it->second.rend(); ++s) {
        if (!is_closed(c, *s)) return *s;
    }
    return std::nullopt;
}

std::optional<SemesterId> RepositoryState::open_semester_for(const CourseId& c, const StudentId& student) const {
    auto it = semesters.find(c);
    if (it == semesters.end()) return std::nullopt;
    for (auto s = it->second.rbegin(); s != it->second.rend(); ++s) {
        if (!is_closed(c, *s) && is_enrolled(c, *s, student)) return *s;
    }
    return std::nullopt;
}

const ranking::RankTable* RepositoryState::latest_rank_table(const CourseId& c) const {
    const ranking::RankTable* best = nullptr;
    for (auto it = rank_tables.lower_bound({c, SemesterId{}}); it != rank_tables.end() && it->first.first == c; ++it)
        best = &it->second;
    return best;
}

std::optional<SkillEstimate> RepositoryState::latest_estimate(const CourseId& c, const StudentId& student) const {
    auto it = latest_estimates.find({c, student});
    if (it == latest_estimates.end()) return std::nullopt;
    return it->second;
}

std::vector<GradeRecord> RepositoryState::grades_of(const CourseId& c, const SemesterId& s) const {
    std::vector<GradeRecord> out;
    for (auto it = grades.lower_bound({c, s, StudentId{}}); it != grades.end(); ++it) {
        if (std::get<0>(it->first) != c || std::get<1>(it->first) != s) break;
        out.push_back(it->second);
    }
    return out;
}

std::vector<ContentItem> RepositoryState::catalog_of(const CourseId& c) const {
    std::vector<ContentItem> out;
    for (const auto& [id, item] : catalog) {
        if (item.course == c) out.push_back(item);
    }
    return out;
}

//-----------------------------------------------------------------------------
// Canonical serialization and digest
//-----------------------------------------------------------------------------

std::string to_canonical_json(const ContentItem& item) {
    CanonicalObject o;
    o.field("id", item.id.str())
        .field("course", item.course.str())
        .field("kind", to_string(item.kind))
        .field("title", item.title)
        .field("submitter", item.submitter.str())
        .field("approved", item.approved)
        .field("keywords", item.keywords);
    return o.str();
}

std::string to_canonical_json(const SkillEstimate& e) {
    CanonicalObject o;
    o.field("student", e.student.str())
        .field("course", e.course.str())
        .field("level", e.level)
        .field("solved", e.solved)
        .field("method", to_string(e.method))
        .field("at", e.at.iso());
    return o.str();
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

std::string Snapshot::canonical_body() const {
    std::string out = "aels-snapshot v1\n";
    out += "as_of_seq " + std::to_string(as_of_seq) + "\n";
    for (const auto& item : catalog) out += "item " + to_canonical_json(item) + "\n";
    for (const auto& [course, user] : lecturers) {
        out += "lecturer " + CanonicalObject().field("course", course.str()).field("user", user.str()).str() + "\n";
    }
    for (const auto& [course, semester, student] : enrollments) {
        out += "enrollment " +
               CanonicalObject()
                   .field("course", course.str())
                   .field("semester", semester.str())
                   .field("student", student.str())
                   .str() +
               "\n";
    }
    for (const auto& [cs, seq] : closed) {
        out += "closed " +
               CanonicalObject()
                   .field("course", cs.first.str())
                   .field("semester", cs.second.str())
                   .field("seq", seq)
                   .str() +
               "\n";
    }
    for (const auto& g : grades) {
        out += "grade " +
               CanonicalObject()
                   .field("student", g.student.str())
                   .field("course", g.course.str())
                   .field("semester", g.semester.str())
                   .field("grade", g.grade)
                   .field("passed", g.passed)
                   .str() +
               "\n";
    }
    for (const auto& r : estimates) {
        out += "estimate " +
               CanonicalObject().field("semester", r.semester.str()).raw("estimate", to_canonical_json(r.estimate)).str() +
               "\n";
    }
    for (const auto& t : rank_tables) out += "rank_table " + ranking::to_canonical_json(t) + "\n";
    return out;
}

std::string Snapshot::serialize() const { return canonical_body() + "digest " + digest + "\n"; }

Snapshot make_snapshot(const RepositoryState& state) {
    Snapshot snap;
    snap.as_of_seq = state.last_seq;
    for (const auto& [id, item] : state.catalog) snap.catalog.push_back(item);
    for (const auto& [key, g] : state.grades) snap.grades.push_back(g);
    for (const auto& [key, e] : state.estimates) snap.estimates.push_back(RecordedEstimate{std::get<1>(key), e});
    for (const auto& [key, t] : state.rank_tables) snap.rank_tables.push_back(t);
    for (const auto& [course, users] : state.lecturers) {
        for (const auto& u : users) snap.lecturers.emplace_back(course, u);
    }
    for (const auto& [cs, students] : state.enrollments) {
        for (const auto& s : students) snap.enrollments.emplace_back(cs.first, cs.second, s);
    }
    for (const auto& [cs, seq] : state.closed) snap.closed.emplace_back(cs, seq);
    snap.digest = "sha256:" + sha256_hex(snap.canonical_body());
    return snap;
}

//-----------------------------------------------------------------------------
// Repository
//-----------------------------------------------------------------------------

Repository::Repository(RepositoryConfig config) : config_(std::move(config)) {}

Repository::Repository(std::filesystem::path log_path, RepositoryConfig config)
    : config_(std::move(config)), path_(std::move(log_path)) {
    if (std::filesystem::exists(*path_)) {
        for (const auto& e : read_event_log(*path_)) {
            if (e.seq != state_.last_seq + 1) {
                throw CorruptionError("log " + path_->string() + ": expected seq " +
                                          std::to_string(state_.last_seq + 1) + ", found " + std::to_string(e.seq),
                                      state_.last_seq + 1);
            }
            try {
                check(e);
            } catch (const RuleViolation& v) {
                throw CorruptionError("log " + path_->string() + ": invalid record at seq " + std::to_string(e.seq) +
                                          ": " + v.what(),
                                      e.seq);
            }
            apply(e);
        }
    }
    fd_ = ::open(path_->c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open " + path_->string() + ": " + std::strerror(errno));
}

Repository::~Repository() {
    if (fd_ >= 0) ::close(fd_);
}

std::uint64_t Repository::size() const {
    std::shared_lock lock(mutex_);
    return log_.size();
}

void Repository::validate(const EventRecord& event) const {
    std::shared_lock lock(mutex_);
    check(event);
}

std::uint64_t Repository::append(EventRecord event) {
    std::unique_lock lock(mutex_);
    event.seq = state_.last_seq + 1;
    check(event);
    persist(event);
    apply(event);
    return event.seq;
}

void Repository::persist(const EventRecord& e) {
    if (fd_ < 0) return;
    const std::string line = encode_event_line(e) + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw IoError("write to " + path_->string() + " failed: " + std::strerror(errno));
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw IoError("fsync of " + path_->string() + " failed: " + std::strerror(errno));
}

void Repository::check(const EventRecord& e) const {
    const auto action = to_string(e.action);
    if (e.ts < state_.last_ts)
        reject("ts_regression", "timestamp " + e.ts.iso() + " precedes the last logged " + state_.last_ts.iso());
    if (state_.is_closed(e.course, e.semester))
        reject("semester_closed", e.course.str() + " " + e.semester.str() + " is already closed");

    if (takes_content(e.action) && !e.content) reject("missing_content", std::string(action) + " needs a content id");
    if (!takes_content(e.action) && e.content)
        reject("unexpected_content", std::string(action) + " does not reference content");

    auto payload_is = [&](auto tag) { return std::holds_alternative<decltype(tag)>(e.payload); };
    const bool no_payload = payload_is(std::monostate{});

    switch (e.action) {
        case Action::upload: {
            if (no_payload) reject("missing_payload", "upload needs item metadata");
            if (!payload_is(UploadPayload{})) reject("unexpected_payload", "upload payload must be item metadata");
            if (state_.catalog.contains(*e.content))
                reject("duplicate_content", "content '" + e.content->str() + "' already exists");
            break;
        }
        case Action::approve: {
            if (!no_payload) reject("unexpected_payload", "approve takes no payload");
            auto it = state_.catalog.find(*e.content);
            if (it == state_.catalog.end()) reject("unknown_content", "content '" + e.content->str() + "' does not exist");
            const auto& item = it->second;
            if (item.course != e.course)
                reject("content_course_mismatch", "content '" + item.id.str() + "' belongs to " + item.course.str());
            if (item.kind != ContentKind::supplement)
                reject("not_supplement", "only supplements need approval; '" + item.id.str() + "' is a " +
                                             std::string(to_string(item.kind)));
            if (item.approved) reject("already_approved", "content '" + item.id.str() + "' is already approved");
            if (!state_.is_lecturer(e.course, e.actor))
                reject("not_lecturer", "'" + e.actor.str() + "' is not a lecturer of " + e.course.str());
            break;
        }
        case Action::download:
        case Action::suggest: {
            if (!no_payload) reject("unexpected_payload", std::string(action) + " takes no payload");
            auto it = state_.catalog.find(*e.content);
            if (it == state_.catalog.end()) reject("unknown_content", "content '" + e.content->str() + "' does not exist");
            if (it->second.course != e.course)
                reject("content_course_mismatch",
                       "content '" + e.content->str() + "' belongs to " + it->second.course.str());
            if (!it->second.approved) reject("not_approved", "content '" + e.content->str() + "' is not approved");
            break;
        }
        case Action::exam: {
            if (no_payload) reject("missing_grade", "exam needs a grade");
            if (!payload_is(ExamPayload{})) reject("unexpected_payload", "exam payload must be a grade");
            const int grade = std::get<ExamPayload>(e.payload).grade;
            if (grade < kMinGrade || grade > kMaxGrade)
                reject("grade_out_of_range", "grade " + std::to_string(grade) + " outside [5, 10]");
            break;
        }
        case Action::enroll: {
            if (!no_payload && !payload_is(EnrollPayload{}))
                reject("unexpected_payload", "enroll payload must be a role");
            break;
        }
        case Action::test_result: {
            if (no_payload) reject("missing_results", "test_result needs test id and results");
            if (!payload_is(TestResultPayload{}))
                reject("unexpected_payload", "test_result payload must carry test id and results");
            if (!state_.is_enrolled(e.course, e.semester, e.actor))
                reject("not_enrolled", "'" + e.actor.str() + "' is not enrolled in " + e.course.str() + " " +
                                           e.semester.str());
            const auto& tr = std::get<TestResultPayload>(e.payload);
            try {
                const TestDefinition def(tr.test, e.course, tr.weights);
                fes::score_test(def, TestResponse{tr.test, e.actor, tr.results});
            } catch (const Error& err) {
                reject("invalid_test", err.what());
            }
            break;
        }
        case Action::semester_close: {
            if (!no_payload) reject("unexpected_payload", "semester_close takes no payload");
            break;
        }
    }
}

void Repository::apply(const EventRecord& e) {
    state_.last_seq = e.seq;
    state_.last_ts = e.ts;
    state_.semesters[e.course].insert(e.semester);
    log_.push_back(e);
    const std::size_t index = log_.size() - 1;

    switch (e.action) {
        case Action::upload: {
            const auto& up = std::get<UploadPayload>(e.payload);
            ContentItem item{*e.content, e.course, up.kind, up.title, e.actor, up.kind != ContentKind::supplement,
                             up.keywords};
            if (item.approved) state_.approved_at[item.id] = e.seq;
            state_.catalog.emplace(item.id, std::move(item));
            break;
        }
        case Action::approve:
            state_.catalog.at(*e.content).approved = true;
            state_.approved_at[*e.content] = e.seq;
            break;
        case Action::download:
        case Action::suggest:
            activity_[{e.course, e.semester}].push_back(index);
            break;
        case Action::exam: {
            const int grade = std::get<ExamPayload>(e.payload).grade;
            state_.grades[{e.course, e.semester, e.actor}] =
                GradeRecord::make(e.actor, e.course, e.semester, grade, config_.pass_threshold);
            state_.enrollments[{e.course, e.semester}].insert(e.actor);
            break;
        }
        case Action::enroll: {
            const auto* en = std::get_if<EnrollPayload>(&e.payload);
            if (en && en->role == Role::lecturer)
                state_.lecturers[e.course].insert(e.actor);
            else
                state_.enrollments[{e.course, e.semester}].insert(e.actor);
            break;
        }
        case Action::test_result: {
            const auto& tr = std::get<TestResultPayload>(e.payload);
            const TestDefinition def(tr.test, e.course, tr.weights);
            auto est = fes::estimate_level(def, TestResponse{tr.test, e.actor, tr.results}, tr.method, e.ts);
            state_.estimates[{e.course, e.semester, e.actor}] = est;
            state_.latest_estimates[{e.course, e.actor}] = std::move(est);
            break;
        }
        case Action::semester_close:
            state_.closed[{e.course, e.semester}] = e.seq;
            state_.rank_tables[{e.course, e.semester}] = compute_rank_table(e.course, e.semester, e.seq);
            break;
    }
}

ranking::RankTable Repository::compute_rank_table(const CourseId& course, const SemesterId& semester,
                                                  std::uint64_t as_of_seq) const {
    std::vector<ContentItem> catalog;
    for (const auto& item : state_.catalog_of(course)) {
        auto it = state_.approved_at.find(item.id);
        if (it != state_.approved_at.end() && it->second <= as_of_seq) catalog.push_back(item);
    }
    std::vector<EventRecord> events;
    if (auto it = activity_.find({course, semester}); it != activity_.end()) {
        events.reserve(it->second.size());
        for (std::size_t i : it->second) events.push_back(log_[i]);
    }
    const auto grades = state_.grades_of(course, semester);
    const auto report = ranking::compute_metrics(course, semester, events, grades, catalog);
    return ranking::rank_content(course, semester, report, config_.weights);
}

ranking::RankTable Repository::build_rank_table(const CourseId& course, const SemesterId& semester) const {
    std::shared_lock lock(mutex_);
    auto it = state_.closed.find({course, semester});
    if (it == state_.closed.end())
        reject("semester_not_closed", "semester not closed: " + course.str() + " " + semester.str());
    return compute_rank_table(course, semester, it->second);
}

Snapshot Repository::snapshot() const {
    std::shared_lock lock(mutex_);
    return make_snapshot(state_);
}

//-----------------------------------------------------------------------------
// Replay and log files
//-----------------------------------------------------------------------------

Snapshot replay(std::span<const EventRecord> events, const RepositoryConfig& config) {
    Repository repo(config);
    std::uint64_t expected = 1;
    for (const auto& e : events) {
        if (e.seq != expected) {
            throw CorruptionError("seq gap: expected " + std::to_string(expected) + ", found " +
                                      std::to_string(e.seq),
                                  expected);
        }
        try {
            repo.append(e);
        } catch (const RuleViolation& v) {
            throw CorruptionError("invalid record at seq " + std::to_string(e.seq) + ": " + v.what(), e.seq);
        }
        ++expected;
    }
    return repo.snapshot();
}

std::vector<EventRecord> read_event_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<EventRecord> out;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(decode_event_line(line));
        } catch (const ArgumentError& err) {
            throw CorruptionError(path.string() + ":" + std::to_string(line_no) + ": " + err.what(), line_no);
        }
    }
    return out;
}

std::vector<ContentItem> search_catalog(const RepositoryState& state, const CourseId& course, std::string_view query) {
    std::vector<std::string> terms;
    {
        std::istringstream in{lowercase(query)};
        std::string t;
        while (in >> t) {
            if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(t);
        }
    }

    std::vector<std::pair<std::size_t, const ContentItem*>> hits;
    for (const auto& [id, item] : state.catalog) {
        if (item.course != course || !item.approved) continue;
        if (terms.empty()) {
            hits.emplace_back(0, &item);
            continue;
        }
        const std::string title = lowercase(item.title);
        std::vector<std::string> keywords;
        for (const auto& k : item.keywords) keywords.push_back(lowercase(k));
        std::size_t matched = 0;
        for (const auto& t : terms) {
            bool found = title.find(t) != std::string::npos;
            for (std::size_t i = 0; !found && i < keywords.size(); ++i) found = keywords[i].find(t) != std::string::npos;
            if (found) ++matched;
        }
        if (matched > 0) hits.emplace_back(matched, &item);
    }
    std::stable_sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->id < b.second->id;
    });
    std::vector<ContentItem> out;
    out.reserve(hits.size());
    for (const auto& h : hits) out.push_back(*h.second);
    return out;
}

}  // namespace aels
