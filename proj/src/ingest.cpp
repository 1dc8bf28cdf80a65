#include "aels/ingest.hpp"

#include <charconv>
#include <fstream>

#include "aels/canonical.hpp"

namespace aels {

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
        out.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

bool is_blank(std::string_view s) { return s.find_first_not_of(" \t\r") == std::string_view::npos; }

// Appends one record; grade overwrites are flagged before the write.
void append_one(Repository& repo, EventRecord event, std::uint64_t line_no, IngestReport& report) {
    if (event.action == Action::exam) {
        const bool duplicate = repo.read([&](const RepositoryState& st, auto) {
            return st.grade(event.course, event.semester, event.actor).has_value();
        });
        repo.append(event);
        if (duplicate) {
            report.flagged.push_back({line_no, "duplicate grade for " + event.actor.str() + " in " + event.course.str() +
                                                   " " + event.semester.str() + "; later record wins"});
        }
    } else {
        repo.append(event);
    }
    ++report.accepted;
}

}  // namespace

IngestFormat parse_ingest_format(std::string_view tag) {
    if (tag == "event-lines") return IngestFormat::event_lines;
    if (tag == "grades-csv") return IngestFormat::grades_csv;
    throw ArgumentError("unknown ingest format '" + std::string(tag) + "' (expected event-lines or grades-csv)");
}

IngestReport ingest(Repository& repo, const std::filesystem::path& path, IngestFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());

    IngestReport report;
    std::string line;
    std::uint64_t line_no = 0;

    if (format == IngestFormat::event_lines) {
        while (std::getline(in, line)) {
            ++line_no;
            if (is_blank(line)) continue;
            try {
                EventRecord e = decode_event_line(strip_cr(line));
                if (e.seq != 0) {
                    const auto next = repo.size() + 1;
                    if (e.seq != next)
                        throw RuleViolation("seq_mismatch", "record carries seq " + std::to_string(e.seq) +
                                                                " but the next seq is " + std::to_string(next));
                }
                append_one(repo, std::move(e), line_no, report);
            } catch (const RuleViolation& v) {
                report.rejected.push_back({line_no, v.what()});
            } catch (const ArgumentError& err) {
                report.rejected.push_back({line_no, std::string("malformed: ") + err.what()});
            }
        }
        return report;
    }

    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const auto fields = split_csv_line(strip_cr(line));
        if (!header_seen) {
            header_seen = true;
            if (fields == std::vector<std::string>{"student", "course", "semester", "grade"}) continue;
            report.rejected.push_back({line_no, "missing header student,course,semester,grade"});
            continue;
        }
        try {
            if (fields.size() != 4) throw ArgumentError("expected 4 fields, got " + std::to_string(fields.size()));
            int grade = 0;
            const auto& g = fields[3];
            auto [ptr, ec] = std::from_chars(g.data(), g.data() + g.size(), grade);
            if (ec != std::errc{} || ptr != g.data() + g.size()) throw ArgumentError("grade '" + g + "' is not an integer");
            EventRecord e;
            e.ts = repo.read([](const RepositoryState& st, auto) { return st.last_ts; });
            e.action = Action::exam;
            e.actor = UserId(fields[0]);
            e.course = CourseId(fields[1]);
            e.semester = SemesterId(fields[2]);
            e.payload = ExamPayload{grade};
            append_one(repo, std::move(e), line_no, report);
        } catch (const RuleViolation& v) {
            report.rejected.push_back({line_no, v.what()});
        } catch (const ArgumentError& err) {
            report.rejected.push_back({line_no, std::string("malformed: ") + err.what()});
        }
    }
    return report;
}

std::string to_canonical_json(const IngestReport& report) {
    auto issues = [](const std::vector<LineIssue>& list) {
        std::vector<std::string> parts;
        for (const auto& i : list) parts.push_back(CanonicalObject().field("line", i.line).field("reason", i.reason).str());
        return json_array(parts);
    };
    return CanonicalObject()
        .field("accepted", report.accepted)
        .raw("rejected", issues(report.rejected))
        .raw("flagged", issues(report.flagged))
        .str();
}

}  // namespace aels
