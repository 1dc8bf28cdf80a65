#include "aels/ranking.hpp"

#include <algorithm>
#include <cmath>

#include "aels/canonical.hpp"

namespace aels::ranking {

namespace {

constexpr std::array<std::string_view, kMetricCount> kMetricNames = {
    "downloads",     "downloaders_passed",    "suggested_downloads", "unsuggested_downloads",
    "avg_grade_all", "avg_grade_downloaders", "pass_rate",           "grade_lift",
};

struct StudentContact {
    std::optional<Timestamp> first_download;
    std::optional<Timestamp> first_suggest;
};

}  // namespace

std::string_view to_string(Metric metric) { return kMetricNames[static_cast<std::size_t>(metric)]; }

std::optional<Metric> parse_metric(std::string_view name) {
    for (std::size_t i = 0; i < kMetricCount; ++i) {
        if (kMetricNames[i] == name) return static_cast<Metric>(i);
    }
    return std::nullopt;
}

std::optional<double> metric_value(const ContentMetrics& m, Metric metric) {
    if (m.downloads == 0) return std::nullopt;
    switch (metric) {
        case Metric::downloads: return static_cast<double>(m.downloads);
        case Metric::downloaders_passed: return static_cast<double>(m.downloaders_passed);
        case Metric::suggested_downloads: return static_cast<double>(m.suggested_downloads);
        case Metric::unsuggested_downloads: return static_cast<double>(m.unsuggested_downloads);
        case Metric::avg_grade_all: return m.avg_grade_all;
        case Metric::avg_grade_downloaders: return m.avg_grade_downloaders;
        case Metric::pass_rate: return static_cast<double>(m.downloaders_passed) / static_cast<double>(m.downloads);
        case Metric::grade_lift:
            if (m.avg_grade_all && m.avg_grade_downloaders) return *m.avg_grade_downloaders - *m.avg_grade_all;
            return std::nullopt;
    }
    return std::nullopt;
}

MetricWeights::MetricWeights() {
    w_[static_cast<std::size_t>(Metric::pass_rate)] = 1.0 / 3.0;
    w_[static_cast<std::size_t>(Metric::downloads)] = 1.0 / 3.0;
    w_[static_cast<std::size_t>(Metric::grade_lift)] = 1.0 / 3.0;
}

MetricWeights::MetricWeights(const std::array<double, kMetricCount>& weights) : w_(weights) {
    double sum = 0.0;
    for (std::size_t i = 0; i < kMetricCount; ++i) {
        if (!(w_[i] >= 0.0) || !std::isfinite(w_[i]))
            throw ArgumentError("metric weight for " + std::string(kMetricNames[i]) + " must be non-negative");
        sum += w_[i];
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("metric weights must sum to 1, got " + format_real(sum));
}

CourseStats course_stats(std::span<const ContentMetrics> items) {
    CourseStats stats;
    for (const auto& item : items) {
        for (std::size_t i = 0; i < kMetricCount; ++i) {
            const auto v = metric_value(item, static_cast<Metric>(i));
            if (!v) continue;
            auto& r = stats.ranges[i];
            if (!r.present) {
                r = {true, *v, *v};
            } else {
                r.min = std::min(r.min, *v);
                r.max = std::max(r.max, *v);
            }
        }
    }
    return stats;
}

double normalize(double value, const CourseStats::Range& range) noexcept {
    if (!(range.max > range.min)) return 1.0;
    return std::clamp((value - range.min) / (range.max - range.min), 0.0, 1.0);
}

double score_content(const ContentMetrics& metrics, const CourseStats& stats, const MetricWeights& weights) {
    if (metrics.downloads == 0) return 0.0;
    double acc = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < kMetricCount; ++i) {
        const auto metric = static_cast<Metric>(i);
        const double w = weights[metric];
        if (w <= 0.0) continue;
        const auto v = metric_value(metrics, metric);
        if (!v || !stats.ranges[i].present) continue;
        acc += w * normalize(*v, stats.ranges[i]);
        total += w;
    }
    if (total <= 0.0) return 0.0;
    return std::clamp(acc / total, 0.0, 1.0);
}

MetricsReport compute_metrics(const CourseId& course, const SemesterId& semester,
                              std::span<const EventRecord> events, std::span<const GradeRecord> grades,
                              std::span<const ContentItem> catalog) {
    MetricsReport report;
    for (const auto& item : catalog) {
        if (item.course == course && item.approved) report.metrics[item.id].content = item.id;
    }

    // Later records for the same student win.
    std::map<StudentId, const GradeRecord*> grade_of;
    for (const auto& g : grades) {
        if (g.course == course && g.semester == semester) grade_of[g.student] = &g;
    }

    std::optional<double> avg_all;
    if (!grade_of.empty()) {
        long long sum = 0;
        for (const auto& [s, g] : grade_of) sum += g->grade;
        avg_all = static_cast<double>(sum) / static_cast<double>(grade_of.size());
    }

    std::map<ContentId, std::map<StudentId, StudentContact>> contacts;
    for (const auto& e : events) {
        if (e.course != course || e.semester != semester) continue;
        if (e.action != Action::download && e.action != Action::suggest) continue;
        if (!e.content || !report.metrics.contains(*e.content)) {
            ++report.skipped_events;
            report.diagnostics.push_back("skipped " + std::string(to_string(e.action)) + " of unknown content '" +
                                         (e.content ? e.content->str() : std::string("<none>")) + "'");
            continue;
        }
        auto& c = contacts[*e.content][e.actor];
        auto& slot = e.action == Action::download ? c.first_download : c.first_suggest;
        if (!slot || e.ts < *slot) slot = e.ts;
    }

    for (auto& [id, m] : report.metrics) {
        m.avg_grade_all = avg_all;
        auto it = contacts.find(id);
        if (it == contacts.end()) continue;
        long long grade_sum = 0;
        std::uint64_t graded = 0;
        for (const auto& [student, c] : it->second) {
            if (!c.first_download) continue;
            ++m.downloads;
            if (c.first_suggest && *c.first_suggest <= *c.first_download)
                ++m.suggested_downloads;
            else
                ++m.unsuggested_downloads;
            if (auto g = grade_of.find(student); g != grade_of.end()) {
                if (g->second->passed) ++m.downloaders_passed;
                grade_sum += g->second->grade;
                ++graded;
            }
        }
        if (graded > 0) m.avg_grade_downloaders = static_cast<double>(grade_sum) / static_cast<double>(graded);
    }
    return report;
}

RankTable rank_content(const CourseId& course, const SemesterId& semester, const MetricsReport& report,
                       const MetricWeights& weights) {
    std::vector<ContentMetrics> all;
    all.reserve(report.metrics.size());
    for (const auto& [id, m] : report.metrics) all.push_back(m);
    const CourseStats stats = course_stats(all);

    RankTable table{course, semester, {}};
    table.entries.reserve(all.size());
    for (const auto& m : all) table.entries.push_back(RankEntry{m.content, score_content(m, stats, weights), m});
    std::stable_sort(table.entries.begin(), table.entries.end(), [](const RankEntry& a, const RankEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.content < b.content;
    });
    return table;
}

std::string to_canonical_json(const ContentMetrics& m) {
    CanonicalObject o;
    o.field("content", m.content.str())
        .field("downloads", m.downloads)
        .field("downloaders_passed", m.downloaders_passed)
        .field("suggested_downloads", m.suggested_downloads)
        .field("unsuggested_downloads", m.unsuggested_downloads)
        .field("avg_grade_all", m.avg_grade_all)
        .field("avg_grade_downloaders", m.avg_grade_downloaders);
    return o.str();
}

std::string to_canonical_json(const RankTable& table) {
    std::vector<std::string> entries;
    entries.reserve(table.entries.size());
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        const auto& e = table.entries[i];
        CanonicalObject o;
        o.field("rank", static_cast<std::uint64_t>(i + 1))
            .field("content", e.content.str())
            .field("score", e.score)
            .raw("metrics", to_canonical_json(e.metrics));
        entries.push_back(o.str());
    }
    CanonicalObject o;
    o.field("course", table.course.str()).field("semester", table.semester.str()).raw("entries", json_array(entries));
    return o.str();
}

std::string to_csv(const RankTable& table) {
    std::string out =
        "rank,content_id,score,downloads,downloaders_passed,suggested_downloads,unsuggested_downloads,"
        "avg_grade_all,avg_grade_downloaders\n";
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        const auto& e = table.entries[i];
        const auto& m = e.metrics;
        out += std::to_string(i + 1) + "," + e.content.str() + "," + format_real(e.score) + "," +
               std::to_string(m.downloads) + "," + std::to_string(m.downloaders_passed) + "," +
               std::to_string(m.suggested_downloads) + "," + std::to_string(m.unsuggested_downloads) + "," +
               (m.avg_grade_all ? format_real(*m.avg_grade_all) : "") + "," +
               (m.avg_grade_downloaders ? format_real(*m.avg_grade_downloaders) : "") + "\n";
    }
    return out;
}

}  // namespace aels::ranking
