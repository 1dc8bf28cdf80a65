#pragma once
// Content ranking by measured contribution to student success.
//
// Per-item statistics are gathered from one course-semester of the log
// (distinct students only) and joined with that semester's exam grades. Each
// metric is min-max normalised across the course's downloaded items and the
// score is a weighted mean of the available normalised metrics.

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aels/domain.hpp"
#include "aels/event.hpp"

namespace aels::ranking {

struct ContentMetrics {
    ContentId content;
    std::uint64_t downloads = 0;
    std::uint64_t downloaders_passed = 0;
    std::uint64_t suggested_downloads = 0;
    std::uint64_t unsuggested_downloads = 0;
    std::optional<double> avg_grade_all;
    std::optional<double> avg_grade_downloaders;

    friend bool operator==(const ContentMetrics&, const ContentMetrics&) = default;
};

// Scoring metrics. The first six are the raw statistics; pass_rate and
// grade_lift are derived from them. New metrics are added here and in
// metric_value().
enum class Metric {
    downloads,
    downloaders_passed,
    suggested_downloads,
    unsuggested_downloads,
    avg_grade_all,
    avg_grade_downloaders,
    pass_rate,   // downloaders_passed / downloads
    grade_lift,  // avg_grade_downloaders - avg_grade_all
};

inline constexpr std::size_t kMetricCount = 8;

std::string_view to_string(Metric metric);
std::optional<Metric> parse_metric(std::string_view name);

// Value of one metric for an item; nullopt when undefined (no downloads, or
// no grades behind an average).
std::optional<double> metric_value(const ContentMetrics& m, Metric metric);

class MetricWeights {
public:
    // Equal thirds on pass_rate, downloads and grade_lift.
    MetricWeights();
    // Throws ArgumentError unless every weight is >= 0 and they sum to 1.
    explicit MetricWeights(const std::array<double, kMetricCount>& weights);

    double operator[](Metric m) const noexcept { return w_[static_cast<std::size_t>(m)]; }
    const std::array<double, kMetricCount>& values() const noexcept { return w_; }

    friend bool operator==(const MetricWeights&, const MetricWeights&) = default;

private:
    std::array<double, kMetricCount> w_{};
};

// Range of each metric over a course's items with at least one download.
struct CourseStats {
    struct Range {
        bool present = false;
        double min = 0.0;
        double max = 0.0;
    };
    std::array<Range, kMetricCount> ranges{};
};

CourseStats course_stats(std::span<const ContentMetrics> items);

// Min-max normalisation; a constant column maps to 1.
double normalize(double value, const CourseStats::Range& range) noexcept;

// Weighted mean of the item's available normalised metrics, weights
// renormalised over that subset. Zero downloads scores 0.
double score_content(const ContentMetrics& metrics, const CourseStats& stats, const MetricWeights& weights);

struct MetricsReport {
    std::map<ContentId, ContentMetrics> metrics;  // one entry per eligible item
    std::size_t skipped_events = 0;               // downloads/suggests for unknown content
    std::vector<std::string> diagnostics;
};

// Statistics for every approved catalog item of `course`. Events outside the
// course-semester are ignored; grades outside it are ignored too. A download
// counts as suggested when the student's first download of the item is at or
// after the earliest suggestion of that item to that student.
MetricsReport compute_metrics(const CourseId& course, const SemesterId& semester,
                              std::span<const EventRecord> events, std::span<const GradeRecord> grades,
                              std::span<const ContentItem> catalog);

struct RankEntry {
    ContentId content;
    double score = 0.0;
    ContentMetrics metrics;

    friend bool operator==(const RankEntry&, const RankEntry&) = default;
};

struct RankTable {
    CourseId course;
    SemesterId semester;
    std::vector<RankEntry> entries;  // score descending, ties by ascending id

    friend bool operator==(const RankTable&, const RankTable&) = default;
};

RankTable rank_content(const CourseId& course, const SemesterId& semester, const MetricsReport& report,
                       const MetricWeights& weights);

// Canonical JSON object for a rank table.
std::string to_canonical_json(const RankTable& table);
std::string to_canonical_json(const ContentMetrics& metrics);
// Header: rank,content_id,score,downloads,downloaders_passed,suggested_downloads,
// unsuggested_downloads,avg_grade_all,avg_grade_downloaders. Absent averages are empty.
std::string to_csv(const RankTable& table);

}  // namespace aels::ranking
