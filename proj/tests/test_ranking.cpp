#include <doctest.h>

#include <random>

#include "aels/ranking.hpp"
#include "support.hpp"

using namespace aels;
using namespace aels::ranking;
using namespace testsupport;

namespace {

const CourseId kC("C1");
const SemesterId kS("2024-S1");

ContentItem item(const std::string& id, bool approved = true, const std::string& course = "C1") {
    return ContentItem{ContentId(id), CourseId(course), ContentKind::supplement, "Item " + id, UserId("u"), approved, {}};
}

std::vector<GradeRecord> grades_from(const std::vector<EventRecord>& events) {
    std::vector<GradeRecord> out;
    for (const auto& e : events)
        if (e.action == Action::exam)
            out.push_back(GradeRecord::make(e.actor, e.course, e.semester, std::get<ExamPayload>(e.payload).grade));
    return out;
}

void number(std::vector<EventRecord>& events) {
    for (std::size_t i = 0; i < events.size(); ++i) events[i].seq = i + 1;
}

MetricsReport metrics_of(std::vector<EventRecord> events, const std::vector<ContentItem>& catalog) {
    number(events);
    const auto grades = grades_from(events);
    return compute_metrics(kC, kS, events, grades, catalog);
}

void check_against_oracle(const MetricsReport& report, const std::map<std::string, OracleMetrics>& oracle) {
    REQUIRE(report.metrics.size() == oracle.size());
    for (const auto& [id, o] : oracle) {
        CAPTURE(id);
        const auto& m = report.metrics.at(ContentId(id));
        CHECK(m.downloads == o.downloads);
        CHECK(m.downloaders_passed == o.downloaders_passed);
        CHECK(m.suggested_downloads == o.suggested_downloads);
        CHECK(m.unsuggested_downloads == o.unsuggested_downloads);
        CHECK(m.avg_grade_all.has_value() == o.avg_grade_all.has_value());
        if (o.avg_grade_all) CHECK(*m.avg_grade_all == doctest::Approx(*o.avg_grade_all).epsilon(1e-12));
        CHECK(m.avg_grade_downloaders.has_value() == o.avg_grade_downloaders.has_value());
        if (o.avg_grade_downloaders)
            CHECK(*m.avg_grade_downloaders == doctest::Approx(*o.avg_grade_downloaders).epsilon(1e-12));
    }
}

MetricWeights two_metric_weights(Metric a, Metric b) {
    std::array<double, kMetricCount> w{};
    w[static_cast<std::size_t>(a)] = 0.5;
    w[static_cast<std::size_t>(b)] = 0.5;
    return MetricWeights(w);
}

}  // namespace

TEST_CASE("three distinct downloaders, two pass") {
    const auto r = metrics_of({download("s1", "A", "C1", "2024-S1", T(1)), download("s2", "A", "C1", "2024-S1", T(2)),
                               download("s3", "A", "C1", "2024-S1", T(3)), exam("s1", 8, "C1", "2024-S1", T(10)),
                               exam("s2", 6, "C1", "2024-S1", T(10)), exam("s3", 5, "C1", "2024-S1", T(10))},
                              {item("A")});
    const auto& m = r.metrics.at(ContentId("A"));
    CHECK(m.downloads == 3);
    CHECK(m.downloaders_passed == 2);
    CHECK(m.unsuggested_downloads == 3);
    CHECK(*m.avg_grade_downloaders == doctest::Approx(19.0 / 3.0));
}

TEST_CASE("empty event stream gives zero counts and absent averages") {
    const auto r = metrics_of({}, {item("A"), item("B")});
    for (const auto& [id, m] : r.metrics) {
        CHECK(m.downloads == 0);
        CHECK(m.downloaders_passed == 0);
        CHECK_FALSE(m.avg_grade_all.has_value());
        CHECK_FALSE(m.avg_grade_downloaders.has_value());
    }
}

TEST_CASE("repeat downloads count once") {
    const auto r = metrics_of({download("s1", "A", "C1", "2024-S1", T(1)), download("s1", "A", "C1", "2024-S1", T(2)),
                               exam("s1", 9, "C1", "2024-S1", T(3))},
                              {item("A")});
    CHECK(r.metrics.at(ContentId("A")).downloads == 1);
    CHECK(r.metrics.at(ContentId("A")).downloaders_passed == 1);
}

TEST_CASE("a download counts as suggested only if the suggestion came first") {
    const auto r = metrics_of({suggest("s1", "A", "C1", "2024-S1", T(1)), download("s1", "A", "C1", "2024-S1", T(2)),
                               download("s2", "A", "C1", "2024-S1", T(3)), suggest("s2", "A", "C1", "2024-S1", T(4)),
                               suggest("s3", "A", "C1", "2024-S1", T(5)), download("s3", "A", "C1", "2024-S1", T(5))},
                              {item("A")});
    const auto& m = r.metrics.at(ContentId("A"));
    CHECK(m.downloads == 3);
    CHECK(m.suggested_downloads == 2);
    CHECK(m.unsuggested_downloads == 1);
}

TEST_CASE("unknown content and foreign semesters are skipped") {
    const auto r = metrics_of({download("s1", "Z", "C1", "2024-S1", T(1)), download("s1", "A", "C1", "2024-S2", T(2)),
                               download("s1", "U", "C1", "2024-S1", T(3)), download("s1", "A", "C2", "2024-S1", T(4))},
                              {item("A"), item("U", false)});
    CHECK(r.metrics.size() == 1);
    CHECK(r.metrics.at(ContentId("A")).downloads == 0);
    CHECK(r.skipped_events == 2);
    CHECK(r.diagnostics.size() == 2);
}

TEST_CASE("the later grade record for a student wins") {
    const auto r = metrics_of({download("s1", "A", "C1", "2024-S1", T(1)), exam("s1", 9, "C1", "2024-S1", T(2)),
                               exam("s1", 5, "C1", "2024-S1", T(3))},
                              {item("A")});
    CHECK(r.metrics.at(ContentId("A")).downloaders_passed == 0);
    CHECK(*r.metrics.at(ContentId("A")).avg_grade_all == 5.0);
}

TEST_CASE("metric weights are validated") {
    CHECK(MetricWeights()[Metric::pass_rate] == doctest::Approx(1.0 / 3.0));
    CHECK(MetricWeights()[Metric::downloads] == doctest::Approx(1.0 / 3.0));
    CHECK(MetricWeights()[Metric::grade_lift] == doctest::Approx(1.0 / 3.0));
    std::array<double, kMetricCount> w{};
    CHECK_THROWS_AS(MetricWeights{w}, ArgumentError);
    w[0] = 1.5;
    w[1] = -0.5;
    CHECK_THROWS_AS(MetricWeights{w}, ArgumentError);
    for (Metric m : {Metric::downloads, Metric::pass_rate, Metric::grade_lift})
        CHECK(parse_metric(to_string(m)) == m);
    CHECK_FALSE(parse_metric("popularity").has_value());
}

TEST_CASE("score_content degenerate cases") {
    ContentMetrics single{ContentId("A"), 4, 3, 1, 3, 7.0, 7.5};
    const std::vector<ContentMetrics> one{single};
    CHECK(score_content(single, course_stats(one), MetricWeights()) == 1.0);

    ContentMetrics none{ContentId("B"), 0, 0, 0, 0, 7.0, std::nullopt};
    const std::vector<ContentMetrics> two{single, none};
    CHECK(score_content(none, course_stats(two), MetricWeights()) == 0.0);
}

TEST_CASE("two items scored on downloads and pass rate") {
    ContentMetrics a{ContentId("A"), 10, 8, 0, 10, std::nullopt, std::nullopt};
    ContentMetrics b{ContentId("B"), 2, 1, 0, 2, std::nullopt, std::nullopt};
    const std::vector<ContentMetrics> all{a, b};
    const auto stats = course_stats(all);
    const auto w = two_metric_weights(Metric::downloads, Metric::pass_rate);
    CHECK(score_content(a, stats, w) == 1.0);
    CHECK(score_content(b, stats, w) == 0.0);
}

TEST_CASE("missing metrics renormalise the remaining weights") {
    ContentMetrics a{ContentId("A"), 4, 4, 0, 4, std::nullopt, std::nullopt};
    ContentMetrics b{ContentId("B"), 2, 0, 0, 2, std::nullopt, std::nullopt};
    const std::vector<ContentMetrics> all{a, b};
    const auto stats = course_stats(all);
    CHECK(score_content(a, stats, MetricWeights()) == 1.0);
    CHECK(score_content(b, stats, MetricWeights()) == 0.0);
}

TEST_CASE("rank table on an empty course is empty") {
    const auto table = rank_content(kC, kS, metrics_of({}, {}), MetricWeights());
    CHECK(table.entries.empty());
    CHECK(to_canonical_json(table) == R"({"course":"C1","semester":"2024-S1","entries":[]})");
}

TEST_CASE("four-item fixture matches the oracle ordering") {
    // A: 3 downloaders, all pass with high grades.  B: 4 downloaders, mixed.
    // C: 1 downloader who fails.  D: never downloaded.
    std::vector<EventRecord> ev = {
        download("s1", "A", "C1", "2024-S1", T(1)), download("s2", "A", "C1", "2024-S1", T(2)),
        download("s3", "A", "C1", "2024-S1", T(3)), download("s1", "B", "C1", "2024-S1", T(4)),
        download("s4", "B", "C1", "2024-S1", T(5)), download("s5", "B", "C1", "2024-S1", T(6)),
        download("s6", "B", "C1", "2024-S1", T(7)), download("s6", "C", "C1", "2024-S1", T(8)),
        suggest("s4", "B", "C1", "2024-S1", T(4)),  exam("s1", 10, "C1", "2024-S1", T(20)),
        exam("s2", 9, "C1", "2024-S1", T(20)),      exam("s3", 8, "C1", "2024-S1", T(20)),
        exam("s4", 6, "C1", "2024-S1", T(20)),      exam("s5", 5, "C1", "2024-S1", T(20)),
        exam("s6", 5, "C1", "2024-S1", T(20)),      exam("s7", 7, "C1", "2024-S1", T(20)),
    };
    number(ev);
    const std::vector<ContentItem> catalog{item("A"), item("B"), item("C"), item("D")};
    const auto report = metrics_of(ev, catalog);
    const auto oracle = oracle_metrics("C1", "2024-S1", ev, catalog);
    check_against_oracle(report, oracle);

    const auto table = rank_content(kC, kS, report, MetricWeights());
    const auto expected = oracle_ranking(oracle);
    REQUIRE(table.entries.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(table.entries[i].content.str() == expected[i].first);
        CHECK(table.entries[i].score == doctest::Approx(expected[i].second).epsilon(1e-12));
    }
    std::vector<std::string> order;
    for (const auto& e : table.entries) order.push_back(e.content.str());
    CHECK(order == std::vector<std::string>{"A", "B", "C", "D"});
    CHECK(table.entries.back().score == 0.0);
}

TEST_CASE("equal scores break ties by content id") {
    const auto r = metrics_of({download("s1", "B", "C1", "2024-S1", T(1)), download("s1", "A", "C1", "2024-S1", T(2))},
                              {item("B"), item("A")});
    const auto table = rank_content(kC, kS, r, MetricWeights());
    CHECK(table.entries[0].content.str() == "A");
    CHECK(table.entries[1].content.str() == "B");
}

TEST_CASE("CSV export") {
    const auto r = metrics_of({download("s1", "A", "C1", "2024-S1", T(1)), exam("s1", 7, "C1", "2024-S1", T(2))},
                              {item("A"), item("B")});
    const auto csv = to_csv(rank_content(kC, kS, r, MetricWeights()));
    CHECK(csv ==
          "rank,content_id,score,downloads,downloaders_passed,suggested_downloads,unsuggested_downloads,"
          "avg_grade_all,avg_grade_downloaders\n"
          "1,A,1,1,1,0,1,7,7\n"
          "2,B,0,0,0,0,0,7,\n");
}

TEST_CASE("property: random logs match the brute-force counter and survive shuffling") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<ContentItem> catalog;
        const int n_items = 1 + static_cast<int>(rng() % 10);
        for (int i = 0; i < n_items; ++i) catalog.push_back(item("i" + std::to_string(i), rng() % 5 != 0));
        std::vector<EventRecord> ev;
        const int n_events = static_cast<int>(rng() % 300);
        for (int k = 0; k < n_events; ++k) {
            const auto s = "s" + std::to_string(rng() % 50);
            const auto it = "i" + std::to_string(rng() % (n_items + 1));
            const auto ts = T(static_cast<std::int64_t>(rng() % 100));
            switch (rng() % 3) {
                case 0: ev.push_back(download(s, it, "C1", "2024-S1", ts)); break;
                case 1: ev.push_back(suggest(s, it, "C1", "2024-S1", ts)); break;
                default: ev.push_back(exam(s, 5 + static_cast<int>(rng() % 6), "C1", "2024-S1", ts)); break;
            }
        }
        number(ev);
        const auto grades = grades_from(ev);
        const auto report = compute_metrics(kC, kS, ev, grades, catalog);
        check_against_oracle(report, oracle_metrics("C1", "2024-S1", ev, catalog));
        const auto table = rank_content(kC, kS, report, MetricWeights());

        auto shuffled = ev;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto report2 = compute_metrics(kC, kS, shuffled, grades, catalog);
        CHECK(rank_content(kC, kS, report2, MetricWeights()) == table);
    }
}

TEST_CASE("property: an event for one item leaves other items' metrics unchanged") {
    std::vector<EventRecord> ev = {download("s1", "A", "C1", "2024-S1", T(1)), download("s2", "B", "C1", "2024-S1", T(2)),
                                   exam("s1", 8, "C1", "2024-S1", T(3)), exam("s2", 5, "C1", "2024-S1", T(3))};
    const std::vector<ContentItem> catalog{item("A"), item("B")};
    const auto before = metrics_of(ev, catalog);
    for (auto extra : {download("s1", "A", "C1", "2024-S1", T(4)), suggest("s2", "A", "C1", "2024-S1", T(4)),
                       download("s9", "A", "C1", "2024-S1", T(0))}) {
        auto more = ev;
        more.push_back(extra);
        CHECK(metrics_of(more, catalog).metrics.at(ContentId("B")) == before.metrics.at(ContentId("B")));
    }
}

TEST_CASE("property: metric invariants hold on random logs") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<EventRecord> ev;
        for (int k = 0; k < 100; ++k) {
            const auto s = "s" + std::to_string(rng() % 20);
            const auto it = "i" + std::to_string(rng() % 4);
            if (rng() % 2)
                ev.push_back(download(s, it, "C1", "2024-S1", T(k)));
            else if (rng() % 2)
                ev.push_back(suggest(s, it, "C1", "2024-S1", T(k)));
            else
                ev.push_back(exam(s, 5 + static_cast<int>(rng() % 6), "C1", "2024-S1", T(k)));
        }
        const auto report = metrics_of(ev, {item("i0"), item("i1"), item("i2"), item("i3")});
        const auto table = rank_content(kC, kS, report, MetricWeights());
        for (std::size_t i = 0; i < table.entries.size(); ++i) {
            const auto& m = table.entries[i].metrics;
            CHECK(m.suggested_downloads + m.unsuggested_downloads == m.downloads);
            CHECK(m.downloaders_passed <= m.downloads);
            CHECK(table.entries[i].score >= 0.0);
            CHECK(table.entries[i].score <= 1.0);
            if (i > 0) CHECK(table.entries[i - 1].score >= table.entries[i].score);
        }
    }
}
