#include "aels/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "aels/canonical.hpp"

namespace aels::sim {

namespace {

enum Purpose : std::uint64_t {
    kAbility = 1,
    kQuality = 2,
    kTest = 3,
    kRandomPick = 4,
    kConsume = 5,
    kBrowse = 6,
    kExam = 7,
};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string padded(const char* prefix, int value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, value);
    return buf;
}

void draw_cohort(World& w) {
    const auto& p = w.params;
    Stream abilities(derive_seed(p.seed, kAbility, static_cast<std::uint64_t>(w.semester_index), 0));
    w.cohort.clear();
    w.cohort.reserve(static_cast<std::size_t>(p.students));
    for (int j = 0; j < p.students; ++j) {
        const double z = abilities.normal();
        w.cohort.push_back(Student{StudentId(w.semester.str() + "-" + padded("st", j, 4)),
                                   p.ability_sd == 0.0 ? p.ability_mean : p.ability_mean + p.ability_sd * z});
    }
}

EventRecord make_event(World& w, Action action, const UserId& actor, std::optional<ContentId> content = std::nullopt,
                       Payload payload = std::monostate{}) {
    EventRecord e;
    e.ts = w.tick();
    e.action = action;
    e.actor = actor;
    e.content = std::move(content);
    e.course = w.course;
    e.semester = w.semester;
    e.payload = std::move(payload);
    return e;
}

// K distinct indices out of n by partial Fisher-Yates.
std::vector<std::size_t> pick_distinct(Stream& rng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    k = std::min(k, n);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - i));
        std::swap(idx[i], idx[std::min(j, n - 1)]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace

std::string_view to_string(Policy policy) {
    switch (policy) {
        case Policy::adaptive: return "adaptive";
        case Policy::random: return "random";
        case Policy::none: return "none";
    }
    return "none";
}

Policy parse_policy(std::string_view text) {
    for (Policy p : kAllPolicies) {
        if (to_string(p) == text) return p;
    }
    throw ArgumentError("unknown policy '" + std::string(text) + "' (expected adaptive, random or none)");
}

void CohortParams::validate() const {
    if (students <= 0 || items <= 0 || semesters <= 0 || test_tasks <= 0)
        throw ArgumentError("students, items, semesters and test tasks must be positive");
    if (!(ability_sd >= 0.0)) throw ArgumentError("ability sd must be >= 0");
    if (!(boost >= 0.0)) throw ArgumentError("boost must be >= 0");
    if (!(consumption >= 0.0 && consumption <= 1.0) || !(browse >= 0.0 && browse <= 1.0))
        throw ArgumentError("consumption and browse probabilities must lie in [0, 1]");
    if (!(exam_noise >= 0.0)) throw ArgumentError("exam noise must be >= 0");
    if (k <= 0) throw ArgumentError("k must be positive");
    if (!content_quality.empty()) {
        if (content_quality.size() != static_cast<std::size_t>(items))
            throw ArgumentError("content_quality needs one value per item");
        for (double q : content_quality) {
            if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("content quality must lie in [0, 1]");
        }
    }
}

Stream::Stream(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Stream::next() { return engine_(); }

double Stream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Stream::normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t semester, std::uint64_t student) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ purpose);
    h = splitmix64(h ^ semester);
    return splitmix64(h ^ student);
}

Timestamp World::tick() {
    clock.ms += 1000;
    return clock;
}

World generate_cohort(const CohortParams& params) {
    params.validate();
    World w;
    w.params = params;
    w.repo = std::make_unique<Repository>();
    w.engine = std::make_unique<AdaptiveEngine>(*w.repo, EngineConfig{params.method, params.k});

    const auto n_items = static_cast<std::size_t>(params.items);
    if (params.content_quality.empty()) {
        Stream q(derive_seed(params.seed, kQuality, 0, 0));
        for (std::size_t i = 0; i < n_items; ++i) w.quality.push_back(q.uniform());
    } else {
        w.quality = params.content_quality;
    }
    for (int t = 0; t < params.test_tasks; ++t) {
        const double frac = params.test_tasks == 1 ? 0.5 : static_cast<double>(t) / (params.test_tasks - 1);
        w.task_difficulty.push_back(-1.5 + 3.0 * frac);
    }

    w.repo->append(make_event(w, Action::enroll, w.lecturer, std::nullopt, EnrollPayload{Role::lecturer}));
    for (std::size_t i = 0; i < n_items; ++i) {
        ContentId id(padded("item-", static_cast<int>(i + 1), 2));
        w.items.push_back(id);
        UploadPayload up{ContentKind::supplement, "Supplement " + std::to_string(i + 1), {"sim"}};
        w.repo->append(make_event(w, Action::upload, w.lecturer, id, up));
        w.repo->append(make_event(w, Action::approve, w.lecturer, id));
    }
    draw_cohort(w);
    return w;
}

SemesterOutcome run_semester(World& w, Policy policy) {
    const auto& p = w.params;
    SemesterOutcome out;
    out.semester = w.semester;
    out.first_seq = w.repo->size() + 1;
    const auto sem = static_cast<std::uint64_t>(w.semester_index);
    const std::size_t n_items = w.items.size();
    const TestDefinition midterm =
        TestDefinition::uniform("midterm-" + w.semester.str(), w.course, static_cast<std::size_t>(p.test_tasks));

    for (const auto& s : w.cohort) w.repo->append(make_event(w, Action::enroll, s.id));

    // Mid-term tests and fuzzy estimates.
    for (std::size_t j = 0; j < w.cohort.size(); ++j) {
        Stream rng(derive_seed(p.seed, kTest, sem, j));
        TestResponse resp{midterm.id(), w.cohort[j].id, {}};
        for (double d : w.task_difficulty) resp.results.push_back(rng.uniform() < logistic(w.cohort[j].ability - d) ? 1 : 0);
        w.engine->record_estimate(midterm, resp, w.tick());
    }

    // Suggestions.
    const bool have_table = w.repo->read([&](const RepositoryState& st, auto) {
        const auto* t = st.latest_rank_table(w.course);
        return t != nullptr && !t->entries.empty();
    });
    std::vector<std::vector<std::size_t>> suggested(w.cohort.size());
    for (std::size_t j = 0; j < w.cohort.size() && policy != Policy::none; ++j) {
        const auto& s = w.cohort[j];
        if (policy == Policy::adaptive && have_table) {
            const auto set = w.engine->suggest(s.id, w.course, p.k, w.tick());
            for (const auto& item : set.items) {
                const auto pos = std::find(w.items.begin(), w.items.end(), item) - w.items.begin();
                suggested[j].push_back(static_cast<std::size_t>(pos));
            }
        } else {
            // Random policy, and the adaptive policy before any semester has closed.
            Stream rng(derive_seed(p.seed, kRandomPick, sem, j));
            suggested[j] = pick_distinct(rng, n_items, static_cast<std::size_t>(p.k));
            for (std::size_t i : suggested[j]) w.repo->append(make_event(w, Action::suggest, s.id, w.items[i]));
        }
        out.suggest_events += suggested[j].size();
    }

    // Downloads: accepted suggestions plus unprompted browsing.
    for (std::size_t j = 0; j < w.cohort.size(); ++j) {
        Stream consume(derive_seed(p.seed, kConsume, sem, j));
        Stream browse(derive_seed(p.seed, kBrowse, sem, j));
        std::vector<bool> take(n_items, false);
        for (std::size_t i = 0; i < n_items; ++i) {
            const double uc = consume.uniform();
            const double ub = browse.uniform();
            const bool was_suggested = std::find(suggested[j].begin(), suggested[j].end(), i) != suggested[j].end();
            take[i] = (was_suggested && uc < p.consumption) || ub < p.browse;
        }
        double gained = 0.0;
        for (std::size_t i = 0; i < n_items; ++i) {
            if (!take[i]) continue;
            w.repo->append(make_event(w, Action::download, w.cohort[j].id, w.items[i]));
            gained += w.quality[i];
            ++out.downloads;
        }
        w.cohort[j].ability += p.boost * gained;
    }

    // Final exam.
    std::size_t passed = 0;
    long long grade_sum = 0;
    for (std::size_t j = 0; j < w.cohort.size(); ++j) {
        Stream rng(derive_seed(p.seed, kExam, sem, j));
        const double score = w.cohort[j].ability + p.exam_noise * rng.normal();
        int grade = kMinGrade;
        if (score >= p.exam_difficulty) {
            grade = std::min(kMaxGrade, 6 + static_cast<int>(std::floor((score - p.exam_difficulty) / 0.5)));
            ++passed;
        }
        grade_sum += grade;
        w.repo->append(make_event(w, Action::exam, w.cohort[j].id, std::nullopt, ExamPayload{grade}));
    }
    w.repo->append(make_event(w, Action::semester_close, w.lecturer));

    const double n = static_cast<double>(w.cohort.size());
    out.pass_rate = static_cast<double>(passed) / n;
    out.mean_grade = static_cast<double>(grade_sum) / n;
    out.last_seq = w.repo->size();

    w.semester = w.semester.next();
    ++w.semester_index;
    w.clock.ms += 86400000;
    draw_cohort(w);
    return out;
}

SimRun simulate(const CohortParams& params) {
    World w = generate_cohort(params);
    SimRun run;
    run.report.seed = params.seed;
    run.report.policy = params.policy;
    for (int s = 0; s < params.semesters; ++s) run.report.semesters.push_back(run_semester(w, params.policy));
    for (const auto& o : run.report.semesters) {
        run.report.pass_rate += o.pass_rate;
        run.report.mean_grade += o.mean_grade;
    }
    run.report.pass_rate /= static_cast<double>(params.semesters);
    run.report.mean_grade /= static_cast<double>(params.semesters);
    run.events = w.repo->read([](const RepositoryState&, std::span<const EventRecord> log) {
        return std::vector<EventRecord>(log.begin(), log.end());
    });
    return run;
}

ComparisonReport compare_policies(const CohortParams& params, int n_seeds) {
    if (n_seeds < 1) throw ArgumentError("n_seeds must be >= 1");
    params.validate();
    ComparisonReport report;
    report.params = params;
    std::vector<double> d_random, d_none;
    std::array<double, 3> pass_sum{}, grade_sum{};
    for (int i = 0; i < n_seeds; ++i) {
        SeedRow row;
        row.seed = params.seed + static_cast<std::uint64_t>(i);
        for (std::size_t k = 0; k < 3; ++k) {
            CohortParams p = params;
            p.seed = row.seed;
            p.policy = kAllPolicies[k];
            const auto run = simulate(p);
            pass_sum[k] += run.report.pass_rate;
            grade_sum[k] += run.report.mean_grade;
            (k == 0 ? row.adaptive : k == 1 ? row.random : row.none) = run.report.pass_rate;
        }
        d_random.push_back(row.adaptive - row.random);
        d_none.push_back(row.adaptive - row.none);
        report.seeds.push_back(row);
    }
    for (std::size_t k = 0; k < 3; ++k)
        report.policies.push_back({kAllPolicies[k], pass_sum[k] / n_seeds, grade_sum[k] / n_seeds});

    auto mean_sd = [](const std::vector<double>& v, double& mean, double& sd) {
        mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    };
    mean_sd(d_random, report.margin_adaptive_random, report.sd_adaptive_random);
    mean_sd(d_none, report.margin_adaptive_none, report.sd_adaptive_none);
    return report;
}

std::string to_csv(const SimReport& r) {
    std::string out = "seed,policy,semester,pass_rate,mean_grade,suggest_events,downloads\n";
    for (const auto& s : r.semesters) {
        out += std::to_string(r.seed) + "," + std::string(to_string(r.policy)) + "," + s.semester.str() + "," +
               format_real(s.pass_rate) + "," + format_real(s.mean_grade) + "," + std::to_string(s.suggest_events) +
               "," + std::to_string(s.downloads) + "\n";
    }
    return out;
}

std::string to_csv(const ComparisonReport& r) {
    std::string out = "seed,adaptive,random,none,adaptive_minus_random,adaptive_minus_none\n";
    for (const auto& s : r.seeds) {
        out += std::to_string(s.seed) + "," + format_real(s.adaptive) + "," + format_real(s.random) + "," +
               format_real(s.none) + "," + format_real(s.adaptive - s.random) + "," + format_real(s.adaptive - s.none) +
               "\n";
    }
    return out;
}

std::string to_table(const SimReport& r) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "seed %llu, policy %s\n", static_cast<unsigned long long>(r.seed),
                  std::string(to_string(r.policy)).c_str());
    out += buf;
    out += "semester   pass_rate  mean_grade  suggests  downloads\n";
    for (const auto& s : r.semesters) {
        std::snprintf(buf, sizeof buf, "%-9s  %9.4f  %10.4f  %8llu  %9llu\n", s.semester.str().c_str(), s.pass_rate,
                      s.mean_grade, static_cast<unsigned long long>(s.suggest_events),
                      static_cast<unsigned long long>(s.downloads));
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "overall    %9.4f  %10.4f\n", r.pass_rate, r.mean_grade);
    out += buf;
    return out;
}

std::string to_table(const ComparisonReport& r) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu seeds from %llu, boost %g\n", r.seeds.size(),
                  static_cast<unsigned long long>(r.params.seed), r.params.boost);
    out += buf;
    out += "policy     pass_rate  mean_grade\n";
    for (const auto& a : r.policies) {
        std::snprintf(buf, sizeof buf, "%-9s  %9.4f  %10.4f\n", std::string(to_string(a.policy)).c_str(),
                      a.mean_pass_rate, a.mean_grade);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "adaptive - random: %+.4f (sd %.4f)\nadaptive - none:   %+.4f (sd %.4f)\n",
                  r.margin_adaptive_random, r.sd_adaptive_random, r.margin_adaptive_none, r.sd_adaptive_none);
    out += buf;
    return out;
}

}  // namespace aels::sim
