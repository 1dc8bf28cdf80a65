#pragma once
// Seeded synthetic-cohort simulator for the adaptation loop.
//
// Each semester a fresh cohort enrolls, sits a mid-term test (task i answered
// correctly with probability logistic(ability - difficulty_i)), is estimated by
// the fuzzy expert system, receives suggestions according to the policy,
// downloads some of them (plus a little unprompted browsing), gains
// boost * quality per downloaded item, and sits the final exam
// (score = ability + N(0, exam_noise); pass iff score >= exam_difficulty).
// The semester is then closed, which rebuilds the rank table.
//
// Randomness: every draw comes from std::mt19937_64 streams seeded with
// SplitMix64(seed, purpose, semester, student). Normals use Box-Muller. Draws
// are keyed by purpose rather than consumed from a shared stream, so changing
// the policy never shifts the exam noise or test outcomes of anyone.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "aels/adaptation.hpp"
#include "aels/repository.hpp"

namespace aels::sim {

enum class Policy { adaptive, random, none };

inline constexpr Policy kAllPolicies[] = {Policy::adaptive, Policy::random, Policy::none};

std::string_view to_string(Policy policy);
Policy parse_policy(std::string_view text);

struct CohortParams {
    std::uint64_t seed = 42;
    int students = 200;  // per semester cohort
    int items = 10;
    int semesters = 4;
    double ability_mean = 0.0;
    double ability_sd = 1.0;
    std::vector<double> content_quality;  // empty: drawn U(0, 1) per item
    double boost = 0.5;
    double exam_difficulty = 0.5;
    Policy policy = Policy::adaptive;

    int test_tasks = 10;
    double consumption = 0.7;  // probability a suggested item is downloaded
    double browse = 0.05;      // probability of an unprompted download per item
    double exam_noise = 0.5;
    int k = 3;
    Defuzzifier method = Defuzzifier::maximum;

    // Throws ArgumentError on invalid values.
    void validate() const;
};

// Deterministic random source.
class Stream {
public:
    explicit Stream(std::uint64_t seed);
    std::uint64_t next();
    double uniform();  // [0, 1), 53-bit resolution
    double normal();   // Box-Muller, standard normal

private:
    std::mt19937_64 engine_;
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t semester, std::uint64_t student);

struct Student {
    StudentId id;
    double ability = 0.0;
};

struct World {
    CohortParams params;
    CourseId course{"SIM101"};
    UserId lecturer{"lecturer-1"};
    SemesterId semester{"2024-S1"};
    int semester_index = 0;
    std::vector<double> quality;          // per item
    std::vector<ContentId> items;
    std::vector<double> task_difficulty;  // mid-term test
    std::vector<Student> cohort;          // current semester's students
    std::unique_ptr<Repository> repo;
    std::unique_ptr<AdaptiveEngine> engine;
    Timestamp clock{1704067200000};  // 2024-01-01T00:00:00Z

    Timestamp tick();
};

struct SemesterOutcome {
    SemesterId semester;
    double pass_rate = 0.0;
    double mean_grade = 0.0;
    std::uint64_t suggest_events = 0;
    std::uint64_t downloads = 0;
    std::uint64_t first_seq = 0;  // events appended this semester: [first_seq, last_seq]
    std::uint64_t last_seq = 0;
};

// Builds the catalog (uploaded and approved through the repository) and the
// first cohort. Throws ArgumentError for invalid params.
World generate_cohort(const CohortParams& params);

// Plays one semester and advances the world to the next cohort.
SemesterOutcome run_semester(World& world, Policy policy);

struct SimReport {
    std::uint64_t seed = 0;
    Policy policy = Policy::adaptive;
    std::vector<SemesterOutcome> semesters;
    double pass_rate = 0.0;  // mean over semesters
    double mean_grade = 0.0;
};

struct SimRun {
    SimReport report;
    std::vector<EventRecord> events;
};

SimRun simulate(const CohortParams& params);

struct PolicyAggregate {
    Policy policy = Policy::adaptive;
    double mean_pass_rate = 0.0;
    double mean_grade = 0.0;
};

struct SeedRow {
    std::uint64_t seed = 0;
    double adaptive = 0.0;
    double random = 0.0;
    double none = 0.0;
};

struct ComparisonReport {
    CohortParams params;
    std::vector<SeedRow> seeds;
    std::vector<PolicyAggregate> policies;
    double margin_adaptive_random = 0.0;  // mean paired difference of pass rates
    double margin_adaptive_none = 0.0;
    double sd_adaptive_random = 0.0;      // sample sd of the paired differences
    double sd_adaptive_none = 0.0;
};

// Seeds params.seed, params.seed + 1, ... ; every policy sees the same seeds.
ComparisonReport compare_policies(const CohortParams& params, int n_seeds);

std::string to_csv(const SimReport& report);
std::string to_csv(const ComparisonReport& report);
std::string to_table(const SimReport& report);
std::string to_table(const ComparisonReport& report);

}  // namespace aels::sim
