#pragma once
// Fuzzy expert system for skill-level estimation.
//
// A weighted test response is fuzzified into two complementary degrees,
// solved and mistaken. Two rules map them onto the output variable "level":
//
//   R1: if the test is solved   then the level is high   (high(L) = L)
//   R2: if the test is mistaken then the level is low    (low(L)  = 1 - L)
//
// PRODUCT-SUM inference scales each conclusion by its premise degree and adds
// the scaled sets, so the output membership is f(L) = s*L + m*(1 - L). Since f
// is affine it is kept as the pair (s, m) and defuzzified in closed form.

#include "aels/domain.hpp"

namespace aels::fes {

struct TestScore {
    double solved = 0.0;
    double mistaken = 1.0;
};

// Aggregated output fuzzy set f(L) = s*L + m*(1 - L).
struct FuzzyOutput {
    double s = 0.0;  // truth of "test is solved"
    double m = 1.0;  // truth of "test is mistaken"

    double membership(double level) const noexcept { return s * level + m * (1.0 - level); }
};

// solved = (sum of weights of correctly answered tasks) / n.
// Throws DimensionError on length mismatch, DomainError for entries not in {0, 1}.
TestScore score_test(const TestDefinition& def, const TestResponse& resp);

// Throws DomainError unless solved is in [0, 1].
FuzzyOutput infer(double solved);

// Maximum method: pick the scaled rule output with the larger peak and return
// its argmax (1 for high, 0 for low). A tie returns the midpoint 0.5.
double defuzzify_maximum(const FuzzyOutput& out) noexcept;

// Centre of gravity of f over [0, 1]; equals (s + 1) / 3 when s + m = 1.
double defuzzify_centroid(const FuzzyOutput& out) noexcept;

double defuzzify(const FuzzyOutput& out, Defuzzifier method) noexcept;

SkillEstimate estimate_level(const TestDefinition& def, const TestResponse& resp, Defuzzifier method,
                             Timestamp at);

}  // namespace aels::fes
