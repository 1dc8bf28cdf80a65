#include "aels/fes.hpp"

#include <string>

namespace aels::fes {

TestScore score_test(const TestDefinition& def, const TestResponse& resp) {
    if (resp.results.size() != def.size()) {
        throw DimensionError("test '" + def.id() + "' has " + std::to_string(def.size()) +
                             " tasks but the response has " + std::to_string(resp.results.size()) + " results");
    }
    const auto& weights = def.weights();
    double correct = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const int r = resp.results[i];
        if (r != 0 && r != 1) throw DomainError("task result must be 0 or 1, got " + std::to_string(r));
        if (r == 1) correct += weights[i];
    }
    double solved = correct / static_cast<double>(def.size());
    // The weight sum equals n only up to rounding.
    if (solved > 1.0) solved = 1.0;
    return TestScore{solved, 1.0 - solved};
}

FuzzyOutput infer(double solved) {
    if (!(solved >= 0.0 && solved <= 1.0))
        throw DomainError("solved degree " + std::to_string(solved) + " outside [0, 1]");
    return FuzzyOutput{solved, 1.0 - solved};
}

double defuzzify_maximum(const FuzzyOutput& out) noexcept {
    // Peak of s*high is s (at L = 1); peak of m*low is m (at L = 0).
    if (out.s > out.m) return 1.0;
    if (out.m > out.s) return 0.0;
    return 0.5;
}

double defuzzify_centroid(const FuzzyOutput& out) noexcept {
    // int L f(L) dL = s/3 + m/6, int f(L) dL = (s + m)/2
    const double mass = (out.s + out.m) / 2.0;
    if (mass <= 0.0) return 0.5;
    return (out.s / 3.0 + out.m / 6.0) / mass;
}

double defuzzify(const FuzzyOutput& out, Defuzzifier method) noexcept {
    return method == Defuzzifier::maximum ? defuzzify_maximum(out) : defuzzify_centroid(out);
}

SkillEstimate estimate_level(const TestDefinition& def, const TestResponse& resp, Defuzzifier method,
                             Timestamp at) {
    const TestScore score = score_test(def, resp);
    const FuzzyOutput out = infer(score.solved);
    return SkillEstimate{resp.student, def.course(), defuzzify(out, method), score.solved, method, at};
}

}  // namespace aels::fes
