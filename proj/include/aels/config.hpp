#pragma once
// Service configuration and the JSON record formats for test definitions and
// responses shared by the CLI and the HTTP API.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aels/adaptation.hpp"
#include "aels/domain.hpp"
#include "aels/ranking.hpp"
#include "aels/repository.hpp"

namespace aels {

struct ServiceConfig {
    std::filesystem::path store = "aels-events.log";
    int port = 8080;
    Defuzzifier method = Defuzzifier::maximum;
    ranking::MetricWeights weights;
    int k = 3;
    int pass_threshold = kDefaultPassThreshold;
    std::optional<std::filesystem::path> tests;  // file of test definitions

    // Throws ArgumentError.
    void validate() const;

    RepositoryConfig repository_config() const { return RepositoryConfig{pass_threshold, weights}; }
    EngineConfig engine_config() const { return EngineConfig{method, k}; }
};

// Reads a JSON config file. Keys: store, port, method, weights (object of
// metric name -> weight; missing metrics are 0), k, pass_threshold, tests.
// Relative paths resolve against the config file's directory.
ServiceConfig load_config(const std::filesystem::path& path);

ranking::MetricWeights parse_metric_weights(std::string_view json_text);

// {"id": "...", "course": "...", "weights": [..]} or {"id", "course", "n": N} for uniform weights.
TestDefinition parse_test_definition(std::string_view json_text);
// {"test": "...", "student": "...", "results": [0, 1, ...]}
TestResponse parse_test_response(std::string_view json_text);

// A single definition object or an array of them.
std::map<std::string, TestDefinition> load_test_definitions(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

}  // namespace aels
