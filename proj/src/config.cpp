#include "aels/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace aels {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& err) {
        throw ArgumentError(std::string("malformed ") + what + ": " + err.what());
    }
}

ranking::MetricWeights weights_from(const json& j) {
    if (!j.is_object()) throw ArgumentError("weights must be an object of metric name to weight");
    std::array<double, ranking::kMetricCount> w{};
    for (const auto& [name, value] : j.items()) {
        const auto metric = ranking::parse_metric(name);
        if (!metric) throw ArgumentError("unknown metric '" + name + "'");
        if (!value.is_number()) throw ArgumentError("weight for '" + name + "' must be a number");
        w[static_cast<std::size_t>(*metric)] = value.get<double>();
    }
    return ranking::MetricWeights(w);
}

TestDefinition definition_from(const json& j) {
    if (!j.is_object()) throw ArgumentError("test definition must be an object");
    try {
        const auto id = j.at("id").get<std::string>();
        CourseId course(j.at("course").get<std::string>());
        if (j.contains("weights")) return TestDefinition(id, course, j.at("weights").get<std::vector<double>>());
        const auto n = j.at("n").get<long long>();
        if (n <= 0) throw ArgumentError("test '" + id + "' needs a positive task count");
        return TestDefinition::uniform(id, course, static_cast<std::size_t>(n));
    } catch (const json::exception& err) {
        throw ArgumentError(std::string("malformed test definition: ") + err.what());
    }
}

}  // namespace

void ServiceConfig::validate() const {
    if (port < 1 || port > 65535) throw ArgumentError("port must lie in [1, 65535]");
    if (k <= 0) throw ArgumentError("k must be positive");
    if (pass_threshold < kMinGrade || pass_threshold > kMaxGrade)
        throw ArgumentError("pass threshold must lie in [5, 10]");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ServiceConfig load_config(const std::filesystem::path& path) {
    const json j = parse_json(read_file(path), "config");
    if (!j.is_object()) throw ArgumentError("config must be an object");
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_relative() ? base / fp : fp;
    };
    ServiceConfig cfg;
    try {
        if (j.contains("store")) cfg.store = resolve(j.at("store").get<std::string>());
        if (j.contains("port")) cfg.port = j.at("port").get<int>();
        if (j.contains("method")) cfg.method = parse_defuzzifier(j.at("method").get<std::string>());
        if (j.contains("weights")) cfg.weights = weights_from(j.at("weights"));
        if (j.contains("k")) cfg.k = j.at("k").get<int>();
        if (j.contains("pass_threshold")) cfg.pass_threshold = j.at("pass_threshold").get<int>();
        if (j.contains("tests")) cfg.tests = resolve(j.at("tests").get<std::string>());
    } catch (const json::exception& err) {
        throw ArgumentError(std::string("malformed config: ") + err.what());
    }
    cfg.validate();
    return cfg;
}

ranking::MetricWeights parse_metric_weights(std::string_view json_text) {
    return weights_from(parse_json(json_text, "weights"));
}

TestDefinition parse_test_definition(std::string_view json_text) {
    return definition_from(parse_json(json_text, "test definition"));
}

TestResponse parse_test_response(std::string_view json_text) {
    const json j = parse_json(json_text, "test response");
    if (!j.is_object()) throw ArgumentError("test response must be an object");
    try {
        TestResponse r;
        r.test = j.at("test").get<std::string>();
        r.student = StudentId(j.at("student").get<std::string>());
        r.results = j.at("results").get<std::vector<int>>();
        return r;
    } catch (const json::exception& err) {
        throw ArgumentError(std::string("malformed test response: ") + err.what());
    }
}

std::map<std::string, TestDefinition> load_test_definitions(const std::filesystem::path& path) {
    const json j = parse_json(read_file(path), "test definitions");
    std::map<std::string, TestDefinition> out;
    auto add = [&](const json& d) {
        auto def = definition_from(d);
        const auto id = def.id();
        out.insert_or_assign(id, std::move(def));
    };
    if (j.is_array()) {
        for (const auto& d : j) add(d);
    } else {
        add(j);
    }
    return out;
}

}  // namespace aels
