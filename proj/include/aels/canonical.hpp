#pragma once
// Canonical text forms shared by snapshots, CSV exports and HTTP/CLI output.
// Field order is fixed by the writer; reals use the shortest text that
// round-trips; lines end in LF.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aels {

// Shortest round-trip decimal form of a finite double ("0.5", "1", "0.5833333333333334").
std::string format_real(double value);

// Minimal JSON-object writer with caller-controlled key order.
class CanonicalObject {
public:
    CanonicalObject& field(std::string_view key, std::string_view value);
    CanonicalObject& field(std::string_view key, const char* value) { return field(key, std::string_view(value)); }
    CanonicalObject& field(std::string_view key, const std::string& value) { return field(key, std::string_view(value)); }
    CanonicalObject& field(std::string_view key, std::int64_t value);
    CanonicalObject& field(std::string_view key, std::uint64_t value);
    CanonicalObject& field(std::string_view key, int value) { return field(key, static_cast<std::int64_t>(value)); }
    CanonicalObject& field(std::string_view key, double value);
    CanonicalObject& field(std::string_view key, bool value);
    CanonicalObject& field(std::string_view key, std::optional<double> value);
    CanonicalObject& field(std::string_view key, const std::vector<std::string>& values);
    CanonicalObject& field(std::string_view key, const std::vector<double>& values);
    CanonicalObject& field(std::string_view key, const std::vector<int>& values);
    // value must already be canonical JSON text.
    CanonicalObject& raw(std::string_view key, std::string_view json_text);

    std::string str() const { return body_ + "}"; }

private:
    void key(std::string_view k);
    std::string body_ = "{";
    bool first_ = true;
};

std::string json_quote(std::string_view text);

// Joins pre-rendered JSON values into an array.
std::string json_array(const std::vector<std::string>& elements);

}  // namespace aels
