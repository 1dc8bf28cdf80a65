#include "aels/canonical.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "aels/domain.hpp"

namespace aels {

std::string format_real(double value) {
    if (!std::isfinite(value)) throw DomainError("cannot serialize a non-finite real");
    if (value == 0.0) value = 0.0;  // fold -0 into 0
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

std::string json_quote(std::string_view text) {
    std::string out;
    out.reserve(text.size() + 2);
    out.push_back('"');
    for (char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(static_cast<unsigned char>(c)));
                    out += buf;
                } else {
                    out.push_back(c);
                }
        }
    }
    out.push_back('"');
    return out;
}

std::string json_array(const std::vector<std::string>& elements) {
    std::string out = "[";
    for (std::size_t i = 0; i < elements.size(); ++i) {
        if (i) out.push_back(',');
        out += elements[i];
    }
    out.push_back(']');
    return out;
}

void CanonicalObject::key(std::string_view k) {
    if (!first_) body_.push_back(',');
    first_ = false;
    body_ += json_quote(k);
    body_.push_back(':');
}

CanonicalObject& CanonicalObject::field(std::string_view k, std::string_view value) {
    key(k);
    body_ += json_quote(value);
    return *this;
}

CanonicalObject& CanonicalObject::field(std::string_view k, std::int64_t value) {
    key(k);
    body_ += std::to_string(value);
    return *this;
}

CanonicalObject& CanonicalObject::field(std::string_view k, std::uint64_t value) {
    key(k);
    body_ += std::to_string(value);
    return *this;
}

CanonicalObject& CanonicalObject::field(std::string_view k, double value) {
    key(k);
    body_ += format_real(value);
    return *this;
}

CanonicalObject& CanonicalObject::field(std::string_view k, bool value) {
    key(k);
    body_ += value ? "true" : "false";
    return *this;
}

CanonicalObject& CanonicalObject::field(std::string_view k, std::optional<double> value) {
    key(k);
    body_ += value ? format_real(*value) : "null";
    return *this;
}

CanonicalObject& CanonicalObject::field(std::string_view k, const std::vector<std::string>& values) {
    std::vector<std::string> quoted;
    quoted.reserve(values.size());
    for (const auto& v : values) quoted.push_back(json_quote(v));
    return raw(k, json_array(quoted));
}

CanonicalObject& CanonicalObject::field(std::string_view k, const std::vector<double>& values) {
    std::vector<std::string> parts;
    parts.reserve(values.size());
    for (double v : values) parts.push_back(format_real(v));
    return raw(k, json_array(parts));
}

CanonicalObject& CanonicalObject::field(std::string_view k, const std::vector<int>& values) {
    std::vector<std::string> parts;
    parts.reserve(values.size());
    for (int v : values) parts.push_back(std::to_string(v));
    return raw(k, json_array(parts));
}

CanonicalObject& CanonicalObject::raw(std::string_view k, std::string_view json_text) {
    key(k);
    body_ += json_text;
    return *this;
}

}  // namespace aels
