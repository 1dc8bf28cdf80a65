#include "aels/domain.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace aels {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Howard Hinnant's civil-calendar conversions (proleptic Gregorian).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2);
}

int parse_digits(std::string_view s, std::size_t pos, std::size_t count, std::string_view whole) {
    if (pos + count > s.size()) throw ArgumentError("malformed timestamp: " + std::string(whole));
    int v = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            throw ArgumentError("malformed timestamp: " + std::string(whole));
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

void expect_char(std::string_view s, std::size_t pos, char c) {
    if (pos >= s.size() || s[pos] != c) throw ArgumentError("malformed timestamp: " + std::string(s));
}

}  // namespace

void check_identifier(std::string_view value, std::string_view what) {
    if (value.empty()) throw ArgumentError(std::string(what) + " must be non-empty");
    if (is_space(value.front()) || is_space(value.back()))
        throw ArgumentError(std::string(what) + " has surrounding whitespace: '" + std::string(value) + "'");
}

SemesterId::SemesterId(std::string value) : value_(std::move(value)) {
    const bool ok = value_.size() == 7 && std::isdigit(static_cast<unsigned char>(value_[0])) &&
                    std::isdigit(static_cast<unsigned char>(value_[1])) &&
                    std::isdigit(static_cast<unsigned char>(value_[2])) &&
                    std::isdigit(static_cast<unsigned char>(value_[3])) && value_[4] == '-' &&
                    value_[5] == 'S' && (value_[6] == '1' || value_[6] == '2');
    if (!ok) throw ArgumentError("semester id must look like YYYY-S1 or YYYY-S2, got '" + value_ + "'");
}

int SemesterId::year() const { return std::stoi(value_.substr(0, 4)); }
int SemesterId::term() const { return value_[6] - '0'; }

SemesterId SemesterId::next() const {
    char buf[16];
    if (term() == 1)
        std::snprintf(buf, sizeof buf, "%04d-S2", year());
    else
        std::snprintf(buf, sizeof buf, "%04d-S1", year() + 1);
    return SemesterId(buf);
}

Timestamp Timestamp::parse(std::string_view s) {
    const int year = parse_digits(s, 0, 4, s);
    expect_char(s, 4, '-');
    const int month = parse_digits(s, 5, 2, s);
    expect_char(s, 7, '-');
    const int day = parse_digits(s, 8, 2, s);
    expect_char(s, 10, 'T');
    const int hour = parse_digits(s, 11, 2, s);
    expect_char(s, 13, ':');
    const int minute = parse_digits(s, 14, 2, s);
    expect_char(s, 16, ':');
    const int second = parse_digits(s, 17, 2, s);
    std::size_t pos = 19;
    int millis = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        std::size_t digits = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            if (digits < 3) millis = millis * 10 + (s[pos] - '0');
            ++digits;
            ++pos;
        }
        if (digits == 0) throw ArgumentError("malformed timestamp: " + std::string(s));
        for (std::size_t i = digits; i < 3; ++i) millis *= 10;
    }
    expect_char(s, pos, 'Z');
    if (pos + 1 != s.size()) throw ArgumentError("malformed timestamp: " + std::string(s));
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
        throw ArgumentError("timestamp field out of range: " + std::string(s));

    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    const std::int64_t secs = days * 86400 + hour * 3600 + minute * 60 + second;
    return Timestamp{secs * 1000 + millis};
}

std::string Timestamp::iso() const {
    std::int64_t days = ms / 86400000;
    std::int64_t rem = ms % 86400000;
    if (rem < 0) {
        rem += 86400000;
        --days;
    }
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    const auto h = rem / 3600000;
    const auto mi = (rem / 60000) % 60;
    const auto sec = (rem / 1000) % 60;
    const auto milli = rem % 1000;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", static_cast<long long>(y), m, d,
                  static_cast<long long>(h), static_cast<long long>(mi), static_cast<long long>(sec),
                  static_cast<long long>(milli));
    return buf;
}

std::string_view to_string(ContentKind kind) {
    switch (kind) {
        case ContentKind::supplement: return "supplement";
        case ContentKind::book: return "book";
        case ContentKind::article: return "article";
    }
    return "supplement";
}

ContentKind parse_content_kind(std::string_view text) {
    if (text == "supplement") return ContentKind::supplement;
    if (text == "book") return ContentKind::book;
    if (text == "article") return ContentKind::article;
    throw ArgumentError("unknown content kind '" + std::string(text) + "'");
}

GradeRecord GradeRecord::make(StudentId student, CourseId course, SemesterId semester, int grade,
                              int pass_threshold) {
    if (grade < kMinGrade || grade > kMaxGrade)
        throw DomainError("grade " + std::to_string(grade) + " outside [5, 10]");
    return GradeRecord{std::move(student), std::move(course), std::move(semester), grade, grade >= pass_threshold};
}

TestDefinition::TestDefinition(std::string id, CourseId course, std::vector<double> weights)
    : id_(std::move(id)), course_(std::move(course)), weights_(std::move(weights)) {
    check_identifier(id_, "test id");
    if (weights_.empty()) throw ArgumentError("test '" + id_ + "' has no tasks");
    for (double k : weights_) {
        if (!(k > 0.0) || !std::isfinite(k))
            throw ArgumentError("test '" + id_ + "' has a non-positive task weight");
    }
    const double n = static_cast<double>(weights_.size());
    const double sum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (std::abs(sum - n) > kWeightSumTolerance) {
        const double scale = n / sum;
        for (double& k : weights_) k *= scale;
    }
}

TestDefinition TestDefinition::uniform(std::string id, CourseId course, std::size_t n) {
    return TestDefinition(std::move(id), std::move(course), std::vector<double>(n, 1.0));
}

std::string_view to_string(Defuzzifier method) {
    return method == Defuzzifier::maximum ? "maximum" : "centroid";
}

Defuzzifier parse_defuzzifier(std::string_view text) {
    if (text == "maximum") return Defuzzifier::maximum;
    if (text == "centroid") return Defuzzifier::centroid;
    throw ArgumentError("unknown defuzzifier '" + std::string(text) + "' (expected maximum or centroid)");
}

}  // namespace aels
