#pragma once
// Bulk ingestion of event-lines files and grades CSV into a repository.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "aels/repository.hpp"

namespace aels {

enum class IngestFormat { event_lines, grades_csv };

// "event-lines" or "grades-csv"; anything else is an ArgumentError.
IngestFormat parse_ingest_format(std::string_view tag);

struct LineIssue {
    std::uint64_t line = 0;
    std::string reason;
};

struct IngestReport {
    std::uint64_t accepted = 0;
    std::vector<LineIssue> rejected;
    std::vector<LineIssue> flagged;  // accepted, but worth a look (e.g. grade overwritten)
};

// Appends valid records in file order; invalid ones are reported and skipped.
// Throws IoError if the file cannot be read.
IngestReport ingest(Repository& repo, const std::filesystem::path& path, IngestFormat format);

std::string to_canonical_json(const IngestReport& report);

}  // namespace aels
