#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace commentrank {

// RFC 4180: quote when the field contains comma, quote, or newline;
// embedded quotes are doubled.
std::string csv_escape(std::string_view field);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Full-file RFC 4180 parse (quoted fields may span lines).
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

// Deterministic shortest-ish formatting; always the same bytes for the
// same value on a given build.
std::string fmt_double(double v);

}  // namespace commentrank
