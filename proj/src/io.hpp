#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace courserec {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, flushes it, then renames it over
// `path`. Readers see either the old or the new content.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// The two halves of write_file_atomic, for publishing several files together.
std::filesystem::path write_temp_file(const std::filesystem::path& path, std::string_view content);
void replace_file(const std::filesystem::path& tmp, const std::filesystem::path& path);

// Shortest representation that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);
long parse_long(std::string_view s);

}  // namespace courserec
