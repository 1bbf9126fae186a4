#pragma once

// Minimal RFC-4180-style CSV reading/writing shared by the loaders.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace defirisk::csv {

struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// Reads the whole file; checks the header matches `expected_header`
/// (whitespace around fields ignored). Blank lines are skipped.
std::vector<Row> read(const std::filesystem::path& path, const std::vector<std::string>& expected_header);

std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

/// Shortest representation that round-trips through parse_double.
std::string format_double(double v);
std::optional<double> parse_double(std::string_view text);

std::string trim(std::string_view s);

/// "<path>:<line>" for error messages.
std::string where(const std::filesystem::path& path, std::size_t line);

/// Writes `content` to `path` through a temporary file and a rename.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace defirisk::csv
