#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ganeye {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws ParseError naming the file otherwise.
  std::size_t column(std::string_view name) const;
  std::string source;
};

/// RFC 4180 style: comma separated, optional double quotes with "" escapes.
/// Every row must have as many fields as the header.
CsvTable read_csv(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(std::string_view line);

/// Numbers from a file: either one value per line (blank lines skipped), or,
/// when `column` is non-empty, one CSV column selected by header name.
std::vector<double> read_values(const std::filesystem::path& path, std::string_view column = {});

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_text_file(const std::filesystem::path& path, std::string_view content);

std::string read_text_file(const std::filesystem::path& path);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace ganeye
