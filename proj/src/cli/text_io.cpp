#include "cli/text_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ganeye/error.hpp"

namespace ganeye {

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ParseError(source + ": missing CSV column \"" + std::string(name) + "\"");
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  fields.push_back(std::move(cur));
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
  }
  return fields;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable t;
  t.source = path.string();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields;
    try {
      fields = split_csv_line(line);
    } catch (const ParseError& e) {
      throw ParseError(t.source + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw ParseError(t.source + ": line " + std::to_string(line_no) + ": expected " +
                       std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw ParseError(t.source + ": missing CSV header");
  return t;
}

namespace {

double parse_number(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw ParseError(where + ": \"" + s + "\" is not a finite number");
  }
  return v;
}

}  // namespace

std::vector<double> read_values(const std::filesystem::path& path, std::string_view column) {
  std::vector<double> out;
  if (!column.empty()) {
    const auto t = read_csv(path);
    const auto c = t.column(column);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      out.push_back(parse_number(t.rows[r][c], path.string() + ": row " + std::to_string(r + 2)));
    }
    return out;
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    out.push_back(parse_number(line.substr(b, e - b + 1), path.string() + ": line " + std::to_string(line_no)));
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.flush()) throw IoError("write failure on " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace ganeye
