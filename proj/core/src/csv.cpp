#include "lsqtl/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "lsqtl/error.hpp"

namespace lsqtl::csv {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos
                                                                             : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ParseError("missing column '" + std::string(name) + "' in header", 1);
}

Table read(std::istream& in) {
  Table table;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.find('"') != std::string_view::npos) {
      throw ParseError("quoted fields are not supported", number);
    }
    if (!have_header) {
      if (number == 1 && view.size() >= 3 && view.substr(0, 3) == "\xEF\xBB\xBF") {
        table.header = split(view.substr(3));
      } else {
        table.header = split(view);
      }
      have_header = true;
      continue;
    }
    Row row{number, split(view)};
    if (row.fields.size() != table.header.size()) {
      throw ParseError("expected " + std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(row.fields.size()),
                       number);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("empty file, header expected", 0);
  return table;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  try {
    return read(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

double parse_double(std::string_view field, std::size_t line, std::string_view what) {
  double value = 0.0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError("invalid " + std::string(what) + " '" + std::string(field) + "'", line);
  }
  return value;
}

long long parse_int(std::string_view field, std::size_t line, std::string_view what) {
  long long value = 0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw ParseError("invalid " + std::string(what) + " '" + std::string(field) + "'", line);
  }
  return value;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace lsqtl::csv
