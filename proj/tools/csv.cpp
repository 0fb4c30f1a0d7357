#include "csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <map>

namespace osod::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool blank(std::string_view line) { return trim(line).empty(); }

}  // namespace

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto comma = line.find(',');
    out.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line,
                    std::string_view column) {
  const std::string text(field);
  if (text.empty()) {
    throw InputError(line, "empty value in column '" + std::string(column) + "'");
  }
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
    throw InputError(line, "'" + text + "' is not a number (column '" +
                               std::string(column) + "')");
  }
  return v;
}

PopulationFile read_population(std::istream& in) {
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!blank(line)) break;
  }
  if (blank(line)) throw InputError(0, "input is empty");

  std::map<std::string, std::size_t> column;
  const auto header = split_fields(line);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!column.emplace(std::string(header[c]), c).second) {
      throw InputError(line_number, "duplicate column '" + std::string(header[c]) + "'");
    }
  }
  if (!column.count("id")) {
    throw InputError(line_number, "header has no 'id' column");
  }
  if (!column.count("pi") && !column.count("x")) {
    throw InputError(line_number, "header needs a 'pi' or an 'x' column");
  }

  PopulationFile file;
  const auto numeric = [&](const char* name) -> std::optional<std::size_t> {
    const auto it = column.find(name);
    if (it == column.end()) return std::nullopt;
    return it->second;
  };
  const auto pi_col = numeric("pi");
  const auto x_col = numeric("x");
  const auto y_col = numeric("y");
  if (pi_col) file.pi.emplace();
  if (x_col) file.x.emplace();
  if (y_col) file.y.emplace();

  while (std::getline(in, line)) {
    ++line_number;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw InputError(line_number, "expected " + std::to_string(header.size()) +
                                        " fields, got " +
                                        std::to_string(fields.size()));
    }
    const auto id = fields[column.at("id")];
    if (id.empty()) throw InputError(line_number, "empty id");
    file.ids.emplace_back(id);
    if (pi_col) file.pi->push_back(parse_number(fields[*pi_col], line_number, "pi"));
    if (x_col) file.x->push_back(parse_number(fields[*x_col], line_number, "x"));
    if (y_col) file.y->push_back(parse_number(fields[*y_col], line_number, "y"));
  }
  if (file.ids.empty()) throw InputError(line_number, "no data rows");
  return file;
}

std::optional<StreamUnit> parse_stream_line(std::string_view line,
                                            std::size_t line_number) {
  if (blank(line)) return std::nullopt;
  const auto fields = split_fields(line);
  if (fields.size() != 2) {
    throw InputError(line_number, "expected '<id>,<probability>'");
  }
  if (fields[0] == "id" && (fields[1] == "pi" || fields[1] == "probability")) {
    return std::nullopt;
  }
  if (fields[0].empty()) throw InputError(line_number, "empty id");
  const double p = parse_number(fields[1], line_number, "probability");
  if (p < -1e-9 || p > 1.0 + 1e-9) {
    throw InputError(line_number, "probability " + std::string(fields[1]) +
                                      " is outside [0, 1]");
  }
  return StreamUnit{std::string(fields[0]), p};
}

}  // namespace osod::cli
