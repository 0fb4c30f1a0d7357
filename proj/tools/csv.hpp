#ifndef OSOD_TOOLS_CSV_HPP
#define OSOD_TOOLS_CSV_HPP

#include <cstddef>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "osod/stream.hpp"

namespace osod::cli {

/// Malformed input, with the 1-based line it was found on (0 when the
/// problem is not tied to a line).
class InputError : public std::runtime_error {
 public:
  InputError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Columns read from a population file. The header must name `id` and
/// either `pi` or `x`; `y` is optional. Other columns are ignored.
struct PopulationFile {
  std::vector<std::string> ids;
  std::optional<std::vector<double>> pi;
  std::optional<std::vector<double>> x;
  std::optional<std::vector<double>> y;
};

std::vector<std::string_view> split_fields(std::string_view line);
double parse_number(std::string_view field, std::size_t line,
                    std::string_view column);

PopulationFile read_population(std::istream& in);

/// One stream record, `<id>,<probability>`. Returns nothing for blank
/// lines and for an `id,pi` header.
std::optional<StreamUnit> parse_stream_line(std::string_view line,
                                            std::size_t line_number);

}  // namespace osod::cli

#endif  // OSOD_TOOLS_CSV_HPP
