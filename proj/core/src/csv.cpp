#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <system_error>

namespace biomauth::detail {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string current;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"') {
      if (in_quotes && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else {
        in_quotes = !in_quotes;
      }
    } else if (c == ',' && !in_quotes) {
      cells.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  cells.push_back(std::move(current));
  return cells;
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view kSpace = " \t\r\n\xEF\xBB\xBF";
  const auto first = s.find_first_not_of(kSpace);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(kSpace);
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view cell) {
  cell = trim(cell);
  if (cell.empty()) return std::nullopt;
  // from_chars rejects a leading '+'.
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

std::optional<std::int64_t> parse_integer(std::string_view cell) {
  cell = trim(cell);
  if (cell.empty()) return std::nullopt;
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec == std::errc{} && ptr == cell.data() + cell.size()) return value;
  const auto as_double = parse_double(cell);
  if (!as_double || !std::isfinite(*as_double) || std::trunc(*as_double) != *as_double ||
      std::fabs(*as_double) > 9.0e15) {
    return std::nullopt;
  }
  return static_cast<std::int64_t>(*as_double);
}

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buffer, ptr);
}

void emit_warning(const WarningSink& warn, std::string_view message) {
  if (warn) {
    warn(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

}  // namespace biomauth::detail
