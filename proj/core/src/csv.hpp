#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biomauth/data.hpp"

namespace biomauth::detail {

/// Splits one CSV line on commas. Double-quoted fields may contain commas
/// and doubled quotes.
std::vector<std::string> split_csv_line(std::string_view line);

std::string_view trim(std::string_view s);

/// Locale-independent parse of the whole cell. Accepts nan/inf spellings so
/// callers can report them as validation failures rather than parse errors.
std::optional<double> parse_double(std::string_view cell);

/// Integer ids; integral floating spellings such as "12.0" are accepted.
std::optional<std::int64_t> parse_integer(std::string_view cell);

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

void emit_warning(const WarningSink& warn, std::string_view message);

}  // namespace biomauth::detail
