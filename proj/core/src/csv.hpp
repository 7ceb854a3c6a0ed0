#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ptbcc::detail {

/// (1-based file line, trimmed non-empty fields)
using CsvRows = std::vector<std::pair<std::size_t, std::vector<std::string>>>;

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_commas(std::string_view line);

/// Reads a CSV whose first non-blank line must equal `header`. Blank lines
/// are skipped; every data row must have header.size() non-empty fields.
CsvRows read_csv(std::istream& source, const std::vector<std::string_view>& header,
                 const char* origin);

}  // namespace ptbcc::detail
