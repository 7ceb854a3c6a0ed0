#include "csv.hpp"

#include <istream>

#include "ptbcc/error.hpp"

namespace ptbcc::detail {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

CsvRows read_csv(std::istream& source, const std::vector<std::string_view>& header,
                 const char* origin) {
  std::string line;
  std::size_t line_no = 0;

  bool have_header = false;
  while (std::getline(source, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    const auto fields = split_commas(view);
    if (fields != header) {
      std::string expected;
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) expected += ',';
        expected += header[c];
      }
      throw Error(ErrorKind::Format, origin,
                  "malformed header, expected '" + expected + "'", line_no);
    }
    have_header = true;
    break;
  }
  if (!have_header) throw Error(ErrorKind::Format, origin, "missing header");

  CsvRows rows;
  while (std::getline(source, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::Row, origin,
                  "expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()),
                  line_no);
    }
    std::vector<std::string> owned;
    owned.reserve(fields.size());
    for (const auto f : fields) {
      if (f.empty()) throw Error(ErrorKind::Row, origin, "empty field", line_no);
      owned.emplace_back(f);
    }
    rows.emplace_back(line_no, std::move(owned));
  }
  if (rows.empty()) throw Error(ErrorKind::EmptyInput, origin, "no data rows");
  return rows;
}

}  // namespace ptbcc::detail
