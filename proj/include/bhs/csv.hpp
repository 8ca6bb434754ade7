#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace bhs::csv {

struct Record {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
};

/// RFC-4180 reader. A leading UTF-8 BOM is skipped, CRLF and LF are both
/// accepted as record terminators, quoted fields may span lines. Blank lines
/// are skipped. Throws Error(kMalformedRow) on an unterminated quote or on
/// characters between a closing quote and the next delimiter.
std::vector<Record> parse(std::string_view text);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

/// One record terminated by LF.
std::string format_row(const std::vector<std::string>& fields);

}  // namespace bhs::csv
