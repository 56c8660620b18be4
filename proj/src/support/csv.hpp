#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ca::csv {

using Row = std::vector<std::string>;

/// RFC 4180-style quoting: fields containing separator, quote, or
/// newline are wrapped in double quotes with embedded quotes doubled.
std::string escape(std::string_view field);

std::string write_row(const Row& fields);

/// Parses a whole document. Quoted fields may span lines. Rows are not
/// padded; callers validate column counts. Throws ca::Error(parse) on
/// an unterminated quote.
std::vector<Row> parse(std::string_view content);

}  // namespace ca::csv
