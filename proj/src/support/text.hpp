#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ca::text {

std::string trim(std::string_view s);

/// Whitespace-token count; the word-count definition used everywhere
/// (unit lengths, token estimation, context-window screening).
std::size_t word_count(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool contains(std::string_view haystack, std::string_view needle);

std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

/// Shortest round-trip formatting; integral values render without a
/// decimal point so category codes read as written ("1", not "1.0").
std::string format_value(double v);

/// Strict numeric parse: the whole string must be consumed.
std::optional<double> parse_value(std::string_view s);

std::optional<std::int64_t> parse_integer(std::string_view s);

std::string replace_all(std::string s, std::string_view from, std::string_view to);

}  // namespace ca::text
