#pragma once

// Shared builders for test inputs: the tweet-sentiment codebook used by
// the golden prompt tests, synthetic datasets, direct annotation-matrix
// construction, and unique scratch directories.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/annotations.hpp"
#include "core/codebook.hpp"
#include "core/dataset.hpp"
#include "support/text.hpp"

namespace fixtures {

// Nominal sentiment variable with codes 0/1/2 and tweet-flavoured wording.
inline ca::model::Codebook borderlands_codebook() {
  ca::model::Codebook codebook;
  codebook.version = "1.0";
  ca::model::Variable variable;
  variable.name = "sentiment";
  variable.scale = ca::model::MeasurementScale::nominal;
  variable.instruction =
      "You will be given individual tweets about the computer game Borderlands. "
      "Your task is to determine the tweet's sentiment toward the game using the "
      "following coding scheme.";
  variable.categories = {
      {0, "Negative",
       "The tweet expresses dissatisfaction, criticism, or dislike toward Borderlands",
       {"Worst game of the year, what a letdown."}},
      {1, "Positive",
       "The tweet expresses praise, enjoyment, or support for Borderlands",
       {"Borderlands 3 is an absolute blast!"}},
      {2, "Neutral",
       "The tweet neither clearly praises nor criticizes Borderlands, or expresses "
       "mixed or unrelated opinions",
       {"Borderlands is on sale again this week."}},
  };
  codebook.variables.push_back(std::move(variable));
  return codebook;
}

inline ca::model::Variable sentiment_variable() {
  return borderlands_codebook().variables.front();
}

inline constexpr const char* kSentimentSystem =
    "You are a research assistant tasked with analyzing sentiment in texts.";

// n units "u000".."u..."; text per unit from the callback (default: a
// distinct headline per unit).
inline ca::model::Dataset make_dataset(
    std::size_t n, const std::function<std::string(std::size_t)>& text_for = {}) {
  std::vector<ca::model::CodingUnit> units;
  units.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ca::model::CodingUnit unit;
    unit.id = "u" + std::string(i < 10 ? "00" : i < 100 ? "0" : "") + std::to_string(i);
    unit.text = text_for ? text_for(i) : ("unit " + std::to_string(i) + " body text");
    units.push_back(std::move(unit));
  }
  return ca::model::Dataset::from_units(std::move(units));
}

// Grid rows = units, columns = coders; nullopt = MISSING. Coders are
// named c0..cK-1 and units u000.. so ids are already in sorted order.
inline ca::model::AnnotationMatrix matrix_from(
    const std::vector<std::vector<std::optional<double>>>& rows,
    const std::string& variable = "v") {
  const std::size_t coder_count = rows.empty() ? 0 : rows.front().size();
  std::vector<std::string> coder_ids;
  for (std::size_t c = 0; c < coder_count; ++c) coder_ids.push_back("c" + std::to_string(c));
  std::vector<std::string> unit_ids;
  for (std::size_t u = 0; u < rows.size(); ++u) {
    unit_ids.push_back("u" + std::string(u < 10 ? "00" : u < 100 ? "0" : "") +
                       std::to_string(u));
  }
  ca::model::AnnotationMatrix matrix(variable, coder_ids, unit_ids);
  for (std::size_t u = 0; u < rows.size(); ++u)
    for (std::size_t c = 0; c < rows[u].size(); ++c) matrix.set_cell(u, c, rows[u][c]);
  return matrix;
}

// Human-panel annotation rows for one variable; coder ids as given,
// values[coder][unit]; nullopt cells are skipped (absent, not MISSING).
inline ca::model::AnnotationList annotations_from_grid(
    const std::string& variable, const std::vector<std::string>& coder_ids,
    const std::vector<std::string>& unit_ids,
    const std::vector<std::vector<std::optional<double>>>& values_by_coder) {
  ca::model::AnnotationList annotations;
  for (std::size_t c = 0; c < coder_ids.size(); ++c) {
    for (std::size_t u = 0; u < unit_ids.size(); ++u) {
      const auto& cell = values_by_coder[c][u];
      if (!cell.has_value()) continue;
      ca::model::Annotation a;
      a.unit_id = unit_ids[u];
      a.variable = variable;
      a.coder = {coder_ids[c], ""};
      a.value = cell;
      annotations.push_back(std::move(a));
    }
  }
  return annotations;
}

// Fresh scratch directory under the system temp root; wiped on creation
// so reruns start clean.
inline std::filesystem::path temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("ca_tests_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
