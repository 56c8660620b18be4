#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/codebook.hpp"
#include "core/dataset.hpp"

namespace ca::sampling {

struct SamplingConfig {
  enum class Strategy { probabilistic, rich_range };
  Strategy strategy = Strategy::probabilistic;
  double initial_fraction = 0.15;
  double step = 0.05;
  std::size_t floor = 100;
  std::size_t minority_minimum = 2;
  std::size_t heuristic_cap = 300;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Provisional labels (unit id -> code), typically pilot human codes;
/// ground the minority-class check before a gold standard exists.
using LabelMap = std::map<std::string, double>;

struct SampleAuditEntry {
  double fraction = 0.0;
  std::size_t size = 0;
  std::size_t minority_count = 0;  // labeled instances of the rarest class in-sample
  std::string note;
};

struct SampleResult {
  std::vector<std::string> unit_ids;  // draw order; same seed -> same list
  std::vector<SampleAuditEntry> audit;
  std::string strategy;
  bool pilot_use_only = false;  // rich-range samples; validation ops reject these
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};
SampleResult sample_result_from_json(const nlohmann::json& j);

/// Seeded uniform sampling without replacement. Sample size starts at
/// max(floor, ceil(initial_fraction*N)) and the fraction grows by `step`
/// until the floor and the minority minimum are met or the dataset is
/// exhausted; every expansion lands in the audit trail. Expansion
/// extends the same seeded permutation, so the grown sample is a
/// superset of the smaller one.
SampleResult draw_validation_sample(const model::Dataset& dataset,
                                    const SamplingConfig& config,
                                    const LabelMap* pilot_labels = nullptr);

struct HeuristicSize {
  std::size_t recommended = 0;
  std::string rationale;
};

/// 10% of N, clamped to [100, 300], with a note when the unclamped
/// figure leaves the 100..1250 range reported in the methods literature.
HeuristicSize heuristic_size(std::size_t n);

/// Deliberately includes every category value (>= per_category_minimum
/// of each). Non-probabilistic; the result is flagged pilot-use-only and
/// is meant for coder training and prompt refinement, not validation.
SampleResult rich_range_sample(const model::Dataset& dataset,
                               const model::Variable& variable,
                               const LabelMap& pilot_labels,
                               std::size_t per_category_minimum,
                               std::uint64_t seed);

/// Seeded random pilot draw (default 50 units).
SampleResult pilot_sample(const model::Dataset& dataset, std::size_t n, std::uint64_t seed);

inline constexpr std::size_t kDefaultPilotSize = 50;

}  // namespace ca::sampling
