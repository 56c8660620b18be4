#include "sampling/sampling.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "support/errors.hpp"
#include "support/rng.hpp"
#include "support/text.hpp"

namespace ca::sampling {

namespace {

// Smallest per-class count inside the sample, measured over the classes
// present in the full provisional distribution.
std::size_t minority_count_in(const std::vector<std::string>& sample_ids,
                              const LabelMap& labels,
                              const std::map<double, std::size_t>& class_counts) {
  if (class_counts.empty()) return 0;
  std::map<double, std::size_t> in_sample;
  for (const auto& [value, count] : class_counts) {
    (void)count;
    in_sample[value] = 0;
  }
  for (const auto& id : sample_ids) {
    auto it = labels.find(id);
    if (it == labels.end()) continue;
    in_sample[it->second] += 1;
  }
  std::size_t minimum = in_sample.begin()->second;
  for (const auto& [value, count] : in_sample) {
    (void)value;
    minimum = std::min(minimum, count);
  }
  return minimum;
}

}  // namespace

void SamplingConfig::validate() const {
  if (!(initial_fraction > 0.0) || initial_fraction > 1.0)
    throw Error(ErrorCode::invalid_argument,
                         "initial_fraction must be in (0, 1]");
  if (!(step > 0.0))
    throw Error(ErrorCode::invalid_argument, "step must be positive");
  if (floor == 0)
    throw Error(ErrorCode::invalid_argument, "floor must be at least 1");
}

nlohmann::json SampleResult::to_json() const {
  nlohmann::ordered_json j;
  j["strategy"] = strategy;
  j["pilot_use_only"] = pilot_use_only;
  j["unit_ids"] = unit_ids;
  nlohmann::ordered_json audit_json = nlohmann::ordered_json::array();
  for (const auto& entry : audit) {
    nlohmann::ordered_json e;
    e["fraction"] = entry.fraction;
    e["size"] = entry.size;
    e["minority_count"] = entry.minority_count;
    e["note"] = entry.note;
    audit_json.push_back(std::move(e));
  }
  j["audit"] = std::move(audit_json);
  j["warnings"] = warnings;
  return j;
}

SampleResult sample_result_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw Error(ErrorCode::parse, "sample document must be a JSON object");
  for (const char* key : {"strategy", "pilot_use_only", "unit_ids", "audit", "warnings"}) {
    if (!j.contains(key))
      throw Error(ErrorCode::parse,
                           fmt::format("sample document missing field '{}'", key));
  }
  SampleResult result;
  result.strategy = j.at("strategy").get<std::string>();
  result.pilot_use_only = j.at("pilot_use_only").get<bool>();
  result.unit_ids = j.at("unit_ids").get<std::vector<std::string>>();
  for (const auto& e : j.at("audit")) {
    SampleAuditEntry entry;
    entry.fraction = e.at("fraction").get<double>();
    entry.size = e.at("size").get<std::size_t>();
    entry.minority_count = e.at("minority_count").get<std::size_t>();
    entry.note = e.at("note").get<std::string>();
    result.audit.push_back(std::move(entry));
  }
  result.warnings = j.at("warnings").get<std::vector<std::string>>();
  return result;
}

SampleResult draw_validation_sample(const model::Dataset& dataset,
                                    const SamplingConfig& config,
                                    const LabelMap* pilot_labels) {
  config.validate();
  const std::size_t n = dataset.size();
  if (n == 0)
    throw Error(ErrorCode::invalid_argument, "dataset is empty");
  if (n < config.floor)
    throw Error(
        ErrorCode::validation,
        fmt::format("dataset has {} units, below the {}-unit validation floor", n, config.floor));

  std::map<double, std::size_t> class_counts;
  if (pilot_labels != nullptr) {
    for (const auto& [unit_id, value] : *pilot_labels) {
      if (dataset.find(unit_id) == nullptr)
        throw Error(
            ErrorCode::invalid_argument,
            fmt::format("pilot label refers to unknown unit '{}'", unit_id));
      class_counts[value] += 1;
    }
  }
  const bool check_minority = !class_counts.empty();

  const auto order = rng::permutation(n, config.seed);
  auto ids_for = [&](std::size_t size) {
    std::vector<std::string> ids;
    ids.reserve(size);
    for (std::size_t i = 0; i < size; ++i) ids.push_back(dataset.units()[order[i]].id);
    return ids;
  };
  auto size_for = [&](double fraction) {
    auto raw = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    return std::min(n, std::max(config.floor, raw));
  };

  SampleResult result;
  result.strategy = "probabilistic";
  if (!check_minority)
    result.warnings.push_back("no provisional labels supplied; minority-class check skipped");

  double fraction = config.initial_fraction;
  std::string note = "initial draw";
  while (true) {
    const std::size_t size = size_for(fraction);
    result.unit_ids = ids_for(size);
    SampleAuditEntry entry;
    entry.fraction = fraction;
    entry.size = size;
    entry.minority_count =
        check_minority ? minority_count_in(result.unit_ids, *pilot_labels, class_counts) : 0;
    entry.note = note;
    result.audit.push_back(entry);

    const bool satisfied = !check_minority || entry.minority_count >= config.minority_minimum;
    if (satisfied) break;
    if (size >= n) {
      result.warnings.push_back(fmt::format(
          "dataset exhausted before every class reached {} sampled instances",
          config.minority_minimum));
      break;
    }
    fraction += config.step;
    note = fmt::format("expanded to fraction {}: minority count below {}",
                       text::format_value(fraction), config.minority_minimum);
  }
  return result;
}

HeuristicSize heuristic_size(std::size_t n) {
  if (n == 0)
    throw Error(ErrorCode::invalid_argument, "dataset is empty");
  const auto raw = static_cast<std::size_t>(std::ceil(0.10 * static_cast<double>(n)));
  HeuristicSize result;
  result.recommended = std::clamp<std::size_t>(raw, 100, 300);
  result.rationale = fmt::format("10% of {} units is {}; clamped to [100, 300] -> {}", n, raw,
                                 result.recommended);
  if (raw < 100)
    result.rationale += "; raised to the 100-unit floor";
  else if (raw > 1250)
    result.rationale += "; 10% exceeds the 1250-unit ceiling seen in practice";
  return result;
}

SampleResult rich_range_sample(const model::Dataset& dataset,
                               const model::Variable& variable,
                               const LabelMap& pilot_labels,
                               std::size_t per_category_minimum,
                               std::uint64_t seed) {
  if (!variable.is_categorical())
    throw Error(ErrorCode::unsupported,
                         fmt::format("rich-range sampling requires a categorical variable; '{}' is {}",
                                     variable.name, model::scale_to_string(variable.scale)));
  if (per_category_minimum == 0)
    throw Error(ErrorCode::invalid_argument,
                         "per-category minimum must be at least 1");
  if (pilot_labels.empty())
    throw Error(ErrorCode::invalid_argument, "no pilot labels supplied");

  std::map<double, std::size_t> quota;
  for (const auto& category : variable.categories) quota[static_cast<double>(category.code)] = 0;
  std::vector<std::string> labeled_ids;
  for (const auto& [unit_id, value] : pilot_labels) {
    if (dataset.find(unit_id) == nullptr)
      throw Error(ErrorCode::invalid_argument,
                           fmt::format("pilot label refers to unknown unit '{}'", unit_id));
    if (quota.find(value) == quota.end())
      throw Error(ErrorCode::validation,
                           fmt::format("pilot label {} for unit '{}' is outside the domain of '{}'",
                                       text::format_value(value), unit_id, variable.name));
    labeled_ids.push_back(unit_id);
  }

  rng::Engine engine(seed);
  rng::shuffle(labeled_ids, engine);

  SampleResult result;
  result.strategy = "rich_range";
  result.pilot_use_only = true;
  result.warnings.push_back(
      "non-probabilistic sample: suitable for codebook refinement and prompt piloting only");
  std::map<double, std::size_t> taken;
  for (const auto& id : labeled_ids) {
    const double value = pilot_labels.at(id);
    if (taken[value] >= per_category_minimum) continue;
    taken[value] += 1;
    result.unit_ids.push_back(id);
  }
  for (const auto& [value, count] : taken) quota[value] = count;
  for (const auto& [value, count] : quota) {
    if (count < per_category_minimum)
      throw Error(
          ErrorCode::validation,
          fmt::format("category {} unobtainable: {} labeled instance(s), need {}",
                      text::format_value(value), count, per_category_minimum));
  }

  SampleAuditEntry entry;
  entry.fraction =
      dataset.size() == 0
          ? 0.0
          : static_cast<double>(result.unit_ids.size()) / static_cast<double>(dataset.size());
  entry.size = result.unit_ids.size();
  entry.minority_count = per_category_minimum;
  entry.note = fmt::format("rich-range draw covering {} categories", quota.size());
  result.audit.push_back(std::move(entry));
  return result;
}

SampleResult pilot_sample(const model::Dataset& dataset, std::size_t n, std::uint64_t seed) {
  if (n == 0)
    throw Error(ErrorCode::invalid_argument, "pilot size must be at least 1");
  if (dataset.size() < n)
    throw Error(
        ErrorCode::validation,
        fmt::format("dataset has {} units but the pilot draw needs {}", dataset.size(), n));
  const auto order = rng::permutation(dataset.size(), seed);
  SampleResult result;
  result.strategy = "pilot";
  for (std::size_t i = 0; i < n; ++i) result.unit_ids.push_back(dataset.units()[order[i]].id);
  SampleAuditEntry entry;
  entry.fraction = static_cast<double>(n) / static_cast<double>(dataset.size());
  entry.size = n;
  entry.note = "pilot draw";
  result.audit.push_back(std::move(entry));
  return result;
}

}  // namespace ca::sampling
