#include "hybrid/hybrid.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "support/csv.hpp"
#include "support/errors.hpp"
#include "support/jsonio.hpp"
#include "support/text.hpp"

namespace ca::hybrid {

void RoutingPolicy::validate() const {
  if (confidence_threshold < 0.0 || confidence_threshold > 1.0)
    throw Error(ErrorCode::invalid_argument,
                         "confidence threshold must be in [0, 1]");
}

double RoutingResult::routed_fraction() const {
  if (total == 0) return 0.0;
  return static_cast<double>(queue.items.size()) / static_cast<double>(total);
}

nlohmann::json RoutingResult::to_json() const {
  nlohmann::ordered_json j;
  j["total"] = total;
  j["accepted"] = accepted.size();
  j["routed"] = queue.items.size();
  j["routed_fraction"] = routed_fraction();
  return j;
}

nlohmann::json EscalationResult::to_json() const {
  nlohmann::ordered_json j;
  j["judged"] = judged;
  j["resolved"] = resolved.size();
  j["remaining"] = remaining.items.size();
  return j;
}

namespace {

std::string candidates_field(const std::vector<double>& candidates) {
  std::vector<std::string> parts;
  for (const auto value : candidates) parts.push_back(text::format_value(value));
  return text::join(parts, "|");
}

std::vector<double> parse_candidates(const std::string& field) {
  std::vector<double> candidates;
  if (text::trim(field).empty()) return candidates;
  for (const auto& part : text::split(field, '|')) {
    const auto value = text::parse_value(text::trim(part));
    if (!value.has_value())
      throw Error(ErrorCode::parse, fmt::format("candidate '{}' is not a code", part));
    candidates.push_back(*value);
  }
  return candidates;
}

ReviewItem make_item(const model::Dataset& dataset, const std::string& unit_id,
                     std::vector<double> candidates, std::string reason) {
  ReviewItem item;
  item.unit_id = unit_id;
  item.text = dataset.require(unit_id).text;
  item.candidates = std::move(candidates);
  item.reason = std::move(reason);
  return item;
}

}  // namespace

RoutingResult route_by_confidence(const model::AnnotationList& annotations,
                                  const model::Dataset& dataset,
                                  const model::Variable& variable,
                                  const RoutingPolicy& policy) {
  policy.validate();
  RoutingResult result;
  result.queue.variable = variable.name;
  std::set<std::string> seen;
  for (const auto& annotation : annotations) {
    if (annotation.variable != variable.name) continue;
    if (!seen.insert(annotation.unit_id).second)
      throw Error(
          ErrorCode::invalid_argument,
          fmt::format("unit '{}' appears more than once; confidence routing expects one "
                      "code per unit",
                      annotation.unit_id));
    result.total += 1;
    if (!annotation.value.has_value()) {
      result.queue.items.push_back(
          make_item(dataset, annotation.unit_id, {}, "missing code"));
      continue;
    }
    if (!annotation.confidence.has_value()) {
      result.queue.items.push_back(make_item(dataset, annotation.unit_id,
                                             {*annotation.value}, "no confidence reported"));
      continue;
    }
    if (*annotation.confidence < policy.confidence_threshold) {
      result.queue.items.push_back(make_item(
          dataset, annotation.unit_id, {*annotation.value},
          fmt::format("low confidence ({} < {})",
                      text::format_value(*annotation.confidence),
                      text::format_value(policy.confidence_threshold))));
      continue;
    }
    result.accepted.push_back(annotation);
  }
  return result;
}

RoutingResult route_by_divergence(const model::AnnotationMatrix& matrix,
                                  const model::Dataset& dataset,
                                  const model::Variable& variable) {
  if (matrix.coder_count() < 2)
    throw Error(ErrorCode::invalid_argument,
                         "divergence routing needs at least 2 coders");
  RoutingResult result;
  result.queue.variable = variable.name;
  result.total = matrix.unit_count();
  for (std::size_t row = 0; row < matrix.unit_count(); ++row) {
    const auto& unit_id = matrix.unit_ids()[row];
    const auto values = matrix.unit_values(row);
    std::set<double> distinct(values.begin(), values.end());
    const bool complete = values.size() == matrix.coder_count();
    if (complete && distinct.size() == 1) {
      model::Annotation annotation;
      annotation.unit_id = unit_id;
      annotation.variable = variable.name;
      annotation.coder = {"agreement", ""};
      annotation.value = *distinct.begin();
      result.accepted.push_back(std::move(annotation));
      continue;
    }
    std::vector<double> candidates(distinct.begin(), distinct.end());
    std::string reason;
    if (distinct.size() > 1) {
      std::vector<std::string> parts;
      for (const auto value : candidates) parts.push_back(text::format_value(value));
      reason = fmt::format("divergent ({})", text::join(parts, " vs "));
      if (!complete) reason += ", some codes missing";
    } else {
      reason = "missing codes";
    }
    result.queue.items.push_back(
        make_item(dataset, unit_id, std::move(candidates), std::move(reason)));
  }
  return result;
}

EscalationResult judge_escalation(const ReviewQueue& queue,
                                  const model::AnnotationList& judge_codes,
                                  const model::Variable& variable) {
  std::map<std::string, const model::Annotation*> by_unit;
  for (const auto& annotation : judge_codes) {
    if (annotation.variable != variable.name) continue;
    by_unit[annotation.unit_id] = &annotation;
  }
  EscalationResult result;
  result.remaining.variable = queue.variable;
  for (const auto& item : queue.items) {
    const auto found = by_unit.find(item.unit_id);
    if (found != by_unit.end()) {
      result.judged += 1;
      const auto& judge = *found->second;
      const bool sided = judge.value.has_value() &&
                         std::find(item.candidates.begin(), item.candidates.end(),
                                   *judge.value) != item.candidates.end();
      if (sided) {
        model::Annotation annotation = judge;
        annotation.variable = variable.name;
        result.resolved.push_back(std::move(annotation));
        continue;
      }
    }
    auto remaining = item;
    if (found != by_unit.end())
      remaining.reason += "; judge did not side with a candidate";
    result.remaining.items.push_back(std::move(remaining));
  }
  return result;
}

namespace {
const std::vector<std::string> kQueueHeader = {"unit_id", "text",       "candidates",
                                               "reason",  "resolution", "resolver"};
}

std::string queue_to_csv(const ReviewQueue& queue) {
  std::string out = csv::write_row(kQueueHeader);
  for (const auto& item : queue.items) {
    out += csv::write_row(
        {item.unit_id, item.text, candidates_field(item.candidates), item.reason,
         item.resolution.has_value() ? text::format_value(*item.resolution) : "",
         item.resolver});
  }
  return out;
}

ReviewQueue queue_from_csv(const std::string& content, const std::string& variable_name) {
  const auto rows = csv::parse(content);
  if (rows.empty())
    throw Error(ErrorCode::parse, "review table is empty");
  if (rows.front() != kQueueHeader)
    throw Error(
        ErrorCode::parse,
        "review table: expected header 'unit_id,text,candidates,reason,resolution,resolver'");
  ReviewQueue queue;
  queue.variable = variable_name;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != kQueueHeader.size())
      throw Error(
          ErrorCode::parse,
          fmt::format("review table row {}: expected {} fields, got {}", i + 1,
                      kQueueHeader.size(), row.size()));
    ReviewItem item;
    item.unit_id = row[0];
    if (item.unit_id.empty())
      throw Error(ErrorCode::parse,
                           fmt::format("review table row {}: empty unit id", i + 1));
    if (!seen.insert(item.unit_id).second)
      throw Error(ErrorCode::parse,
                           fmt::format("review table row {}: duplicate unit '{}'", i + 1,
                                       item.unit_id));
    item.text = row[1];
    item.candidates = parse_candidates(row[2]);
    item.reason = row[3];
    if (!text::trim(row[4]).empty()) {
      const auto value = text::parse_value(text::trim(row[4]));
      if (!value.has_value())
        throw Error(
            ErrorCode::parse,
            fmt::format("review table row {}: resolution '{}' is not a code", i + 1, row[4]));
      item.resolution = *value;
    }
    item.resolver = row[5];
    queue.items.push_back(std::move(item));
  }
  return queue;
}

void save_queue_file(const std::filesystem::path& path, const ReviewQueue& queue) {
  jsonio::save_text_file(path, queue_to_csv(queue));
}

ReviewQueue load_queue_file(const std::filesystem::path& path,
                            const std::string& variable_name) {
  return queue_from_csv(jsonio::load_text_file(path), variable_name);
}

nlohmann::json ImportResult::to_json() const {
  nlohmann::ordered_json j;
  j["accepted"] = accepted;
  j["pending"] = pending;
  j["errors"] = errors;
  return j;
}

ImportResult import_resolutions(const ReviewQueue& queue,
                                const model::Variable& variable) {
  ImportResult result;
  result.queue.variable = queue.variable;
  for (const auto& item : queue.items) {
    std::string error;
    if (item.resolution.has_value()) {
      if (text::trim(item.resolver).empty())
        error = fmt::format("resolution without resolver for unit '{}'", item.unit_id);
      else if (!variable.in_domain(*item.resolution))
        error =
            fmt::format("resolution {} for unit '{}' is outside the domain of '{}'",
                        text::format_value(*item.resolution), item.unit_id,
                        variable.name);
    }
    if (item.resolution.has_value() && error.empty()) {
      model::Annotation annotation;
      annotation.unit_id = item.unit_id;
      annotation.variable = variable.name;
      annotation.coder = {item.resolver, ""};
      annotation.value = item.resolution;
      result.annotations.push_back(std::move(annotation));
      result.accepted += 1;
      continue;
    }
    if (!error.empty()) result.errors.push_back(error);
    ReviewItem pending = item;
    pending.resolution.reset();
    pending.resolver.clear();
    result.queue.items.push_back(std::move(pending));
    result.pending += 1;
  }
  return result;
}

}  // namespace ca::hybrid
