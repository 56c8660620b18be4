#include "sampling/gold.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "support/errors.hpp"
#include "support/text.hpp"

namespace ca::sampling {

namespace {

std::map<double, std::size_t> tally(const std::vector<double>& values) {
  std::map<double, std::size_t> counts;
  for (const auto value : values) counts[value] += 1;
  return counts;
}

}  // namespace

std::size_t GoldStandard::unresolved_count() const {
  std::size_t count = 0;
  for (const auto& [unit_id, code] : codes) {
    (void)unit_id;
    if (!code.has_value()) ++count;
  }
  return count;
}

std::size_t GoldStandard::resolved_count() const { return codes.size() - unresolved_count(); }

const char* to_string(GoldStandard::Method method) {
  switch (method) {
    case GoldStandard::Method::majority_vote: return "majority_vote";
    case GoldStandard::Method::consensus: return "consensus";
    case GoldStandard::Method::agreement_only: return "agreement_only";
  }
  return "majority_vote";
}

nlohmann::json GoldStandard::to_json() const {
  nlohmann::ordered_json j;
  j["variable"] = variable;
  j["method"] = to_string(method);
  j["coder_count"] = coder_count;
  nlohmann::ordered_json codes_json = nlohmann::ordered_json::object();
  for (const auto& [unit_id, code] : codes) {
    if (code.has_value())
      codes_json[unit_id] = *code;
    else
      codes_json[unit_id] = nullptr;
  }
  j["codes"] = std::move(codes_json);
  j["resolved"] = resolved_count();
  j["unresolved"] = unresolved_count();
  j["warnings"] = warnings;
  return j;
}

GoldStandard gold_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw Error(ErrorCode::parse, "gold document must be a JSON object");
  for (const char* key : {"variable", "method", "coder_count", "codes", "warnings"}) {
    if (!j.contains(key))
      throw Error(ErrorCode::parse,
                           fmt::format("gold document missing field '{}'", key));
  }
  GoldStandard gold;
  gold.variable = j.at("variable").get<std::string>();
  const auto method = j.at("method").get<std::string>();
  if (method == "majority_vote")
    gold.method = GoldStandard::Method::majority_vote;
  else if (method == "consensus")
    gold.method = GoldStandard::Method::consensus;
  else if (method == "agreement_only")
    gold.method = GoldStandard::Method::agreement_only;
  else
    throw Error(ErrorCode::parse,
                         fmt::format("unknown gold method '{}'", method));
  gold.coder_count = j.at("coder_count").get<std::size_t>();
  for (const auto& [unit_id, value] : j.at("codes").items()) {
    if (value.is_null())
      gold.codes[unit_id] = std::nullopt;
    else
      gold.codes[unit_id] = value.get<double>();
  }
  gold.warnings = j.at("warnings").get<std::vector<std::string>>();
  return gold;
}

GoldStandard majority_vote(const model::AnnotationMatrix& matrix) {
  GoldStandard gold;
  gold.variable = matrix.variable_name();
  gold.method = GoldStandard::Method::majority_vote;
  gold.coder_count = matrix.coder_count();
  if (gold.coder_count < 2)
    throw Error(ErrorCode::validation,
                         "majority vote needs at least 2 coders");
  if (gold.coder_count % 2 == 0)
    gold.warnings.push_back(fmt::format(
        "{} coders: an even panel can tie; prefer an odd number", gold.coder_count));

  for (std::size_t row = 0; row < matrix.unit_ids().size(); ++row) {
    const auto values = matrix.unit_values(row);
    const auto counts = tally(values);
    std::size_t voters = 0;
    for (const auto& [value, count] : counts) {
      (void)value;
      voters += count;
    }
    model::CellValue winner;
    for (const auto& [value, count] : counts) {
      if (2 * count > voters) {
        winner = value;
        break;
      }
    }
    gold.codes[matrix.unit_ids()[row]] = winner;
  }
  return gold;
}

GoldStandard consensus_gold(const model::AnnotationMatrix& matrix,
                            const std::map<std::string, double>& resolutions) {
  GoldStandard gold;
  gold.variable = matrix.variable_name();
  gold.method = GoldStandard::Method::consensus;
  gold.coder_count = matrix.coder_count();
  gold.warnings.push_back(
      "consensus coding: negotiated codes are not independent and mask coder disagreement");

  for (const auto& [unit_id, value] : resolutions) {
    if (std::find(matrix.unit_ids().begin(), matrix.unit_ids().end(), unit_id) ==
        matrix.unit_ids().end())
      throw Error(ErrorCode::invalid_argument,
                           fmt::format("resolution refers to unknown unit '{}'", unit_id));
    (void)value;
  }

  for (std::size_t row = 0; row < matrix.unit_ids().size(); ++row) {
    const auto& unit_id = matrix.unit_ids()[row];
    const auto counts = tally(matrix.unit_values(row));
    if (counts.size() == 1) {
      gold.codes[unit_id] = counts.begin()->first;
      continue;
    }
    auto it = resolutions.find(unit_id);
    if (it != resolutions.end()) {
      gold.codes[unit_id] = it->second;
      continue;
    }
    gold.codes[unit_id] = std::nullopt;  // disagreement with no discussion outcome
  }
  return gold;
}

GoldStandard agreement_only_gold(const model::AnnotationMatrix& matrix) {
  GoldStandard gold;
  gold.variable = matrix.variable_name();
  gold.method = GoldStandard::Method::agreement_only;
  gold.coder_count = matrix.coder_count();
  gold.warnings.push_back(
      "agreement-only filtering discards contested units and inflates apparent reliability");

  std::size_t dropped = 0;
  for (std::size_t row = 0; row < matrix.unit_ids().size(); ++row) {
    const auto counts = tally(matrix.unit_values(row));
    std::size_t voters = 0;
    for (const auto& [value, count] : counts) {
      (void)value;
      voters += count;
    }
    if (counts.size() == 1 && voters >= 2)
      gold.codes[matrix.unit_ids()[row]] = counts.begin()->first;
    else
      ++dropped;
  }
  if (dropped > 0)
    gold.warnings.push_back(fmt::format("{} of {} units dropped for disagreement", dropped,
                                        matrix.unit_ids().size()));
  return gold;
}

const char* to_string(GateLevel level) {
  switch (level) {
    case GateLevel::sufficient: return "sufficient";
    case GateLevel::tentative: return "tentative";
    case GateLevel::insufficient: return "insufficient";
  }
  return "insufficient";
}

GateLevel gate_level_from_string(const std::string& text) {
  if (text == "sufficient") return GateLevel::sufficient;
  if (text == "tentative") return GateLevel::tentative;
  if (text == "insufficient") return GateLevel::insufficient;
  throw Error(ErrorCode::parse, fmt::format("unknown gate level '{}'", text));
}

nlohmann::json gate_to_json(const GateResult& gate) {
  nlohmann::ordered_json j;
  j["level"] = to_string(gate.level);
  j["defined"] = gate.defined;
  j["alpha"] = gate.alpha;
  j["reason"] = gate.reason;
  return j;
}

GateResult gate_from_json(const nlohmann::json& j) {
  GateResult gate;
  gate.level = gate_level_from_string(j.at("level").get<std::string>());
  gate.defined = j.at("defined").get<bool>();
  gate.alpha = j.at("alpha").get<double>();
  gate.reason = j.at("reason").get<std::string>();
  return gate;
}

GateResult gate_reliability(const metrics::ReliabilityResult& reliability) {
  if (!reliability.defined) {
    GateResult result;
    result.level = GateLevel::insufficient;
    result.defined = false;
    result.reason = fmt::format("alpha undefined: {}", reliability.undefined_reason);
    return result;
  }
  return gate_reliability(reliability.alpha);
}

GateResult gate_reliability(double alpha) {
  GateResult result;
  result.alpha = alpha;
  result.defined = true;
  if (alpha > kGateSufficient) {
    result.level = GateLevel::sufficient;
    result.reason = fmt::format("alpha {} > {}", text::format_value(alpha),
                                text::format_value(kGateSufficient));
  } else if (alpha >= kGateTentative) {
    result.level = GateLevel::tentative;
    result.reason =
        fmt::format("alpha {} in [{}, {}]: tentative conclusions only",
                    text::format_value(alpha), text::format_value(kGateTentative),
                    text::format_value(kGateSufficient));
  } else {
    result.level = GateLevel::insufficient;
    result.reason = fmt::format("alpha {} < {}", text::format_value(alpha),
                                text::format_value(kGateTentative));
  }
  return result;
}

}  // namespace ca::sampling
