#include "gateway/models.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>

#include <fmt/format.h>

#include "support/errors.hpp"
#include "support/jsonio.hpp"
#include "support/text.hpp"

namespace ca::gateway {

MockScript mock_script_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw Error(ErrorCode::parse, "mock script must be a JSON object");
  MockScript script;
  if (j.contains("rules")) {
    for (const auto& rule_json : j.at("rules")) {
      MockRule rule;
      rule.contains = rule_json.at("contains").get<std::string>();
      rule.code = rule_json.at("code").get<double>();
      script.rules.push_back(std::move(rule));
    }
  }
  if (j.contains("default_code")) script.default_code = j.at("default_code").get<double>();
  if (j.contains("latency_seconds"))
    script.latency_seconds = j.at("latency_seconds").get<double>();
  if (j.contains("fail_first")) script.fail_first = j.at("fail_first").get<std::size_t>();
  if (j.contains("prose_first"))
    script.prose_first = j.at("prose_first").get<std::vector<std::string>>();
  if (j.contains("confidence")) script.confidence = j.at("confidence").get<double>();
  if (j.contains("truncate_after"))
    script.truncate_after = j.at("truncate_after").get<std::size_t>();
  return script;
}

namespace {

nlohmann::ordered_json mock_script_to_json(const MockScript& script) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json rules = nlohmann::ordered_json::array();
  for (const auto& rule : script.rules)
    rules.push_back({{"contains", rule.contains}, {"code", rule.code}});
  j["rules"] = std::move(rules);
  j["default_code"] = script.default_code;
  j["latency_seconds"] = script.latency_seconds;
  j["fail_first"] = script.fail_first;
  j["prose_first"] = script.prose_first;
  if (script.confidence.has_value()) j["confidence"] = *script.confidence;
  j["truncate_after"] = script.truncate_after;
  return j;
}

}  // namespace

nlohmann::json ModelSpec::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["provider"] = provider;
  j["endpoint"] = endpoint;
  j["context_window"] = context_window;
  j["price_per_mtok_input"] = price_per_mtok_input;
  j["price_per_mtok_output"] = price_per_mtok_output;
  j["size_billion"] = size_billion;
  j["open_weights"] = open_weights;
  j["requires_key"] = requires_key;
  if (provider == "mock") j["mock"] = mock_script_to_json(mock);
  return j;
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw Error(ErrorCode::parse, "model entry must be a JSON object");
  for (const char* key : {"name", "provider"}) {
    if (!j.contains(key) || !j.at(key).is_string() || j.at(key).get<std::string>().empty())
      throw Error(ErrorCode::parse,
                           fmt::format("model entry missing field '{}'", key));
  }
  ModelSpec spec;
  spec.name = j.at("name").get<std::string>();
  spec.provider = j.at("provider").get<std::string>();
  if (j.contains("endpoint")) spec.endpoint = j.at("endpoint").get<std::string>();
  if (j.contains("context_window"))
    spec.context_window = j.at("context_window").get<std::size_t>();
  if (j.contains("price_per_mtok_input"))
    spec.price_per_mtok_input = j.at("price_per_mtok_input").get<double>();
  if (j.contains("price_per_mtok_output"))
    spec.price_per_mtok_output = j.at("price_per_mtok_output").get<double>();
  if (j.contains("size_billion")) spec.size_billion = j.at("size_billion").get<double>();
  if (j.contains("open_weights")) spec.open_weights = j.at("open_weights").get<bool>();
  if (j.contains("requires_key"))
    spec.requires_key = j.at("requires_key").get<bool>();
  else
    spec.requires_key = spec.provider != "mock" && spec.provider != "local";
  if (j.contains("mock")) spec.mock = mock_script_from_json(j.at("mock"));
  if (spec.provider != "mock" && spec.endpoint.empty())
    throw Error(
        ErrorCode::validation,
        fmt::format("model '{}' has provider '{}' but no endpoint", spec.name, spec.provider));
  return spec;
}

Registry Registry::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("models") || !j.at("models").is_array())
    throw Error(ErrorCode::parse,
                         "registry must be a JSON object with a 'models' array");
  Registry registry;
  std::set<std::string> seen;
  for (const auto& entry : j.at("models")) {
    auto spec = model_spec_from_json(entry);
    if (!seen.insert(spec.name).second)
      throw Error(ErrorCode::validation,
                           fmt::format("duplicate model name '{}'", spec.name));
    registry.models_.push_back(std::move(spec));
  }
  return registry;
}

Registry Registry::load_file(const std::string& path) {
  return from_json(jsonio::load_file(path));
}

const ModelSpec* Registry::find(const std::string& name) const {
  for (const auto& spec : models_)
    if (spec.name == name) return &spec;
  return nullptr;
}

const ModelSpec& Registry::require(const std::string& name) const {
  const auto* spec = find(name);
  if (spec == nullptr)
    throw Error(ErrorCode::invalid_argument,
                         fmt::format("model '{}' is not in the registry", name));
  return *spec;
}

nlohmann::json Registry::to_json() const {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& spec : models_) models.push_back(spec.to_json());
  nlohmann::json j;
  j["models"] = std::move(models);
  return j;
}

std::string credential_env_name(const std::string& provider) {
  std::string env = "CA_";
  for (char c : provider)
    env += std::isalnum(static_cast<unsigned char>(c))
               ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
               : '_';
  env += "_KEY";
  return env;
}

std::string resolve_credential(const ModelSpec& spec) {
  if (!spec.requires_key) return "";
  const auto env = credential_env_name(spec.provider);
  const char* value = std::getenv(env.c_str());
  if (value == nullptr || *value == '\0')
    throw Error(
        ErrorCode::credentials,
        fmt::format("credentials missing for provider '{}': set environment variable {}",
                    spec.provider, env));
  return value;
}

const char* to_string(Quantization q) {
  switch (q) {
    case Quantization::none: return "none";
    case Quantization::four_bit: return "4bit";
  }
  return "none";
}

nlohmann::json ScreeningResult::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["eligible"] = eligible;
  j["reasons"] = reasons;
  return j;
}

ScreeningResult screen_model(const ModelSpec& spec, const ScreeningRequirements& requirements) {
  ScreeningResult result;
  result.model = spec.name;
  if (requirements.min_context_tokens > 0 &&
      spec.context_window < requirements.min_context_tokens)
    result.reasons.push_back(fmt::format("context window {} below required {}",
                                         spec.context_window,
                                         requirements.min_context_tokens));
  if (requirements.require_open_weights && !spec.open_weights)
    result.reasons.push_back("closed weights: texts would leave the local environment");
  if (requirements.max_price_per_mtok > 0.0) {
    if (spec.price_per_mtok_input > requirements.max_price_per_mtok)
      result.reasons.push_back(
          fmt::format("input price {} per Mtok exceeds cap {}",
                      text::format_value(spec.price_per_mtok_input),
                      text::format_value(requirements.max_price_per_mtok)));
    if (spec.price_per_mtok_output > requirements.max_price_per_mtok)
      result.reasons.push_back(
          fmt::format("output price {} per Mtok exceeds cap {}",
                      text::format_value(spec.price_per_mtok_output),
                      text::format_value(requirements.max_price_per_mtok)));
  }
  if (requirements.max_vram_gb > 0.0 && spec.size_billion > 0.0) {
    const double needed = estimate_vram_gb(spec.size_billion, requirements.quantization);
    if (needed > requirements.max_vram_gb)
      result.reasons.push_back(fmt::format(
          "needs {} GB VRAM at quantization {}, above the {} GB budget",
          text::format_value(needed), to_string(requirements.quantization),
          text::format_value(requirements.max_vram_gb)));
  }
  result.eligible = result.reasons.empty();
  return result;
}

std::size_t estimate_tokens(std::size_t word_count) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(word_count) / 0.75));
}

std::size_t estimate_tokens_for_text(const std::string& text) {
  return estimate_tokens(text::word_count(text));
}

double estimate_cost_usd(std::size_t tokens, double price_per_mtok) {
  if (price_per_mtok < 0.0)
    throw Error(ErrorCode::invalid_argument, "price must be non-negative");
  return static_cast<double>(tokens) * price_per_mtok / 1'000'000.0;
}

double estimate_vram_gb(double size_billion, Quantization q) {
  if (size_billion <= 0.0)
    throw Error(ErrorCode::invalid_argument,
                         "model size in billions must be positive");
  switch (q) {
    case Quantization::none: return 2.0 * size_billion;
    case Quantization::four_bit: return 0.5 * size_billion + 1.0;
  }
  return 2.0 * size_billion;
}

double project_runtime_seconds(double per_item_seconds, std::size_t item_count) {
  if (per_item_seconds < 0.0)
    throw Error(ErrorCode::invalid_argument,
                         "per-item seconds must be non-negative");
  return per_item_seconds * static_cast<double>(item_count);
}

}  // namespace ca::gateway
