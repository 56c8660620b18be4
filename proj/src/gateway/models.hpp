#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ca::gateway {

/// Scripted behaviour for the mock provider, configured per model in the
/// registry; keeps offline runs deterministic.
struct MockRule {
  std::string contains;
  double code = 0.0;
};

struct MockScript {
  std::vector<MockRule> rules;
  double default_code = 0.0;
  double latency_seconds = 0.0;
  std::size_t fail_first = 0;  // transport-fail this many leading calls
  std::vector<std::string> prose_first;  // units matching these get prose once
  std::optional<double> confidence;      // attached to JSON-mode replies
  std::size_t truncate_after = 0;        // chars; 0 = never truncate
};

MockScript mock_script_from_json(const nlohmann::json& j);

struct ModelSpec {
  std::string name;
  std::string provider;  // e.g. "openai", "local", "mock"
  std::string endpoint;  // chat-completions URL; empty for mock
  std::size_t context_window = 8192;
  double price_per_mtok_input = 0.0;
  double price_per_mtok_output = 0.0;
  double size_billion = 0.0;  // 0 = undisclosed
  bool open_weights = false;
  bool requires_key = true;
  MockScript mock;

  nlohmann::json to_json() const;
};

ModelSpec model_spec_from_json(const nlohmann::json& j);

class Registry {
 public:
  static Registry from_json(const nlohmann::json& j);
  static Registry load_file(const std::string& path);

  const std::vector<ModelSpec>& models() const { return models_; }
  const ModelSpec* find(const std::string& name) const;
  const ModelSpec& require(const std::string& name) const;
  nlohmann::json to_json() const;

 private:
  std::vector<ModelSpec> models_;
};

/// CA_<PROVIDER>_KEY with the provider uppercased and non-alphanumerics
/// mapped to underscores.
std::string credential_env_name(const std::string& provider);

/// Key from the environment; empty when the model needs none. Keys never
/// come from configuration files.
std::string resolve_credential(const ModelSpec& spec);

enum class Quantization { none, four_bit };

const char* to_string(Quantization q);

struct ScreeningRequirements {
  std::size_t min_context_tokens = 0;   // 0 = no requirement
  bool require_open_weights = false;
  double max_price_per_mtok = 0.0;      // 0 = no cap; applies to both directions
  double max_vram_gb = 0.0;             // 0 = no cap
  Quantization quantization = Quantization::none;
};

struct ScreeningResult {
  std::string model;
  bool eligible = true;
  std::vector<std::string> reasons;  // one per failed check

  nlohmann::json to_json() const;
};

ScreeningResult screen_model(const ModelSpec& spec, const ScreeningRequirements& requirements);

/// Word-to-token rule of thumb: one token per 0.75 words, rounded up.
std::size_t estimate_tokens(std::size_t word_count);
std::size_t estimate_tokens_for_text(const std::string& text);

/// price is USD per million tokens.
double estimate_cost_usd(std::size_t tokens, double price_per_mtok);

/// none: 2 GB per billion parameters. four_bit: 0.5 GB per billion + 1 GB
/// overhead.
double estimate_vram_gb(double size_billion, Quantization q);

double project_runtime_seconds(double per_item_seconds, std::size_t item_count);

}  // namespace ca::gateway
