#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/codebook.hpp"
#include "core/dataset.hpp"

namespace ca::prompts {

struct FewShotExample {
  std::string text;
  double code = 0.0;
  std::string rationale;  // shown only in chain-of-thought shots
};

enum class ResponseMode { code_only, code_json };

const char* to_string(ResponseMode mode);
ResponseMode response_mode_from_string(const std::string& text);

inline constexpr std::size_t kDefaultCharBudget = 12000;
inline constexpr const char* kAnswerMarker = "FINAL ANSWER:";

struct PromptTemplate {
  std::string name;
  std::string system;  // empty -> default coder persona
  std::size_t shot_count = 0;
  bool chain_of_thought = false;
  bool ask_justification = false;
  ResponseMode response_mode = ResponseMode::code_only;
  std::size_t char_budget = kDefaultCharBudget;

  nlohmann::json to_json() const;
};

PromptTemplate template_from_json(const nlohmann::json& j);
PromptTemplate load_template_file(const std::string& path);

struct RenderedPrompt {
  std::string template_name;
  std::string system;
  std::string user;
  std::uint64_t content_hash = 0;  // over system + user; stable across runs
};

/// Pure function of its arguments. Section order is fixed: task
/// instruction, coding rules, category/range listing, few-shot examples,
/// response-format instruction, the unit text, then the chain-of-thought
/// directive ending in the FINAL ANSWER marker.
RenderedPrompt render_prompt(const PromptTemplate& tmpl, const model::Variable& variable,
                             const model::CodingUnit& unit,
                             const std::vector<FewShotExample>& examples);

/// The five standard variants: zero_shot, one_shot, few_shot (k shots),
/// zero_shot_cot, few_shot_cot. k must be >= 2.
std::vector<PromptTemplate> generate_variants(std::size_t few_shot_k, bool ask_justification);

enum class ParseMode { strict, marker, structured };

const char* to_string(ParseMode mode);
ParseMode parse_mode_from_string(const std::string& text);

/// Parse mode implied by a template: structured for JSON responses,
/// marker for chain-of-thought, strict otherwise.
ParseMode parse_mode_for(const PromptTemplate& tmpl);

struct ParsedResponse {
  bool ok = false;
  double code = 0.0;
  std::optional<double> confidence;
  std::string reason;  // failure diagnostic when !ok
};

/// strict: the response must be a bare code (one trailing period
/// tolerated). marker: the code follows the last FINAL ANSWER marker.
/// structured: a JSON object with "code" and optional "confidence".
/// Codes outside the variable's domain fail in every mode.
ParsedResponse parse_response(const std::string& text, const model::Variable& variable,
                              ParseMode mode);

}  // namespace ca::prompts
