#include "prompts/prompts.hpp"

#include <fmt/format.h>

#include "support/errors.hpp"
#include "support/hash.hpp"
#include "support/jsonio.hpp"
#include "support/text.hpp"

namespace ca::prompts {

namespace {

constexpr const char* kDefaultSystem =
    "You are a careful content-analysis coder. Apply the codebook exactly as written and "
    "never invent categories.";

void append_line(std::string& out, const std::string& line) {
  if (!out.empty()) out += "\n";
  out += line;
}

std::string category_block(const model::Variable& variable) {
  std::string block;
  if (variable.is_categorical()) {
    append_line(block, "Coding scheme:");
    for (const auto& category : variable.categories) {
      std::string line = fmt::format("{} = {} ({}", category.code, category.label,
                                     category.definition);
      if (!category.examples.empty())
        line += fmt::format("; e.g. {}", text::join(category.examples, "; "));
      line += ")";
      append_line(block, line);
    }
  } else if (variable.range.has_value()) {
    append_line(block, fmt::format("Report a number between {} and {} on the {} scale.",
                                   text::format_value(variable.range->min_value),
                                   text::format_value(variable.range->max_value),
                                   model::scale_to_string(variable.scale)));
  }
  return block;
}

}  // namespace

const char* to_string(ResponseMode mode) {
  switch (mode) {
    case ResponseMode::code_only: return "code_only";
    case ResponseMode::code_json: return "code_json";
  }
  return "code_only";
}

ResponseMode response_mode_from_string(const std::string& text) {
  if (text == "code_only") return ResponseMode::code_only;
  if (text == "code_json") return ResponseMode::code_json;
  throw Error(ErrorCode::parse,
                       fmt::format("unknown response mode '{}'", text));
}

nlohmann::json PromptTemplate::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["system"] = system;
  j["shot_count"] = shot_count;
  j["chain_of_thought"] = chain_of_thought;
  j["ask_justification"] = ask_justification;
  j["response_mode"] = to_string(response_mode);
  j["char_budget"] = char_budget;
  return j;
}

PromptTemplate template_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw Error(ErrorCode::parse, "prompt template must be a JSON object");
  for (const char* key : {"name", "system", "shot_count", "chain_of_thought",
                          "ask_justification", "response_mode", "char_budget"}) {
    if (!j.contains(key))
      throw Error(ErrorCode::parse,
                           fmt::format("prompt template missing field '{}'", key));
  }
  PromptTemplate tmpl;
  tmpl.name = j.at("name").get<std::string>();
  tmpl.system = j.at("system").get<std::string>();
  tmpl.shot_count = j.at("shot_count").get<std::size_t>();
  tmpl.chain_of_thought = j.at("chain_of_thought").get<bool>();
  tmpl.ask_justification = j.at("ask_justification").get<bool>();
  tmpl.response_mode = response_mode_from_string(j.at("response_mode").get<std::string>());
  tmpl.char_budget = j.at("char_budget").get<std::size_t>();
  if (tmpl.name.empty())
    throw Error(ErrorCode::validation, "prompt template name is empty");
  if (tmpl.chain_of_thought && tmpl.response_mode == ResponseMode::code_json)
    throw Error(ErrorCode::unsupported,
                         "chain-of-thought and JSON responses are mutually exclusive");
  return tmpl;
}

PromptTemplate load_template_file(const std::string& path) {
  return template_from_json(jsonio::load_file(path));
}

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const model::Variable& variable,
                             const model::CodingUnit& unit,
                             const std::vector<FewShotExample>& examples) {
  if (tmpl.chain_of_thought && tmpl.response_mode == ResponseMode::code_json)
    throw Error(ErrorCode::unsupported,
                         "chain-of-thought and JSON responses are mutually exclusive");
  if (examples.size() < tmpl.shot_count)
    throw Error(
        ErrorCode::invalid_argument,
        fmt::format("template '{}' needs {} examples, got {}", tmpl.name, tmpl.shot_count,
                    examples.size()));
  for (std::size_t i = 0; i < tmpl.shot_count; ++i) {
    if (!variable.in_domain(examples[i].code))
      throw Error(
          ErrorCode::validation,
          fmt::format("example {} code {} is outside the domain of '{}'", i + 1,
                      text::format_value(examples[i].code), variable.name));
  }

  RenderedPrompt rendered;
  rendered.template_name = tmpl.name;
  rendered.system = tmpl.system.empty() ? kDefaultSystem : tmpl.system;

  std::string user;
  append_line(user, fmt::format("Task: code the text for the variable '{}'.", variable.name));
  if (!variable.instruction.empty()) append_line(user, variable.instruction);
  for (const auto& rule : variable.coding_rules) append_line(user, fmt::format("Rule: {}", rule));

  const auto categories = category_block(variable);
  if (!categories.empty()) {
    append_line(user, "");
    user += categories;
  }

  if (tmpl.shot_count > 0) {
    append_line(user, "");
    append_line(user, "Examples:");
    for (std::size_t i = 0; i < tmpl.shot_count; ++i) {
      const auto& example = examples[i];
      append_line(user, fmt::format("Text: {}", example.text));
      if (tmpl.chain_of_thought && !example.rationale.empty())
        append_line(user, fmt::format("Reasoning: {}", example.rationale));
      append_line(user, fmt::format("Code: {}", text::format_value(example.code)));
    }
  }

  append_line(user, "");
  switch (tmpl.response_mode) {
    case ResponseMode::code_only:
      if (!tmpl.chain_of_thought)
        append_line(user, "Respond with the code only, nothing else.");
      break;
    case ResponseMode::code_json:
      append_line(user,
                  "Respond with a JSON object {\"code\": <code>, \"confidence\": <0..1>} and "
                  "nothing else.");
      break;
  }
  if (tmpl.ask_justification && !tmpl.chain_of_thought)
    append_line(user, "After the code, add one sentence justifying your choice.");

  append_line(user, "");
  append_line(user, "Text to code:");
  append_line(user, unit.text);

  if (tmpl.chain_of_thought) {
    append_line(user, "");
    append_line(user,
                fmt::format("Let's think step by step, then give the verdict on a final "
                            "line formatted exactly as '{} <code>'.",
                            kAnswerMarker));
  }

  rendered.user = user;
  const std::size_t total = rendered.system.size() + rendered.user.size();
  if (tmpl.char_budget > 0 && total > tmpl.char_budget)
    throw Error(
        ErrorCode::validation,
        fmt::format("unit '{}' exceeds prompt budget: {} > {} chars", unit.id, total,
                    tmpl.char_budget));
  rendered.content_hash =
      hash::fnv1a64(rendered.user, hash::fnv1a64(rendered.system));
  return rendered;
}

std::vector<PromptTemplate> generate_variants(std::size_t few_shot_k, bool ask_justification) {
  if (few_shot_k < 2)
    throw Error(ErrorCode::invalid_argument,
                         "few-shot variants need k >= 2 examples");
  struct Blueprint {
    const char* name;
    std::size_t shots;
    bool cot;
  };
  const Blueprint blueprints[] = {
      {"zero_shot", 0, false},        {"one_shot", 1, false},
      {"few_shot", few_shot_k, false}, {"zero_shot_cot", 0, true},
      {"few_shot_cot", few_shot_k, true},
  };
  std::vector<PromptTemplate> variants;
  for (const auto& blueprint : blueprints) {
    PromptTemplate tmpl;
    tmpl.name = blueprint.name;
    tmpl.shot_count = blueprint.shots;
    tmpl.chain_of_thought = blueprint.cot;
    tmpl.ask_justification = ask_justification;
    variants.push_back(std::move(tmpl));
  }
  return variants;
}

const char* to_string(ParseMode mode) {
  switch (mode) {
    case ParseMode::strict: return "strict";
    case ParseMode::marker: return "marker";
    case ParseMode::structured: return "structured";
  }
  return "strict";
}

ParseMode parse_mode_from_string(const std::string& text) {
  if (text == "strict") return ParseMode::strict;
  if (text == "marker") return ParseMode::marker;
  if (text == "structured") return ParseMode::structured;
  throw Error(ErrorCode::parse, fmt::format("unknown parse mode '{}'", text));
}

ParseMode parse_mode_for(const PromptTemplate& tmpl) {
  if (tmpl.response_mode == ResponseMode::code_json) return ParseMode::structured;
  if (tmpl.chain_of_thought) return ParseMode::marker;
  return ParseMode::strict;
}

namespace {

ParsedResponse fail(std::string reason) {
  ParsedResponse parsed;
  parsed.ok = false;
  parsed.reason = std::move(reason);
  return parsed;
}

ParsedResponse accept_code(double code, const model::Variable& variable) {
  if (!variable.in_domain(code))
    return fail(fmt::format("code {} is outside the domain of '{}'",
                            text::format_value(code), variable.name));
  ParsedResponse parsed;
  parsed.ok = true;
  parsed.code = code;
  return parsed;
}

ParsedResponse parse_token(std::string token, const model::Variable& variable,
                           const char* empty_reason) {
  token = text::trim(token);
  if (!token.empty() && token.back() == '.') token.pop_back();
  token = text::trim(token);
  if (token.empty()) return fail(empty_reason);
  const auto code = text::parse_value(token);
  if (!code.has_value()) return fail(fmt::format("'{}' is not a code", token));
  return accept_code(*code, variable);
}

ParsedResponse parse_structured(const std::string& text, const model::Variable& variable) {
  const auto open = text.find('{');
  const auto close = text.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open)
    return fail("no JSON object in response");
  nlohmann::json j = nlohmann::json::parse(text.substr(open, close - open + 1), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return fail("malformed JSON in response");
  if (!j.contains("code") || !j.at("code").is_number())
    return fail("JSON response missing numeric 'code'");
  auto parsed = accept_code(j.at("code").get<double>(), variable);
  if (!parsed.ok) return parsed;
  if (j.contains("confidence")) {
    if (!j.at("confidence").is_number()) return fail("'confidence' is not a number");
    const double confidence = j.at("confidence").get<double>();
    if (confidence < 0.0 || confidence > 1.0)
      return fail(fmt::format("confidence {} out of [0, 1]", text::format_value(confidence)));
    parsed.confidence = confidence;
  }
  return parsed;
}

}  // namespace

ParsedResponse parse_response(const std::string& text, const model::Variable& variable,
                              ParseMode mode) {
  const auto trimmed = text::trim(text);
  if (trimmed.empty()) return fail("empty response");
  switch (mode) {
    case ParseMode::strict:
      return parse_token(trimmed, variable, "empty response");
    case ParseMode::marker: {
      const auto at = trimmed.rfind(kAnswerMarker);
      if (at == std::string::npos)
        return fail(fmt::format("no {} marker in response", text::trim(kAnswerMarker)));
      auto rest = trimmed.substr(at + std::string(kAnswerMarker).size());
      const auto line_end = rest.find('\n');
      if (line_end != std::string::npos) rest = rest.substr(0, line_end);
      return parse_token(rest, variable, "nothing after the FINAL ANSWER marker");
    }
    case ParseMode::structured:
      return parse_structured(trimmed, variable);
  }
  return fail("unknown parse mode");
}

}  // namespace ca::prompts
