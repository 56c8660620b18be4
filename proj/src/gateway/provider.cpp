#include "gateway/provider.hpp"

#include <chrono>

#include <fmt/format.h>
#include <httplib.h>

#include "support/errors.hpp"
#include "support/hash.hpp"
#include "support/text.hpp"

namespace ca::gateway {

void GenerationParams::validate() const {
  if (temperature < 0.0 || temperature > 2.0)
    throw Error(ErrorCode::invalid_argument,
                         "temperature must be in [0, 2]");
  if (!(top_p > 0.0) || top_p > 1.0)
    throw Error(ErrorCode::invalid_argument, "top_p must be in (0, 1]");
  if (max_tokens == 0)
    throw Error(ErrorCode::invalid_argument, "max_tokens must be at least 1");
}

nlohmann::json GenerationParams::to_json() const {
  nlohmann::ordered_json j;
  j["temperature"] = temperature;
  j["top_p"] = top_p;
  j["max_tokens"] = max_tokens;
  if (seed.has_value()) j["seed"] = *seed;
  return j;
}

GenerationParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw Error(ErrorCode::parse, "generation params must be a JSON object");
  GenerationParams params;
  if (j.contains("temperature")) params.temperature = j.at("temperature").get<double>();
  if (j.contains("top_p")) params.top_p = j.at("top_p").get<double>();
  if (j.contains("max_tokens")) params.max_tokens = j.at("max_tokens").get<std::size_t>();
  if (j.contains("seed") && !j.at("seed").is_null())
    params.seed = j.at("seed").get<std::uint64_t>();
  params.validate();
  return params;
}

MockProvider::MockProvider(MockScript script) : script_(std::move(script)) {}

std::size_t MockProvider::call_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return calls_;
}

double MockProvider::code_for(const std::string& text) const {
  for (const auto& rule : script_.rules)
    if (text::contains(text, rule.contains)) return rule.code;
  return script_.default_code;
}

namespace {

// The unit text sits after the "Text to code:" header; trailing directive
// or retry-reminder blocks are not part of it.
std::string extract_unit_text(const std::string& user) {
  static const std::string kHeader = "Text to code:\n";
  const auto at = user.find(kHeader);
  if (at == std::string::npos) return user;
  auto text = user.substr(at + kHeader.size());
  for (const char* stop : {"\n\nLet's think step by step", "\n\nReminder:"}) {
    const auto cut = text.find(stop);
    if (cut != std::string::npos) text = text.substr(0, cut);
  }
  return text;
}

bool looks_like_batch(const std::string& user) {
  if (user.rfind("ITEM ", 0) == 0) return true;
  return user.find("\nITEM ") != std::string::npos;
}

}  // namespace

std::string MockProvider::reply_for(const ChatRequest& request, const std::string& unit_text) {
  const double code = code_for(unit_text);
  if (text::contains(request.user, "FINAL ANSWER"))
    return fmt::format(
        "The categories were weighed against the passage step by step.\nFINAL ANSWER: {}",
        text::format_value(code));
  if (text::contains(request.user, "JSON object")) {
    nlohmann::ordered_json j;
    j["code"] = code;
    j["confidence"] = script_.confidence.value_or(0.9);
    return j.dump();
  }
  return text::format_value(code);
}

ChatResult MockProvider::chat(const ChatRequest& request) {
  std::lock_guard<std::mutex> lock(mutex_);
  request.params.validate();
  ++calls_;
  if (calls_ <= script_.fail_first)
    throw Error(ErrorCode::transport,
                         fmt::format("scripted transport failure (call {})", calls_));

  ChatResult result;
  result.latency_seconds = script_.latency_seconds;

  if (looks_like_batch(request.user)) {
    std::string content;
    for (const auto& line : text::split(request.user, '\n')) {
      if (line.rfind("ITEM ", 0) != 0) continue;
      const auto colon = line.find(": ", 5);
      if (colon == std::string::npos) continue;
      const auto id = line.substr(5, colon - 5);
      const auto text = line.substr(colon + 2);
      if (!content.empty()) content += "\n";
      content += fmt::format("{}: {}", id, text::format_value(code_for(text)));
    }
    result.content = content;
  } else {
    const auto unit_text = extract_unit_text(request.user);
    bool prose = false;
    for (const auto& marker : script_.prose_first) {
      if (!text::contains(unit_text, marker)) continue;
      const auto key = hash::fnv1a64(unit_text);
      if (seen_units_[key]++ == 0) prose = true;
      break;
    }
    result.content =
        prose ? "The passage touches several themes and resists a quick single label here."
              : reply_for(request, unit_text);
  }

  if (script_.truncate_after > 0 && result.content.size() > script_.truncate_after) {
    result.content = result.content.substr(0, script_.truncate_after);
    result.finish_reason = "length";
  }
  result.prompt_tokens = estimate_tokens_for_text(request.system) +
                         estimate_tokens_for_text(request.user);
  result.completion_tokens = estimate_tokens_for_text(result.content);
  return result;
}

HttpProvider::HttpProvider(std::string endpoint, std::string api_key)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)) {
  const auto scheme_end = endpoint_.find("://");
  if (scheme_end == std::string::npos ||
      (endpoint_.rfind("http://", 0) != 0 && endpoint_.rfind("https://", 0) != 0))
    throw Error(ErrorCode::invalid_argument,
                         fmt::format("endpoint '{}' must start with http:// or https://",
                                     endpoint_));
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (endpoint_.rfind("https://", 0) == 0)
    throw Error(ErrorCode::unsupported,
                         "https endpoints need TLS support, which is not compiled in");
#endif
  const auto path_start = endpoint_.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    base_ = endpoint_;
    path_ = "/";
  } else {
    base_ = endpoint_.substr(0, path_start);
    path_ = endpoint_.substr(path_start);
  }
}

std::string HttpProvider::describe() const { return fmt::format("http {}", endpoint_); }

void HttpProvider::set_timeouts(double connect_seconds, double read_seconds) {
  connect_seconds_ = connect_seconds;
  read_seconds_ = read_seconds;
}

ChatResult HttpProvider::chat(const ChatRequest& request) {
  request.params.validate();
  nlohmann::ordered_json body;
  body["model"] = request.model;
  body["messages"] = nlohmann::ordered_json::array(
      {{{"role", "system"}, {"content", request.system}},
       {{"role", "user"}, {"content", request.user}}});
  body["temperature"] = request.params.temperature;
  body["top_p"] = request.params.top_p;
  body["max_tokens"] = request.params.max_tokens;
  if (request.params.seed.has_value()) body["seed"] = *request.params.seed;

  httplib::Client client(base_);
  client.set_connection_timeout(std::chrono::milliseconds(
      static_cast<long long>(connect_seconds_ * 1000.0)));
  client.set_read_timeout(
      std::chrono::milliseconds(static_cast<long long>(read_seconds_ * 1000.0)));
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const auto started = std::chrono::steady_clock::now();
  auto response = client.Post(path_, headers, body.dump(), "application/json");
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);

  if (!response)
    throw Error(
        ErrorCode::transport,
        fmt::format("connection to {} failed: {}", base_, httplib::to_string(response.error())));
  if (response->status == 401 || response->status == 403)
    throw Error(
        ErrorCode::credentials,
        fmt::format("authentication rejected by {} (HTTP {})", base_, response->status));
  if (response->status == 408 || response->status == 429 || response->status >= 500)
    throw Error(ErrorCode::transport,
                         fmt::format("HTTP {} from {}", response->status, base_));
  if (response->status != 200)
    throw Error(
        ErrorCode::invalid_argument,
        fmt::format("HTTP {} from {}: {}", response->status, base_,
                    response->body.substr(0, 200)));

  nlohmann::json j = nlohmann::json::parse(response->body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("choices") ||
      !j.at("choices").is_array() || j.at("choices").empty())
    throw Error(ErrorCode::parse,
                         fmt::format("malformed completion response from {}", base_));
  const auto& choice = j.at("choices").at(0);
  if (!choice.contains("message") || !choice.at("message").contains("content"))
    throw Error(ErrorCode::parse,
                         fmt::format("completion response from {} has no message content",
                                     base_));

  ChatResult result;
  result.content = choice.at("message").at("content").get<std::string>();
  if (choice.contains("finish_reason") && choice.at("finish_reason").is_string())
    result.finish_reason = choice.at("finish_reason").get<std::string>();
  if (j.contains("usage") && j.at("usage").is_object()) {
    const auto& usage = j.at("usage");
    if (usage.contains("prompt_tokens"))
      result.prompt_tokens = usage.at("prompt_tokens").get<std::size_t>();
    if (usage.contains("completion_tokens"))
      result.completion_tokens = usage.at("completion_tokens").get<std::size_t>();
  }
  if (result.prompt_tokens == 0)
    result.prompt_tokens = estimate_tokens_for_text(request.system) +
                           estimate_tokens_for_text(request.user);
  if (result.completion_tokens == 0)
    result.completion_tokens = estimate_tokens_for_text(result.content);
  result.latency_seconds = elapsed.count();
  return result;
}

std::shared_ptr<Provider> make_provider(const ModelSpec& spec) {
  if (spec.provider == "mock") return std::make_shared<MockProvider>(spec.mock);
  return std::make_shared<HttpProvider>(spec.endpoint, resolve_credential(spec));
}

}  // namespace ca::gateway
