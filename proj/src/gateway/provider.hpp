#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "gateway/models.hpp"

namespace ca::gateway {

struct GenerationParams {
  double temperature = 0.0;  // deterministic by default
  double top_p = 1.0;
  std::size_t max_tokens = 512;
  std::optional<std::uint64_t> seed;

  void validate() const;
  nlohmann::json to_json() const;
};

GenerationParams params_from_json(const nlohmann::json& j);

struct ChatRequest {
  std::string model;
  std::string system;
  std::string user;
  GenerationParams params;
};

struct ChatResult {
  std::string content;
  std::string finish_reason = "stop";  // "length" marks truncation, not an error
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  double latency_seconds = 0.0;

  bool truncated() const { return finish_reason == "length"; }
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual ChatResult chat(const ChatRequest& request) = 0;
  virtual std::string describe() const = 0;
};

/// Deterministic offline coder driven by a MockScript: keyword rules pick
/// the code, reply shape follows the prompt (bare code, FINAL ANSWER
/// line, or JSON), and failure/prose/truncation behaviours are scripted.
class MockProvider : public Provider {
 public:
  explicit MockProvider(MockScript script);

  ChatResult chat(const ChatRequest& request) override;
  std::string describe() const override { return "mock"; }
  std::size_t call_count() const;

 private:
  double code_for(const std::string& text) const;
  std::string reply_for(const ChatRequest& request, const std::string& unit_text);

  MockScript script_;
  std::size_t calls_ = 0;
  std::map<std::uint64_t, std::size_t> seen_units_;
  mutable std::mutex mutex_;
};

/// Chat-completions client over HTTP(S). Maps HTTP 401/403 to credential
/// errors (never retried), 408/429/5xx and connection failures to
/// transport errors (retryable), and other statuses to invalid-argument
/// errors.
class HttpProvider : public Provider {
 public:
  HttpProvider(std::string endpoint, std::string api_key);

  ChatResult chat(const ChatRequest& request) override;
  std::string describe() const override;

  void set_timeouts(double connect_seconds, double read_seconds);

 private:
  std::string endpoint_;
  std::string base_;  // scheme://host[:port]
  std::string path_;
  std::string api_key_;
  double connect_seconds_ = 10.0;
  double read_seconds_ = 120.0;
};

std::shared_ptr<Provider> make_provider(const ModelSpec& spec);

}  // namespace ca::gateway
