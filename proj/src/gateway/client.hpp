#pragma once

#include <functional>
#include <memory>

#include "gateway/provider.hpp"

namespace ca::gateway {

struct RetryPolicy {
  double base_delay_seconds = 1.0;
  double factor = 2.0;
  std::size_t max_attempts = 3;
};

/// Injectable so tests observe backoff without waiting.
using Sleeper = std::function<void(double seconds)>;

Sleeper real_sleeper();

/// Wraps a provider with exponential backoff on transport errors.
/// Credential and argument errors surface immediately; truncation is a
/// finish reason, never a retry trigger.
class Client {
 public:
  Client(std::shared_ptr<Provider> provider, RetryPolicy policy = {},
         Sleeper sleeper = real_sleeper());

  ChatResult chat(const ChatRequest& request);
  Provider& provider() { return *provider_; }

 private:
  std::shared_ptr<Provider> provider_;
  RetryPolicy policy_;
  Sleeper sleeper_;
};

}  // namespace ca::gateway
