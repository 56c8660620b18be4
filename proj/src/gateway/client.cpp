#include "gateway/client.hpp"

#include <chrono>
#include <thread>

#include <fmt/format.h>

#include "support/errors.hpp"

namespace ca::gateway {

Sleeper real_sleeper() {
  return [](double seconds) {
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  };
}

Client::Client(std::shared_ptr<Provider> provider, RetryPolicy policy, Sleeper sleeper)
    : provider_(std::move(provider)), policy_(policy), sleeper_(std::move(sleeper)) {
  if (provider_ == nullptr)
    throw Error(ErrorCode::invalid_argument, "provider is null");
  if (policy_.max_attempts == 0)
    throw Error(ErrorCode::invalid_argument,
                         "retry policy needs at least 1 attempt");
}

ChatResult Client::chat(const ChatRequest& request) {
  double delay = policy_.base_delay_seconds;
  for (std::size_t attempt = 1;; ++attempt) {
    try {
      return provider_->chat(request);
    } catch (const Error& error) {
      if (error.code() != ErrorCode::transport || attempt >= policy_.max_attempts)
        throw;
      sleeper_(delay);
      delay *= policy_.factor;
    }
  }
}

}  // namespace ca::gateway
