#pragma once

// Scripted gateway providers for runner tests: deterministic coding with
// controllable interruption, batch corruption, and run-to-run flips.
// Replies are bare codes (or '<id>: <code>' lines for batches), matching
// the runner's plain response modes.

#include <atomic>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gateway/models.hpp"
#include "gateway/provider.hpp"
#include "support/errors.hpp"
#include "support/text.hpp"

namespace testprov {

using CodeRule = std::function<double(const std::string& unit_text)>;

// Unit text of a single-item prompt: everything after the final
// "Text to code:" line, minus a chain-of-thought tail if present.
inline std::string single_unit_text(const std::string& user) {
  const std::string marker = "Text to code:\n";
  const auto at = user.rfind(marker);
  std::string text = at == std::string::npos ? user : user.substr(at + marker.size());
  const auto cut = text.find("\n\nLet's think step by step");
  if (cut != std::string::npos) text = text.substr(0, cut);
  return ca::text::trim(text);
}

struct BatchItem {
  std::string id;
  std::string text;
};

inline std::vector<BatchItem> batch_items(const std::string& user) {
  std::vector<BatchItem> items;
  for (const auto& line : ca::text::split(user, '\n')) {
    if (line.rfind("ITEM ", 0) != 0) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    items.push_back({ca::text::trim(line.substr(5, colon - 5)),
                     ca::text::trim(line.substr(colon + 1))});
  }
  return items;
}

inline bool is_batch_prompt(const std::string& user) {
  return user.rfind("ITEM ", 0) == 0 || user.find("\nITEM ") != std::string::npos;
}

// Codes every unit with `rule`; handles both single and batch prompts.
class RuleProvider : public ca::gateway::Provider {
 public:
  explicit RuleProvider(CodeRule rule) : rule_(std::move(rule)) {}

  ca::gateway::ChatResult chat(const ca::gateway::ChatRequest& request) override {
    ++calls_;
    ca::gateway::ChatResult result;
    if (is_batch_prompt(request.user)) {
      std::vector<std::string> lines;
      for (const auto& item : batch_items(request.user))
        lines.push_back(item.id + ": " + ca::text::format_value(code_for(item)));
      result.content = ca::text::join(lines, "\n");
    } else {
      result.content = ca::text::format_value(rule_(single_unit_text(request.user)));
    }
    result.prompt_tokens = ca::gateway::estimate_tokens_for_text(request.user);
    result.completion_tokens = ca::gateway::estimate_tokens_for_text(result.content);
    return result;
  }

  std::string describe() const override { return "rule"; }
  std::size_t calls() const { return calls_.load(); }

 protected:
  virtual double code_for(const BatchItem& item) { return rule_(item.text); }

  CodeRule rule_;
  std::atomic<std::size_t> calls_{0};  // waves may call concurrently
};

// Answers `budget` calls normally, then throws on every later call;
// simulates a crash mid-run for interrupt-and-resume tests.
class InterruptingProvider : public RuleProvider {
 public:
  InterruptingProvider(CodeRule rule, std::size_t budget)
      : RuleProvider(std::move(rule)), budget_(budget) {}

  ca::gateway::ChatResult chat(const ca::gateway::ChatRequest& request) override {
    if (answered_ >= budget_)
      throw ca::Error(ca::ErrorCode::internal, "scripted interruption");
    ++answered_;
    return RuleProvider::chat(request);
  }

 private:
  std::size_t budget_ = 0;
  std::size_t answered_ = 0;
};

// Batch-only corruptor: during one whole permutation pass it miscodes the
// middle third of every batch (wrong but in-domain codes); every other
// pass answers correctly. Passes are located by call index, which works
// because the runner issues batch calls sequentially.
class MiddleThirdCorruptor : public RuleProvider {
 public:
  MiddleThirdCorruptor(CodeRule rule, std::function<double(double)> corrupt,
                       std::size_t batches_per_permutation, std::size_t corrupt_permutation)
      : RuleProvider(std::move(rule)),
        corrupt_(std::move(corrupt)),
        batches_per_permutation_(batches_per_permutation),
        corrupt_permutation_(corrupt_permutation) {}

  ca::gateway::ChatResult chat(const ca::gateway::ChatRequest& request) override {
    const std::size_t batch_index = batch_calls_;
    if (is_batch_prompt(request.user)) ++batch_calls_;
    corrupt_this_call_ =
        is_batch_prompt(request.user) &&
        batch_index / batches_per_permutation_ == corrupt_permutation_;
    ++calls_;
    ca::gateway::ChatResult result;
    const auto items = batch_items(request.user);
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < items.size(); ++i) {
      double code = rule_(items[i].text);
      const bool in_middle_third =
          i >= items.size() / 3 && i < 2 * items.size() / 3;
      if (corrupt_this_call_ && in_middle_third) code = corrupt_(code);
      lines.push_back(items[i].id + ": " + ca::text::format_value(code));
    }
    result.content = ca::text::join(lines, "\n");
    result.prompt_tokens = ca::gateway::estimate_tokens_for_text(request.user);
    result.completion_tokens = ca::gateway::estimate_tokens_for_text(result.content);
    return result;
  }

 private:
  std::function<double(double)> corrupt_;
  std::size_t batches_per_permutation_ = 1;
  std::size_t corrupt_permutation_ = 0;
  std::size_t batch_calls_ = 0;
  bool corrupt_this_call_ = false;
};

// Single-mode provider that answers by rule except that the second time
// `flip_unit` comes past it returns `flip_to`; scripts exactly one
// run-to-run disagreement for intracoder tests.
class FlipSecondVisit : public RuleProvider {
 public:
  FlipSecondVisit(CodeRule rule, std::string flip_unit_text, double flip_to)
      : RuleProvider(std::move(rule)),
        flip_unit_text_(std::move(flip_unit_text)),
        flip_to_(flip_to) {}

  ca::gateway::ChatResult chat(const ca::gateway::ChatRequest& request) override {
    const std::string text = single_unit_text(request.user);
    auto result = RuleProvider::chat(request);
    if (text == flip_unit_text_ && ++visits_ == 2)
      result.content = ca::text::format_value(flip_to_);
    return result;
  }

 private:
  std::string flip_unit_text_;
  double flip_to_ = 0.0;
  std::size_t visits_ = 0;
};

}  // namespace testprov
