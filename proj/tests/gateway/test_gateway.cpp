#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "gateway/client.hpp"
#include "gateway/models.hpp"
#include "gateway/provider.hpp"
#include "support/errors.hpp"
#include "support/text.hpp"

using ca::gateway::ChatRequest;
using ca::gateway::MockScript;
using ca::gateway::ModelSpec;
using ca::gateway::Quantization;
using ca::text::contains;
using nlohmann::json;

TEST_CASE("estimators: words to tokens at 0.75 words per token") {
  CHECK(ca::gateway::estimate_tokens(750000) == 1000000);
  CHECK(ca::gateway::estimate_tokens(0) == 0);
  CHECK(ca::gateway::estimate_tokens(3) == 4);
  CHECK(ca::gateway::estimate_tokens(1) == 2);  // ceil(1.33)
  CHECK(ca::gateway::estimate_tokens_for_text("alpha beta gamma") ==
        ca::gateway::estimate_tokens(3));
}

TEST_CASE("estimators: cost in USD per million tokens") {
  CHECK(ca::gateway::estimate_cost_usd(1000000, 2.50) == 2.50);
  CHECK(ca::gateway::estimate_cost_usd(0, 10.0) == 0.0);
  CHECK(ca::gateway::estimate_cost_usd(500000, 3.0) == doctest::Approx(1.5));
  CHECK_THROWS_WITH_AS(ca::gateway::estimate_cost_usd(10, -1.0),
                       "price must be non-negative", ca::Error);
}

TEST_CASE("estimators: VRAM by parameter count and quantization") {
  CHECK(ca::gateway::estimate_vram_gb(7.0, Quantization::none) == 14.0);
  CHECK(ca::gateway::estimate_vram_gb(7.0, Quantization::four_bit) == 4.5);
  CHECK(ca::gateway::estimate_vram_gb(70.0, Quantization::none) == 140.0);
  CHECK_THROWS_WITH_AS(ca::gateway::estimate_vram_gb(0.0, Quantization::none),
                       "model size in billions must be positive", ca::Error);
}

TEST_CASE("estimators: runtime projection scales linearly") {
  // 0.852 s/item over 1,000 items is about 14.2 minutes...
  const double small = ca::gateway::project_runtime_seconds(0.852, 1000);
  CHECK(std::abs(small / 60.0 - 14.2) / 14.2 < 0.01);
  // ...and over 3.5 million items about 828 hours.
  const double large = ca::gateway::project_runtime_seconds(0.852, 3500000);
  CHECK(std::abs(large / 3600.0 - 828.0) / 828.0 < 0.01);
  CHECK_THROWS_WITH_AS(ca::gateway::project_runtime_seconds(-0.1, 10),
                       "per-item seconds must be non-negative", ca::Error);
}

namespace {

ModelSpec mock_spec(const std::string& name = "mock-model") {
  ModelSpec spec;
  spec.name = name;
  spec.provider = "mock";
  spec.requires_key = false;
  spec.open_weights = true;
  return spec;
}

}  // namespace

TEST_CASE("screening: each requirement produces a named reason") {
  ModelSpec spec = mock_spec();
  spec.context_window = 2048;
  spec.price_per_mtok_input = 5.0;
  spec.price_per_mtok_output = 15.0;
  spec.size_billion = 70.0;
  spec.open_weights = false;

  ca::gateway::ScreeningRequirements req;
  req.min_context_tokens = 8000;
  req.require_open_weights = true;
  req.max_price_per_mtok = 4.0;
  req.max_vram_gb = 24.0;
  req.quantization = Quantization::four_bit;

  const auto result = ca::gateway::screen_model(spec, req);
  CHECK_FALSE(result.eligible);
  CHECK(result.model == "mock-model");
  REQUIRE(result.reasons.size() == 5);
  CHECK(result.reasons[0] == "context window 2048 below required 8000");
  CHECK(contains(result.reasons[1], "closed weights"));
  CHECK(contains(result.reasons[2], "input price 5"));
  CHECK(contains(result.reasons[3], "output price 15"));
  CHECK(result.reasons[4] == "needs 36 GB VRAM at quantization 4bit, above the 24 GB budget");

  const auto j = result.to_json();
  CHECK(j["model"] == "mock-model");
  CHECK(j["eligible"] == false);
  CHECK(j["reasons"].size() == 5);
}

TEST_CASE("screening: zero requirements pass everything") {
  ModelSpec spec = mock_spec();
  spec.context_window = 1;
  spec.price_per_mtok_input = 99.0;
  const auto result = ca::gateway::screen_model(spec, {});
  CHECK(result.eligible);
  CHECK(result.reasons.empty());
}

TEST_CASE("screening: undisclosed size cannot be VRAM-screened") {
  ModelSpec spec = mock_spec();
  spec.size_billion = 0.0;  // undisclosed
  ca::gateway::ScreeningRequirements req;
  req.max_vram_gb = 24.0;
  const auto result = ca::gateway::screen_model(spec, req);
  // No fabricated estimate: the check is skipped for unknown sizes.
  CHECK(result.eligible);
}

TEST_CASE("registry: round-trip, lookups, and validation") {
  const json doc = {
      {"models",
       {{{"name", "coder-a"},
         {"provider", "mock"},
         {"mock", {{"default_code", 1.0}}}},
        {{"name", "remote-b"},
         {"provider", "openai"},
         {"endpoint", "https://api.example.com/v1/chat/completions"},
         {"context_window", 128000},
         {"price_per_mtok_input", 2.5},
         {"price_per_mtok_output", 10.0}}}}};
  const auto registry = ca::gateway::Registry::from_json(doc);
  REQUIRE(registry.models().size() == 2);
  CHECK(registry.find("coder-a") != nullptr);
  CHECK(registry.find("ghost") == nullptr);
  CHECK_THROWS_WITH_AS(registry.require("ghost"), "model 'ghost' is not in the registry",
                       ca::Error);

  // requires_key defaults: mock/local run keyless, remote providers do not.
  CHECK_FALSE(registry.require("coder-a").requires_key);
  CHECK(registry.require("remote-b").requires_key);

  const auto back = ca::gateway::Registry::from_json(registry.to_json());
  CHECK(back.to_json().dump() == registry.to_json().dump());

  CHECK_THROWS_WITH_AS(ca::gateway::Registry::from_json(json::array()),
                       "registry must be a JSON object with a 'models' array", ca::Error);

  json dup = doc;
  dup["models"][1]["name"] = "coder-a";
  CHECK_THROWS_WITH_AS(ca::gateway::Registry::from_json(dup),
                       "duplicate model name 'coder-a'", ca::Error);

  json nameless = doc;
  nameless["models"][0].erase("name");
  CHECK_THROWS_WITH_AS(ca::gateway::Registry::from_json(nameless),
                       "model entry missing field 'name'", ca::Error);

  json keyless_remote = doc;
  keyless_remote["models"][1].erase("endpoint");
  CHECK_THROWS_WITH_AS(ca::gateway::Registry::from_json(keyless_remote),
                       "model 'remote-b' has provider 'openai' but no endpoint",
                       ca::Error);
}

TEST_CASE("credentials: environment variable naming and resolution") {
  CHECK(ca::gateway::credential_env_name("openai") == "CA_OPENAI_KEY");
  CHECK(ca::gateway::credential_env_name("my-provider") == "CA_MY_PROVIDER_KEY");
  CHECK(ca::gateway::credential_env_name("Local") == "CA_LOCAL_KEY");

  ModelSpec keyless = mock_spec();
  CHECK(ca::gateway::resolve_credential(keyless).empty());

  ModelSpec remote;
  remote.name = "remote";
  remote.provider = "testvendor";
  remote.endpoint = "https://api.test/v1";
  remote.requires_key = true;

  unsetenv("CA_TESTVENDOR_KEY");
  CHECK_THROWS_WITH_AS(
      ca::gateway::resolve_credential(remote),
      "credentials missing for provider 'testvendor': set environment variable "
      "CA_TESTVENDOR_KEY",
      ca::Error);

  setenv("CA_TESTVENDOR_KEY", "sk-test-123", 1);
  CHECK(ca::gateway::resolve_credential(remote) == "sk-test-123");
  unsetenv("CA_TESTVENDOR_KEY");
}

TEST_CASE("generation params: validation and serialization") {
  ca::gateway::GenerationParams params;
  params.validate();  // defaults are fine

  params.temperature = 2.5;
  CHECK_THROWS_WITH_AS(params.validate(), "temperature must be in [0, 2]", ca::Error);
  params = {};
  params.top_p = 0.0;
  CHECK_THROWS_WITH_AS(params.validate(), "top_p must be in (0, 1]", ca::Error);
  params = {};
  params.max_tokens = 0;
  CHECK_THROWS_WITH_AS(params.validate(), "max_tokens must be at least 1", ca::Error);

  params = {};
  params.seed = 42;
  const auto j = params.to_json();
  CHECK(ca::gateway::params_from_json(j).to_json().dump() == j.dump());
  CHECK(j["seed"] == 42);
}

namespace {

ChatRequest single_request(const std::string& unit_text,
                           const std::string& extra = "") {
  ChatRequest request;
  request.model = "mock-model";
  request.system = "You are a careful coder.";
  request.user = "Task: code the text for the variable 'sentiment'.\n\n"
                 "Respond with the code only, nothing else.\n\n"
                 "Text to code:\n" +
                 unit_text + extra;
  return request;
}

MockScript sentiment_script() {
  MockScript script;
  script.rules = {{"love", 1.0}, {"hate", 0.0}};
  script.default_code = 2.0;
  script.latency_seconds = 0.004;
  return script;
}

}  // namespace

TEST_CASE("mock provider: keyword rules pick the code deterministically") {
  ca::gateway::MockProvider provider(sentiment_script());
  CHECK(provider.chat(single_request("I love this game")).content == "1");
  CHECK(provider.chat(single_request("I hate the DLC pricing")).content == "0");
  CHECK(provider.chat(single_request("the patch notes are out")).content == "2");
  // First rule wins on overlap.
  CHECK(provider.chat(single_request("love it or hate it")).content == "1");
  CHECK(provider.call_count() == 4);
  CHECK(provider.chat(single_request("x")).latency_seconds == 0.004);
}

TEST_CASE("mock provider: reply shape follows the prompt") {
  ca::gateway::MockProvider provider(sentiment_script());

  auto cot = single_request("I love this game",
                            "\n\nLet's think step by step, then give the verdict on a "
                            "final line formatted exactly as 'FINAL ANSWER: <code>'.");
  const auto cot_reply = provider.chat(cot);
  CHECK(contains(cot_reply.content, "FINAL ANSWER: 1"));

  auto structured = single_request("I love this game");
  structured.user += "\n\nRespond with a JSON object {\"code\": <code>, \"confidence\": "
                     "<0..1>} and nothing else.";
  const auto json_reply = provider.chat(structured);
  const auto parsed = json::parse(json_reply.content);
  CHECK(parsed["code"] == 1.0);
  CHECK(parsed["confidence"] == 0.9);  // default mock confidence
}

TEST_CASE("mock provider: scripted failures, prose, and truncation") {
  auto script = sentiment_script();
  script.fail_first = 2;
  ca::gateway::MockProvider failing(script);
  CHECK_THROWS_AS(failing.chat(single_request("a")), ca::Error);
  try {
    failing.chat(single_request("a"));
  } catch (const ca::Error& error) {
    CHECK(error.code() == ca::ErrorCode::transport);
    CHECK(contains(error.what(), "scripted transport failure"));
  }
  CHECK(failing.chat(single_request("I love it")).content == "1");

  auto prose_script = sentiment_script();
  prose_script.prose_first = {"stubborn"};
  ca::gateway::MockProvider prosey(prose_script);
  const auto first = prosey.chat(single_request("a stubborn case"));
  CHECK_FALSE(ca::text::parse_value(first.content).has_value());  // prose, not a code
  const auto second = prosey.chat(single_request("a stubborn case"));
  CHECK(second.content == "2");

  auto cut_script = sentiment_script();
  cut_script.truncate_after = 20;
  ca::gateway::MockProvider cutting(cut_script);
  auto cot = single_request("I love this game",
                            "\n\nLet's think step by step, then give the verdict on a "
                            "final line formatted exactly as 'FINAL ANSWER: <code>'.");
  const auto truncated = cutting.chat(cot);
  CHECK(truncated.finish_reason == "length");
  CHECK(truncated.truncated());
  CHECK(truncated.content.size() == 20);
}

TEST_CASE("mock provider: batch prompts get one line per item") {
  ca::gateway::MockProvider provider(sentiment_script());
  ChatRequest request;
  request.user = "Task: code each item below for the variable 'sentiment'.\n\n"
                 "Respond with one line per item, formatted '<id>: <code>', and nothing "
                 "else.\n\nItems:\n"
                 "ITEM u1: I love this\n"
                 "ITEM u2: I hate this\n"
                 "ITEM u3: patch notes are out";
  const auto reply = provider.chat(request);
  CHECK(reply.content == "u1: 1\nu2: 0\nu3: 2");
}

namespace {

// Sleeper that records requested delays instead of waiting.
struct FakeSleeper {
  std::shared_ptr<std::vector<double>> delays = std::make_shared<std::vector<double>>();
  void operator()(double seconds) const { delays->push_back(seconds); }
};

struct CredentialFailer : ca::gateway::Provider {
  ca::gateway::ChatResult chat(const ChatRequest&) override {
    throw ca::Error(ca::ErrorCode::credentials, "authentication rejected");
  }
  std::string describe() const override { return "denier"; }
};

}  // namespace

TEST_CASE("client: transport errors retry with exponential backoff") {
  auto script = sentiment_script();
  script.fail_first = 2;
  FakeSleeper sleeper;
  ca::gateway::Client client(std::make_shared<ca::gateway::MockProvider>(script),
                             {1.0, 2.0, 3}, sleeper);
  const auto reply = client.chat(single_request("I love it"));
  CHECK(reply.content == "1");
  CHECK(*sleeper.delays == std::vector<double>{1.0, 2.0});
}

TEST_CASE("client: attempts are bounded") {
  auto script = sentiment_script();
  script.fail_first = 3;
  FakeSleeper sleeper;
  ca::gateway::Client client(std::make_shared<ca::gateway::MockProvider>(script),
                             {0.5, 2.0, 3}, sleeper);
  CHECK_THROWS_AS(client.chat(single_request("x")), ca::Error);
  CHECK(sleeper.delays->size() == 2);  // two waits between three attempts
}

TEST_CASE("client: credential errors are never retried") {
  FakeSleeper sleeper;
  ca::gateway::Client client(std::make_shared<CredentialFailer>(), {1.0, 2.0, 5}, sleeper);
  CHECK_THROWS_AS(client.chat(single_request("x")), ca::Error);
  CHECK(sleeper.delays->empty());
}

TEST_CASE("client: constructor guards") {
  CHECK_THROWS_WITH_AS(ca::gateway::Client(nullptr), "provider is null", ca::Error);
  CHECK_THROWS_WITH_AS(
      ca::gateway::Client(std::make_shared<CredentialFailer>(), {1.0, 2.0, 0}),
      "retry policy needs at least 1 attempt", ca::Error);
}

TEST_CASE("http provider: endpoint scheme is validated") {
  CHECK_THROWS_WITH_AS(ca::gateway::HttpProvider("ftp://files.example.com", ""),
                       "endpoint 'ftp://files.example.com' must start with http:// or "
                       "https://",
                       ca::Error);
}

TEST_CASE("http provider: speaks the chat-completions protocol") {
  httplib::Server server;
  json seen_body;
  std::string seen_auth;

  server.Post("/v1/chat/completions",
              [&](const httplib::Request& req, httplib::Response& res) {
                seen_body = json::parse(req.body);
                seen_auth = req.get_header_value("Authorization");
                const json reply = {
                    {"choices",
                     {{{"message", {{"role", "assistant"}, {"content", "1"}}},
                       {"finish_reason", "stop"}}}},
                    {"usage", {{"prompt_tokens", 41}, {"completion_tokens", 2}}}};
                res.set_content(reply.dump(), "application/json");
              });
  server.Post("/flaky", [](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
  });
  server.Post("/locked", [](const httplib::Request&, httplib::Response& res) {
    res.status = 401;
  });
  server.Post("/wrong", [](const httplib::Request&, httplib::Response& res) {
    res.status = 404;
    res.set_content("not here", "text/plain");
  });
  server.Post("/garbled", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json at all", "application/json");
  });

  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread serving([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string base = "http://127.0.0.1:" + std::to_string(port);

  ca::gateway::HttpProvider provider(base + "/v1/chat/completions", "sk-test-456");
  ChatRequest request = single_request("I love this game");
  request.params.temperature = 0.2;
  request.params.max_tokens = 16;
  request.params.seed = 9;
  const auto reply = provider.chat(request);
  CHECK(reply.content == "1");
  CHECK(reply.finish_reason == "stop");
  CHECK(reply.prompt_tokens == 41);
  CHECK(reply.completion_tokens == 2);

  CHECK(seen_auth == "Bearer sk-test-456");
  CHECK(seen_body["model"] == "mock-model");
  REQUIRE(seen_body["messages"].size() == 2);
  CHECK(seen_body["messages"][0]["role"] == "system");
  CHECK(seen_body["messages"][1]["role"] == "user");
  CHECK(seen_body["temperature"] == 0.2);
  CHECK(seen_body["max_tokens"] == 16);
  CHECK(seen_body["seed"] == 9);

  const auto expect_code = [&](const std::string& path, ca::ErrorCode code) {
    ca::gateway::HttpProvider p(base + path, "");
    try {
      p.chat(single_request("x"));
      FAIL("expected an error for " << path);
    } catch (const ca::Error& error) {
      CHECK(error.code() == code);
    }
  };
  expect_code("/flaky", ca::ErrorCode::transport);     // 503
  expect_code("/locked", ca::ErrorCode::credentials);  // 401
  expect_code("/wrong", ca::ErrorCode::invalid_argument);
  expect_code("/garbled", ca::ErrorCode::parse);

  server.stop();
  serving.join();

  // A dead endpoint is a transport error (retryable).
  ca::gateway::HttpProvider dead(base + "/v1/chat/completions", "");
  dead.set_timeouts(0.5, 0.5);
  try {
    dead.chat(single_request("x"));
    FAIL("expected a transport error");
  } catch (const ca::Error& error) {
    CHECK(error.code() == ca::ErrorCode::transport);
  }
}

TEST_CASE("make_provider: dispatches on the provider field") {
  const auto mock = ca::gateway::make_provider(mock_spec());
  CHECK(mock->describe() == "mock");

  ModelSpec remote;
  remote.name = "remote";
  remote.provider = "vendor";
  remote.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  remote.requires_key = false;
  const auto http = ca::gateway::make_provider(remote);
  CHECK(contains(http->describe(), "http://127.0.0.1:1"));
}
