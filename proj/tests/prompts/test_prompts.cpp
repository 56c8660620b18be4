#include <doctest.h>

#include <string>
#include <vector>

#include "common/fixtures.hpp"
#include "prompts/prompts.hpp"
#include "support/errors.hpp"
#include "support/text.hpp"

using ca::prompts::ParseMode;
using ca::prompts::PromptTemplate;
using ca::prompts::ResponseMode;
using ca::text::contains;
using ca::text::count_occurrences;

namespace {

ca::model::CodingUnit tweet_unit() {
  ca::model::CodingUnit unit;
  unit.id = "t1";
  unit.text = "Borderlands 3 melts my GPU and I love every second of it";
  return unit;
}

PromptTemplate zero_shot_template() {
  PromptTemplate tmpl;
  tmpl.name = "zero_shot";
  tmpl.system = fixtures::kSentimentSystem;
  return tmpl;
}

}  // namespace

TEST_CASE("golden render: sentiment codebook produces the reference prompt") {
  const auto variable = fixtures::sentiment_variable();
  const auto unit = tweet_unit();
  const auto prompt = ca::prompts::render_prompt(zero_shot_template(), variable, unit, {});

  CHECK(prompt.system ==
        "You are a research assistant tasked with analyzing sentiment in texts.");

  // All three category lines, code = label (definition; e.g. examples).
  CHECK(contains(prompt.user,
                 "0 = Negative (The tweet expresses dissatisfaction, criticism, or "
                 "dislike toward Borderlands; e.g. Worst game of the year, what a "
                 "letdown.)"));
  CHECK(contains(prompt.user,
                 "1 = Positive (The tweet expresses praise, enjoyment, or support for "
                 "Borderlands; e.g. Borderlands 3 is an absolute blast!)"));
  CHECK(contains(prompt.user,
                 "2 = Neutral (The tweet neither clearly praises nor criticizes "
                 "Borderlands, or expresses mixed or unrelated opinions; e.g. "
                 "Borderlands is on sale again this week.)"));

  // The unit text fills its slot exactly once.
  CHECK(count_occurrences(prompt.user, unit.text) == 1);
  CHECK(contains(prompt.user, "Text to code:\n" + unit.text));

  // Fixed section order.
  CHECK(prompt.user.rfind("Task: code the text for the variable 'sentiment'.", 0) == 0);
  CHECK(contains(prompt.user, variable.instruction));
  CHECK(contains(prompt.user, "Coding scheme:"));
  CHECK(contains(prompt.user, "Respond with the code only, nothing else."));
  CHECK(prompt.user.find("Coding scheme:") < prompt.user.find("Respond with the code"));
  CHECK(prompt.user.find("Respond with the code") < prompt.user.find("Text to code:"));

  // No chain-of-thought scaffolding in the plain variant.
  CHECK_FALSE(contains(prompt.user, "Let's think step by step"));
  CHECK_FALSE(contains(prompt.user, "FINAL ANSWER"));
}

TEST_CASE("golden render: bare '1' parses to code 1") {
  const auto variable = fixtures::sentiment_variable();
  const auto parsed = ca::prompts::parse_response("1", variable, ParseMode::strict);
  REQUIRE(parsed.ok);
  CHECK(parsed.code == 1.0);
}

TEST_CASE("golden render: chain-of-thought variant appends the reasoning directive") {
  auto tmpl = zero_shot_template();
  tmpl.name = "zero_shot_cot";
  tmpl.chain_of_thought = true;
  const auto prompt =
      ca::prompts::render_prompt(tmpl, fixtures::sentiment_variable(), tweet_unit(), {});
  CHECK(contains(prompt.user, "Let's think step by step"));
  CHECK(contains(prompt.user, "FINAL ANSWER: <code>"));
  // The directive comes after the text to code.
  CHECK(prompt.user.find("Text to code:") < prompt.user.find("Let's think step by step"));
}

TEST_CASE("render: pure function of its inputs") {
  const auto variable = fixtures::sentiment_variable();
  const auto a = ca::prompts::render_prompt(zero_shot_template(), variable, tweet_unit(), {});
  const auto b = ca::prompts::render_prompt(zero_shot_template(), variable, tweet_unit(), {});
  CHECK(a.system == b.system);
  CHECK(a.user == b.user);
  CHECK(a.content_hash == b.content_hash);

  auto other_unit = tweet_unit();
  other_unit.text = "different tweet";
  const auto c = ca::prompts::render_prompt(zero_shot_template(), variable, other_unit, {});
  CHECK(c.content_hash != a.content_hash);
}

TEST_CASE("render: empty template system falls back to the default persona") {
  PromptTemplate tmpl;
  tmpl.name = "zero_shot";
  const auto prompt =
      ca::prompts::render_prompt(tmpl, fixtures::sentiment_variable(), tweet_unit(), {});
  CHECK(contains(prompt.system, "content-analysis coder"));
}

TEST_CASE("render: coding rules are listed in order") {
  auto variable = fixtures::sentiment_variable();
  variable.coding_rules = {"Sarcasm counts as negative.", "Ignore retund mentions."};
  const auto prompt =
      ca::prompts::render_prompt(zero_shot_template(), variable, tweet_unit(), {});
  CHECK(contains(prompt.user, "Rule: Sarcasm counts as negative."));
  CHECK(contains(prompt.user, "Rule: Ignore retund mentions."));
  CHECK(prompt.user.find("Sarcasm") < prompt.user.find("retund"));
}

TEST_CASE("render: numeric variables describe the range instead of categories") {
  ca::model::Variable variable;
  variable.name = "intensity";
  variable.scale = ca::model::MeasurementScale::interval;
  variable.range = ca::model::NumericRange{1.0, 7.0};
  const auto prompt =
      ca::prompts::render_prompt(zero_shot_template(), variable, tweet_unit(), {});
  CHECK(contains(prompt.user, "Report a number between 1 and 7 on the interval scale."));
  CHECK_FALSE(contains(prompt.user, "Coding scheme:"));
}

TEST_CASE("render: few-shot examples appear in order with their codes") {
  auto tmpl = zero_shot_template();
  tmpl.name = "few_shot";
  tmpl.shot_count = 2;
  const std::vector<ca::prompts::FewShotExample> shots = {
      {"This game rules", 1.0, "Praise for the game."},
      {"Refunded after an hour", 0.0, "Strong dissatisfaction."},
  };
  const auto prompt = ca::prompts::render_prompt(tmpl, fixtures::sentiment_variable(),
                                                 tweet_unit(), shots);
  CHECK(contains(prompt.user, "Examples:"));
  CHECK(contains(prompt.user, "Text: This game rules"));
  CHECK(contains(prompt.user, "Code: 1"));
  CHECK(contains(prompt.user, "Text: Refunded after an hour"));
  CHECK(contains(prompt.user, "Code: 0"));
  CHECK(prompt.user.find("This game rules") < prompt.user.find("Refunded"));
  // Rationales only show in chain-of-thought shots.
  CHECK_FALSE(contains(prompt.user, "Reasoning:"));

  auto cot = tmpl;
  cot.name = "few_shot_cot";
  cot.chain_of_thought = true;
  const auto cot_prompt = ca::prompts::render_prompt(cot, fixtures::sentiment_variable(),
                                                     tweet_unit(), shots);
  CHECK(contains(cot_prompt.user, "Reasoning: Praise for the game."));
}

TEST_CASE("render: example count and domain are enforced") {
  auto tmpl = zero_shot_template();
  tmpl.name = "few_shot";
  tmpl.shot_count = 2;
  const auto variable = fixtures::sentiment_variable();
  CHECK_THROWS_WITH_AS(
      ca::prompts::render_prompt(tmpl, variable, tweet_unit(), {{"one", 1.0, ""}}),
      "template 'few_shot' needs 2 examples, got 1", ca::Error);
  CHECK_THROWS_WITH_AS(
      ca::prompts::render_prompt(tmpl, variable, tweet_unit(),
                                 {{"one", 1.0, ""}, {"two", 9.0, ""}}),
      "example 2 code 9 is outside the domain of 'sentiment'", ca::Error);
}

TEST_CASE("render: oversized units fail the character budget") {
  auto tmpl = zero_shot_template();
  tmpl.char_budget = 200;
  auto unit = tweet_unit();
  unit.text = std::string(500, 'x');
  CHECK_THROWS_AS(
      ca::prompts::render_prompt(tmpl, fixtures::sentiment_variable(), unit, {}),
      ca::Error);
  try {
    ca::prompts::render_prompt(tmpl, fixtures::sentiment_variable(), unit, {});
  } catch (const ca::Error& error) {
    CHECK(contains(error.what(), "unit 't1' exceeds prompt budget"));
  }
}

TEST_CASE("render: JSON response mode and justification clauses") {
  auto tmpl = zero_shot_template();
  tmpl.response_mode = ResponseMode::code_json;
  const auto prompt =
      ca::prompts::render_prompt(tmpl, fixtures::sentiment_variable(), tweet_unit(), {});
  CHECK(contains(prompt.user, "Respond with a JSON object"));
  CHECK(contains(prompt.user, "\"code\""));
  CHECK_FALSE(contains(prompt.user, "Respond with the code only"));

  auto justified = zero_shot_template();
  justified.ask_justification = true;
  const auto jp = ca::prompts::render_prompt(justified, fixtures::sentiment_variable(),
                                             tweet_unit(), {});
  CHECK(contains(jp.user, "After the code, add one sentence justifying your choice."));
}

TEST_CASE("variants: the five standard templates") {
  const auto variants = ca::prompts::generate_variants(3, false);
  REQUIRE(variants.size() == 5);
  CHECK(variants[0].name == "zero_shot");
  CHECK(variants[0].shot_count == 0);
  CHECK_FALSE(variants[0].chain_of_thought);
  CHECK(variants[1].name == "one_shot");
  CHECK(variants[1].shot_count == 1);
  CHECK(variants[2].name == "few_shot");
  CHECK(variants[2].shot_count == 3);
  CHECK(variants[3].name == "zero_shot_cot");
  CHECK(variants[3].chain_of_thought);
  CHECK(variants[3].shot_count == 0);
  CHECK(variants[4].name == "few_shot_cot");
  CHECK(variants[4].chain_of_thought);
  CHECK(variants[4].shot_count == 3);

  CHECK_THROWS_WITH_AS(ca::prompts::generate_variants(1, false),
                       "few-shot variants need k >= 2 examples", ca::Error);
}

TEST_CASE("templates: JSON round-trip and validation") {
  auto tmpl = zero_shot_template();
  tmpl.shot_count = 4;
  tmpl.ask_justification = true;
  const auto j = tmpl.to_json();
  const auto back = ca::prompts::template_from_json(j);
  CHECK(back.to_json().dump() == j.dump());

  auto missing = j;
  missing.erase("char_budget");
  CHECK_THROWS_WITH_AS(ca::prompts::template_from_json(missing),
                       "prompt template missing field 'char_budget'", ca::Error);

  auto nameless = j;
  nameless["name"] = "";
  CHECK_THROWS_WITH_AS(ca::prompts::template_from_json(nameless),
                       "prompt template name is empty", ca::Error);

  auto conflicted = j;
  conflicted["chain_of_thought"] = true;
  conflicted["response_mode"] = "code_json";
  CHECK_THROWS_WITH_AS(ca::prompts::template_from_json(conflicted),
                       "chain-of-thought and JSON responses are mutually exclusive",
                       ca::Error);
}

TEST_CASE("parse mode: implied by the template") {
  auto tmpl = zero_shot_template();
  CHECK(ca::prompts::parse_mode_for(tmpl) == ParseMode::strict);
  tmpl.chain_of_thought = true;
  CHECK(ca::prompts::parse_mode_for(tmpl) == ParseMode::marker);
  tmpl.chain_of_thought = false;
  tmpl.response_mode = ResponseMode::code_json;
  CHECK(ca::prompts::parse_mode_for(tmpl) == ParseMode::structured);
}

TEST_CASE("parse: strict mode") {
  const auto variable = fixtures::sentiment_variable();
  CHECK(ca::prompts::parse_response("2", variable, ParseMode::strict).code == 2.0);
  CHECK(ca::prompts::parse_response(" 1 ", variable, ParseMode::strict).code == 1.0);
  CHECK(ca::prompts::parse_response("1.", variable, ParseMode::strict).code == 1.0);

  auto empty = ca::prompts::parse_response("", variable, ParseMode::strict);
  CHECK_FALSE(empty.ok);
  CHECK(empty.reason == "empty response");

  auto prose = ca::prompts::parse_response("positive", variable, ParseMode::strict);
  CHECK_FALSE(prose.ok);
  CHECK(prose.reason == "'positive' is not a code");

  auto out = ca::prompts::parse_response("7", variable, ParseMode::strict);
  CHECK_FALSE(out.ok);
  CHECK(out.reason == "code 7 is outside the domain of 'sentiment'");
}

TEST_CASE("parse: marker mode takes the last FINAL ANSWER line") {
  const auto variable = fixtures::sentiment_variable();
  const std::string reply =
      "The tweet praises the game.\nFINAL ANSWER: 0\nWait, revisiting.\nFINAL ANSWER: 1\n";
  const auto parsed = ca::prompts::parse_response(reply, variable, ParseMode::marker);
  REQUIRE(parsed.ok);
  CHECK(parsed.code == 1.0);

  auto missing = ca::prompts::parse_response("no verdict here", variable, ParseMode::marker);
  CHECK_FALSE(missing.ok);
  CHECK(missing.reason == "no FINAL ANSWER: marker in response");

  auto dangling = ca::prompts::parse_response("FINAL ANSWER:", variable, ParseMode::marker);
  CHECK_FALSE(dangling.ok);
  CHECK(dangling.reason == "nothing after the FINAL ANSWER marker");
}

TEST_CASE("parse: structured mode reads code and confidence") {
  const auto variable = fixtures::sentiment_variable();
  const auto parsed = ca::prompts::parse_response(
      R"(Sure: {"code": 1, "confidence": 0.85} as requested)", variable,
      ParseMode::structured);
  REQUIRE(parsed.ok);
  CHECK(parsed.code == 1.0);
  REQUIRE(parsed.confidence.has_value());
  CHECK(*parsed.confidence == 0.85);

  CHECK(ca::prompts::parse_response(R"({"code": 2})", variable, ParseMode::structured)
            .confidence.has_value() == false);
  CHECK(ca::prompts::parse_response("no object", variable, ParseMode::structured).reason ==
        "no JSON object in response");
  CHECK(ca::prompts::parse_response("{code: nope}", variable, ParseMode::structured).reason ==
        "malformed JSON in response");
  CHECK(ca::prompts::parse_response(R"({"confidence": 0.9})", variable,
                                    ParseMode::structured)
            .reason == "JSON response missing numeric 'code'");
  CHECK(ca::prompts::parse_response(R"({"code": 1, "confidence": 1.5})", variable,
                                    ParseMode::structured)
            .reason == "confidence 1.5 out of [0, 1]");
  CHECK(ca::prompts::parse_response(R"({"code": 1, "confidence": "high"})", variable,
                                    ParseMode::structured)
            .reason == "'confidence' is not a number");
}
