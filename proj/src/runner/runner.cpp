#include "runner/runner.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include <fmt/format.h>

#include "support/hash.hpp"
#include "support/jsonio.hpp"
#include "support/rng.hpp"
#include "support/text.hpp"

namespace ca::runner {

namespace fs = std::filesystem;

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::single: return "single";
    case RunMode::batched: return "batched";
    case RunMode::repeated: return "repeated";
  }
  return "single";
}

RunMode run_mode_from_string(const std::string& text) {
  if (text == "single") return RunMode::single;
  if (text == "batched") return RunMode::batched;
  if (text == "repeated") return RunMode::repeated;
  throw Error(ErrorCode::parse, fmt::format("unknown run mode '{}'", text));
}

void RunConfig::validate() const {
  if (model.empty())
    throw Error(ErrorCode::invalid_argument, "run config has no model");
  if (variable.empty())
    throw Error(ErrorCode::invalid_argument, "run config has no variable");
  if (batch_size == 0)
    throw Error(ErrorCode::invalid_argument, "batch size must be at least 1");
  if (permutations == 0)
    throw Error(ErrorCode::invalid_argument,
                         "permutation count must be at least 1");
  if (mode == RunMode::repeated && repetitions < 2)
    throw Error(ErrorCode::invalid_argument,
                         "repeated mode needs at least 2 repetitions");
  if (concurrency == 0)
    throw Error(ErrorCode::invalid_argument,
                         "concurrency must be at least 1");
  if (mode == RunMode::batched &&
      (prompt.chain_of_thought || prompt.response_mode != prompts::ResponseMode::code_only))
    throw Error(ErrorCode::unsupported,
                         "batched mode supports plain code responses only");
  params.validate();
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["run_name"] = run_name;
  j["model"] = model;
  j["variable"] = variable;
  j["mode"] = to_string(mode);
  j["batch_size"] = batch_size;
  j["permutations"] = permutations;
  j["repetitions"] = repetitions;
  j["seed"] = seed;
  j["concurrency"] = concurrency;
  j["parse_retry"] = parse_retry;
  j["params"] = params.to_json();
  j["prompt"] = prompt.to_json();
  nlohmann::ordered_json examples_json = nlohmann::ordered_json::array();
  for (const auto& example : examples) {
    nlohmann::ordered_json e;
    e["text"] = example.text;
    e["code"] = example.code;
    e["rationale"] = example.rationale;
    examples_json.push_back(std::move(e));
  }
  j["examples"] = std::move(examples_json);
  j["unit_ids"] = unit_ids;
  j["dataset_fingerprint"] = dataset_fingerprint;
  j["codebook_hash"] = codebook_hash;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw Error(ErrorCode::parse, "run config must be a JSON object");
  for (const char* key :
       {"run_name", "model", "variable", "mode", "batch_size", "permutations", "repetitions",
        "seed", "concurrency", "parse_retry", "params", "prompt", "examples", "unit_ids",
        "dataset_fingerprint", "codebook_hash"}) {
    if (!j.contains(key))
      throw Error(ErrorCode::parse,
                           fmt::format("run config missing field '{}'", key));
  }
  RunConfig config;
  config.run_name = j.at("run_name").get<std::string>();
  config.model = j.at("model").get<std::string>();
  config.variable = j.at("variable").get<std::string>();
  config.mode = run_mode_from_string(j.at("mode").get<std::string>());
  config.batch_size = j.at("batch_size").get<std::size_t>();
  config.permutations = j.at("permutations").get<std::size_t>();
  config.repetitions = j.at("repetitions").get<std::size_t>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.concurrency = j.at("concurrency").get<std::size_t>();
  config.parse_retry = j.at("parse_retry").get<bool>();
  config.params = gateway::params_from_json(j.at("params"));
  config.prompt = prompts::template_from_json(j.at("prompt"));
  for (const auto& e : j.at("examples")) {
    prompts::FewShotExample example;
    example.text = e.at("text").get<std::string>();
    example.code = e.at("code").get<double>();
    example.rationale = e.at("rationale").get<std::string>();
    config.examples.push_back(std::move(example));
  }
  config.unit_ids = j.at("unit_ids").get<std::vector<std::string>>();
  config.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
  config.codebook_hash = j.at("codebook_hash").get<std::string>();
  return config;
}

std::string RunConfig::base_run_id() const {
  return hash::to_hex(hash::fnv1a64(to_json().dump()));
}

std::string pass_run_id(const std::string& base_run_id, const char* kind, std::size_t index) {
  return hash::to_hex(
      hash::fnv1a64(fmt::format("{}:{}:{}", base_run_id, kind, index)));
}

nlohmann::json RunSummary::to_json() const {
  nlohmann::ordered_json j;
  j["run_id"] = run_id;
  j["mode"] = runner::to_string(mode);
  j["units"] = units;
  j["coded"] = coded;
  j["missing"] = missing;
  j["missing_fraction"] = missing_fraction;
  j["degraded"] = degraded;
  j["parse_retries"] = parse_retries;
  j["truncated"] = truncated;
  j["calls"] = calls;
  j["prompt_tokens"] = prompt_tokens;
  j["completion_tokens"] = completion_tokens;
  j["model_latency_seconds"] = model_latency_seconds;
  if (!votes.empty()) {
    nlohmann::ordered_json votes_json = nlohmann::ordered_json::object();
    for (const auto& [unit_id, tally] : votes) {
      nlohmann::ordered_json unit_votes = nlohmann::ordered_json::object();
      for (const auto& [code, count] : tally) unit_votes[code] = count;
      votes_json[unit_id] = std::move(unit_votes);
    }
    j["votes"] = std::move(votes_json);
  }
  if (has_intracoder) j["intracoder"] = metrics::intracoder_to_json(intracoder);
  j["warnings"] = warnings;
  return j;
}

namespace {

constexpr const char* kConfigFile = "config.json";
constexpr const char* kExchangesFile = "exchanges.jsonl";
constexpr const char* kPartialFile = "annotations.partial.csv";
constexpr const char* kFinalFile = "annotations.csv";
constexpr const char* kSummaryFile = "summary.json";

std::string flatten(const std::string& text) {
  std::string out = text;
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

const char* reminder_for(prompts::ParseMode mode) {
  switch (mode) {
    case prompts::ParseMode::strict:
      return "Reminder: respond with the code only, nothing else.";
    case prompts::ParseMode::marker:
      return "Reminder: end your reply with a line formatted exactly as "
             "'FINAL ANSWER: <code>'.";
    case prompts::ParseMode::structured:
      return "Reminder: respond with only the JSON object, nothing else.";
  }
  return "Reminder: respond with the code only, nothing else.";
}

std::string csv_row_for(const model::Annotation& annotation) {
  const auto table = model::annotations_to_csv({annotation});
  const auto header_end = table.find('\n');
  return table.substr(header_end + 1);
}

// "ITEM <id>: <text>" per unit; answers come back as "<id>: <code>".
std::string batch_user_prompt(const RunConfig& config, const model::Variable& variable,
                              const std::vector<const model::CodingUnit*>& units) {
  std::string user = fmt::format("Task: code each item below for the variable '{}'.",
                                 variable.name);
  if (!variable.instruction.empty()) user += "\n" + variable.instruction;
  for (const auto& rule : variable.coding_rules) user += fmt::format("\nRule: {}", rule);
  if (variable.is_categorical()) {
    user += "\n\nCategories:";
    for (const auto& category : variable.categories)
      user += fmt::format("\n{}: {} - {}", category.code, category.label, category.definition);
  } else if (variable.range.has_value()) {
    user += fmt::format("\n\nReport a number between {} and {}.",
                        text::format_value(variable.range->min_value),
                        text::format_value(variable.range->max_value));
  }
  user +=
      "\n\nRespond with one line per item, formatted '<id>: <code>', and nothing else."
      "\n\nItems:";
  for (const auto* unit : units)
    user += fmt::format("\nITEM {}: {}", unit->id, flatten(unit->text));
  const std::size_t budget = config.prompt.char_budget;
  if (budget > 0 && user.size() > budget)
    throw Error(
        ErrorCode::validation,
        fmt::format("batch of {} units exceeds prompt budget: {} > {} chars; lower the "
                    "batch size",
                    units.size(), user.size(), budget));
  return user;
}

std::map<std::string, double> parse_batch_response(const std::string& content,
                                                   const model::Variable& variable) {
  std::map<std::string, double> codes;
  for (const auto& raw_line : text::split(content, '\n')) {
    auto line = text::trim(raw_line);
    if (line.empty()) continue;
    if (line.rfind("ITEM ", 0) == 0) line = text::trim(line.substr(5));
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const auto id = text::trim(line.substr(0, colon));
    auto token = text::trim(line.substr(colon + 1));
    if (!token.empty() && token.back() == '.') token.pop_back();
    const auto value = text::parse_value(text::trim(token));
    if (id.empty() || !value.has_value()) continue;
    if (!variable.in_domain(*value)) continue;
    codes.emplace(id, *value);  // first line per id wins
  }
  return codes;
}

}  // namespace

Runner::Runner(gateway::Client client, fs::path run_dir)
    : client_(std::move(client)), run_dir_(std::move(run_dir)) {}

bool Runner::can_resume(const fs::path& run_dir) {
  return fs::exists(run_dir / kConfigFile);
}

void Runner::write_exchange(const nlohmann::json& record) {
  std::ofstream out(run_dir_ / kExchangesFile, std::ios::app);
  if (!out)
    throw Error(ErrorCode::io,
                         fmt::format("cannot append to {}", (run_dir_ / kExchangesFile).string()));
  out << record.dump() << "\n";
}

void Runner::append_partial(const model::Annotation& annotation) {
  std::ofstream out(run_dir_ / kPartialFile, std::ios::app);
  if (!out)
    throw Error(ErrorCode::io,
                         fmt::format("cannot append to {}", (run_dir_ / kPartialFile).string()));
  out << csv_row_for(annotation);
}

Runner::UnitOutcome Runner::code_unit(const RunConfig& config, const model::Variable& variable,
                                      const model::CodingUnit& unit,
                                      const std::string& pass_id) {
  UnitOutcome outcome;
  try {
    const auto rendered =
        prompts::render_prompt(config.prompt, variable, unit, config.examples);
    const auto parse_mode = prompts::parse_mode_for(config.prompt);
    gateway::ChatRequest request;
    request.model = config.model;
    request.system = rendered.system;
    request.user = rendered.user;
    request.params = config.params;

    const std::size_t max_attempts = config.parse_retry ? 2 : 1;
    for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
      gateway::ChatResult result;
      try {
        result = client_.chat(request);
      } catch (const Error& error) {
        nlohmann::ordered_json record;
        record["run_id"] = pass_id;
        record["kind"] = "single";
        record["unit_ids"] = std::vector<std::string>{unit.id};
        record["attempt"] = attempt;
        record["prompt_hash"] =
            hash::to_hex(hash::fnv1a64(request.user, hash::fnv1a64(request.system)));
        record["error"] = error.what();
        record["error_code"] = error_code_name(error.code());
        outcome.exchanges.push_back(std::move(record));
        throw;
      }
      outcome.calls += 1;
      outcome.prompt_tokens += result.prompt_tokens;
      outcome.completion_tokens += result.completion_tokens;
      outcome.latency_seconds += result.latency_seconds;

      const auto parsed = prompts::parse_response(result.content, variable, parse_mode);
      nlohmann::ordered_json record;
      record["run_id"] = pass_id;
      record["kind"] = "single";
      record["unit_ids"] = std::vector<std::string>{unit.id};
      record["attempt"] = attempt;
      record["prompt_hash"] =
          hash::to_hex(hash::fnv1a64(request.user, hash::fnv1a64(request.system)));
      record["response"] = result.content;
      record["finish_reason"] = result.finish_reason;
      record["prompt_tokens"] = result.prompt_tokens;
      record["completion_tokens"] = result.completion_tokens;
      record["latency_seconds"] = result.latency_seconds;
      if (!parsed.ok) record["parse_failure"] = parsed.reason;
      outcome.exchanges.push_back(std::move(record));

      outcome.vote.present = true;
      if (parsed.ok) {
        outcome.vote.value = parsed.code;
        outcome.vote.confidence = parsed.confidence;
        return outcome;
      }
      if (result.truncated()) {
        outcome.truncated += 1;  // a longer answer would truncate again; no retry
        outcome.vote.value = std::nullopt;
        return outcome;
      }
      if (attempt < max_attempts) {
        outcome.retries += 1;
        request.user = fmt::format("{}\n\n{}", rendered.user, reminder_for(parse_mode));
        continue;
      }
      outcome.vote.value = std::nullopt;
    }
  } catch (const Error& error) {
    outcome.failed = true;
    outcome.error_code = error.code();
    outcome.error_message = error.what();
  }
  return outcome;
}

void Runner::run_unit_passes(const RunConfig& config, const model::Dataset& dataset,
                             const model::Variable& variable, const std::string& pass_id,
                             DoneMap& done, RunSummary& summary) {
  std::vector<const model::CodingUnit*> todo;
  for (const auto& unit_id : config.unit_ids) {
    const auto unit_done = done.find(unit_id);
    if (unit_done != done.end() && unit_done->second.count(pass_id) > 0) continue;
    todo.push_back(&dataset.require(unit_id));
  }

  const std::size_t workers =
      std::max<std::size_t>(1, std::min({config.concurrency, kMaxConcurrency,
                                         todo.empty() ? std::size_t{1} : todo.size()}));
  for (std::size_t start = 0; start < todo.size(); start += workers) {
    const std::size_t wave = std::min(workers, todo.size() - start);
    std::vector<UnitOutcome> outcomes(wave);
    if (wave == 1) {
      outcomes[0] = code_unit(config, variable, *todo[start], pass_id);
    } else {
      std::vector<std::thread> threads;
      for (std::size_t i = 0; i < wave; ++i)
        threads.emplace_back([&, i] {
          outcomes[i] = code_unit(config, variable, *todo[start + i], pass_id);
        });
      for (auto& thread : threads) thread.join();
    }

    const UnitOutcome* failure = nullptr;
    for (std::size_t i = 0; i < wave; ++i) {
      auto& outcome = outcomes[i];
      const auto& unit = *todo[start + i];
      for (auto& record : outcome.exchanges) {
        record["seq"] = sequence_++;
        write_exchange(record);
      }
      summary.parse_retries += outcome.retries;
      summary.truncated += outcome.truncated;
      summary.calls += outcome.calls;
      summary.prompt_tokens += outcome.prompt_tokens;
      summary.completion_tokens += outcome.completion_tokens;
      summary.model_latency_seconds += outcome.latency_seconds;
      if (outcome.failed) {
        if (failure == nullptr) failure = &outcome;
        continue;
      }
      model::Annotation annotation;
      annotation.unit_id = unit.id;
      annotation.variable = config.variable;
      annotation.coder = {config.model, pass_id};
      annotation.value = outcome.vote.value;
      annotation.confidence = outcome.vote.confidence;
      append_partial(annotation);
      done[unit.id][pass_id] = outcome.vote;
    }
    if (failure != nullptr)
      throw Error(failure->error_code, failure->error_message);
  }
}

void Runner::run_batched_pass(const RunConfig& config, const model::Dataset& dataset,
                              const model::Variable& variable, std::size_t permutation,
                              const std::string& pass_id, DoneMap& done, RunSummary& summary) {
  const auto order = rng::permutation(
      config.unit_ids.size(),
      hash::fnv1a64(fmt::format("{}:order:{}", config.seed, permutation)));
  std::vector<const model::CodingUnit*> ordered;
  for (const auto index : order) ordered.push_back(&dataset.require(config.unit_ids[index]));

  for (std::size_t start = 0; start < ordered.size(); start += config.batch_size) {
    const std::size_t count = std::min(config.batch_size, ordered.size() - start);
    std::vector<const model::CodingUnit*> batch(ordered.begin() + start,
                                                ordered.begin() + start + count);
    bool all_done = true;
    for (const auto* unit : batch) {
      const auto unit_done = done.find(unit->id);
      if (unit_done == done.end() || unit_done->second.count(pass_id) == 0) {
        all_done = false;
        break;
      }
    }
    if (all_done) continue;

    gateway::ChatRequest request;
    request.model = config.model;
    request.system = config.prompt.system.empty()
                         ? "You are a careful content-analysis coder. Apply the codebook "
                           "exactly as written and never invent categories."
                         : config.prompt.system;
    request.user = batch_user_prompt(config, variable, batch);
    request.params = config.params;

    std::vector<std::string> batch_ids;
    for (const auto* unit : batch) batch_ids.push_back(unit->id);

    gateway::ChatResult result;
    try {
      result = client_.chat(request);
    } catch (const Error& error) {
      nlohmann::ordered_json record;
      record["seq"] = sequence_++;
      record["run_id"] = pass_id;
      record["kind"] = "batch";
      record["permutation"] = permutation;
      record["unit_ids"] = batch_ids;
      record["attempt"] = 1;
      record["prompt_hash"] =
          hash::to_hex(hash::fnv1a64(request.user, hash::fnv1a64(request.system)));
      record["error"] = error.what();
      record["error_code"] = error_code_name(error.code());
      write_exchange(record);
      throw;
    }

    summary.calls += 1;
    summary.prompt_tokens += result.prompt_tokens;
    summary.completion_tokens += result.completion_tokens;
    summary.model_latency_seconds += result.latency_seconds;
    if (result.truncated()) summary.truncated += 1;

    nlohmann::ordered_json record;
    record["seq"] = sequence_++;
    record["run_id"] = pass_id;
    record["kind"] = "batch";
    record["permutation"] = permutation;
    record["unit_ids"] = batch_ids;
    record["attempt"] = 1;
    record["prompt_hash"] =
        hash::to_hex(hash::fnv1a64(request.user, hash::fnv1a64(request.system)));
    record["response"] = result.content;
    record["finish_reason"] = result.finish_reason;
    record["prompt_tokens"] = result.prompt_tokens;
    record["completion_tokens"] = result.completion_tokens;
    record["latency_seconds"] = result.latency_seconds;
    write_exchange(record);

    const auto codes = parse_batch_response(result.content, variable);
    for (const auto* unit : batch) {
      Vote vote;
      vote.present = true;
      const auto found = codes.find(unit->id);
      if (found != codes.end()) vote.value = found->second;
      model::Annotation annotation;
      annotation.unit_id = unit->id;
      annotation.variable = config.variable;
      annotation.coder = {config.model, pass_id};
      annotation.value = vote.value;
      append_partial(annotation);
      done[unit->id][pass_id] = vote;
    }
  }
}

RunResult Runner::run(RunConfig config, const model::Dataset& dataset,
                      const model::Variable& variable) {
  if (config.variable.empty()) config.variable = variable.name;
  if (config.variable != variable.name)
    throw Error(ErrorCode::invalid_argument,
                         fmt::format("run config codes variable '{}' but '{}' was supplied",
                                     config.variable, variable.name));
  if (config.unit_ids.empty())
    for (const auto& unit : dataset.units()) config.unit_ids.push_back(unit.id);
  for (const auto& unit_id : config.unit_ids) dataset.require(unit_id);
  config.dataset_fingerprint = dataset.fingerprint();
  config.validate();

  fs::create_directories(run_dir_);
  if (fs::exists(run_dir_ / kConfigFile))
    throw Error(
        ErrorCode::state,
        fmt::format("run directory {} is already initialized; resume it instead",
                    run_dir_.string()));
  jsonio::save_text_file(run_dir_ / kConfigFile, config.to_json().dump(2) + "\n");
  jsonio::save_text_file(run_dir_ / kPartialFile,
                          "unit_id,variable,coder,value,confidence,run_id,timestamp\n");
  sequence_ = 0;

  DoneMap done;
  return execute(config, dataset, variable, done);
}

RunResult Runner::resume(const model::Dataset& dataset, const model::Variable& variable) {
  if (!can_resume(run_dir_))
    throw Error(ErrorCode::state,
                         fmt::format("{} has no run to resume", run_dir_.string()));
  auto config = run_config_from_json(jsonio::load_file(run_dir_ / kConfigFile));
  if (config.dataset_fingerprint != dataset.fingerprint())
    throw Error(ErrorCode::state,
                         "dataset fingerprint mismatch: the run was started on different data");
  if (config.variable != variable.name)
    throw Error(ErrorCode::invalid_argument,
                         fmt::format("run config codes variable '{}' but '{}' was supplied",
                                     config.variable, variable.name));

  DoneMap done;
  if (fs::exists(run_dir_ / kPartialFile)) {
    for (const auto& annotation :
         model::load_annotations_file(run_dir_ / kPartialFile)) {
      Vote vote;
      vote.present = true;
      vote.value = annotation.value;
      vote.confidence = annotation.confidence;
      done[annotation.unit_id][annotation.coder.run_id] = vote;
    }
  }
  sequence_ = 0;
  if (fs::exists(run_dir_ / kExchangesFile)) {
    const auto existing = jsonio::load_text_file(run_dir_ / kExchangesFile);
    sequence_ = static_cast<std::size_t>(
        std::count(existing.begin(), existing.end(), '\n'));
  }
  return execute(config, dataset, variable, done);
}

RunResult Runner::execute(const RunConfig& config, const model::Dataset& dataset,
                          const model::Variable& variable, DoneMap& done) {
  const auto base_id = config.base_run_id();
  RunSummary summary;
  summary.run_id = base_id;
  summary.mode = config.mode;
  summary.units = config.unit_ids.size();
  if (config.params.temperature > 0.0)
    summary.warnings.push_back(
        fmt::format("temperature {} > 0: annotation draws are non-deterministic",
                    text::format_value(config.params.temperature)));

  model::AnnotationList final_rows;
  const auto final_row = [&](const std::string& unit_id, const std::string& run_id,
                             const Vote& vote) {
    model::Annotation annotation;
    annotation.unit_id = unit_id;
    annotation.variable = config.variable;
    annotation.coder = {config.model, run_id};
    annotation.value = vote.value;
    annotation.confidence = vote.confidence;
    return annotation;
  };

  switch (config.mode) {
    case RunMode::single: {
      run_unit_passes(config, dataset, variable, base_id, done, summary);
      for (const auto& unit_id : config.unit_ids)
        final_rows.push_back(final_row(unit_id, base_id, done.at(unit_id).at(base_id)));
      break;
    }
    case RunMode::repeated: {
      std::vector<std::string> pass_ids;
      for (std::size_t rep = 0; rep < config.repetitions; ++rep)
        pass_ids.push_back(pass_run_id(base_id, "rep", rep));
      for (const auto& pass_id : pass_ids)
        run_unit_passes(config, dataset, variable, pass_id, done, summary);
      std::vector<std::map<std::string, model::CellValue>> runs;
      for (const auto& pass_id : pass_ids) {
        std::map<std::string, model::CellValue> run_values;
        for (const auto& unit_id : config.unit_ids) {
          const auto& vote = done.at(unit_id).at(pass_id);
          run_values[unit_id] = vote.value;
          final_rows.push_back(final_row(unit_id, pass_id, vote));
        }
        runs.push_back(std::move(run_values));
      }
      summary.intracoder = metrics::intracoder_agreement(runs);
      summary.has_intracoder = true;
      break;
    }
    case RunMode::batched: {
      if (config.permutations % 2 == 0)
        summary.warnings.push_back(fmt::format(
            "{} permutations: an even vote can tie; prefer an odd count",
            config.permutations));
      std::vector<std::string> pass_ids;
      for (std::size_t perm = 0; perm < config.permutations; ++perm)
        pass_ids.push_back(pass_run_id(base_id, "perm", perm));
      for (std::size_t perm = 0; perm < config.permutations; ++perm)
        run_batched_pass(config, dataset, variable, perm, pass_ids[perm], done, summary);

      for (const auto& unit_id : config.unit_ids) {
        std::map<double, std::size_t> tally;
        std::size_t missing_votes = 0;
        for (const auto& pass_id : pass_ids) {
          const auto& vote = done.at(unit_id).at(pass_id);
          if (vote.value.has_value())
            tally[*vote.value] += 1;
          else
            missing_votes += 1;
        }
        auto& unit_votes = summary.votes[unit_id];
        for (const auto& [code, count] : tally)
          unit_votes[text::format_value(code)] = count;
        if (missing_votes > 0) unit_votes[""] = missing_votes;

        // Strict majority over all permutations; a missing vote still
        // counts toward the denominator.
        Vote resolved;
        resolved.present = true;
        for (const auto& [code, count] : tally) {
          if (2 * count > config.permutations) {
            resolved.value = code;
            break;
          }
        }
        final_rows.push_back(final_row(unit_id, base_id, resolved));
      }
      break;
    }
  }

  std::sort(final_rows.begin(), final_rows.end(),
            [](const model::Annotation& a, const model::Annotation& b) {
              if (a.unit_id != b.unit_id) return a.unit_id < b.unit_id;
              return a.coder.run_id < b.coder.run_id;
            });
  for (const auto& row : final_rows) {
    if (row.value.has_value())
      summary.coded += 1;
    else
      summary.missing += 1;
  }
  const std::size_t total_rows = final_rows.size();
  summary.missing_fraction =
      total_rows == 0 ? 0.0
                      : static_cast<double>(summary.missing) / static_cast<double>(total_rows);
  summary.degraded = summary.missing_fraction > kDegradedMissingFraction;
  if (summary.degraded)
    summary.warnings.push_back(
        fmt::format("degraded run: {}% of expected codes are missing",
                    text::format_value(100.0 * summary.missing_fraction)));

  model::save_annotations_file(run_dir_ / kFinalFile, final_rows);
  jsonio::save_text_file(run_dir_ / kSummaryFile, summary.to_json().dump(2) + "\n");

  RunResult result;
  result.run_id = base_id;
  result.annotations = std::move(final_rows);
  result.summary = std::move(summary);
  return result;
}

}  // namespace ca::runner
