#include "report/report.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "support/errors.hpp"
#include "support/hash.hpp"
#include "support/jsonio.hpp"
#include "support/text.hpp"

namespace ca::report {

namespace fs = std::filesystem;

nlohmann::json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool_version"] = tool_version;
  j["created"] = created;
  j["codebook_hash"] = codebook_hash;
  j["codebook_version"] = codebook_version;
  j["dataset_fingerprint"] = dataset_fingerprint;
  j["dataset_units"] = dataset_units;
  j["model"] = {{"name", model.name}, {"provider", model.provider},
                {"endpoint", model.endpoint}};
  j["deployment"] = deployment;
  j["finetuning"] = finetuning;
  j["params"] = params;
  j["prompt"] = prompt;
  j["run_id"] = run_id;
  j["run_mode"] = run_mode;
  j["seed"] = seed;
  j["sample_strategy"] = sample_strategy;
  j["sample_size"] = sample_size;
  j["sample_fraction"] = sample_fraction;
  j["sample_hash"] = sample_hash;
  j["annotations_hash"] = annotations_hash;
  j["human_coder_count"] = human_coder_count;
  j["intercoder_alpha"] = intercoder_alpha;
  j["validation_metrics"] = validation_metrics;
  j["intracoder_agreement"] = intracoder_agreement;
  return j;
}

namespace {

std::string display_field(std::string key) {
  for (auto& c : key)
    if (c == '_') c = ' ';
  return key;
}

}  // namespace

RunManifest manifest_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw Error(ErrorCode::parse, "manifest must be a JSON object");
  const char* required[] = {"tool_version",        "created",
                            "codebook_hash",       "codebook_version",
                            "dataset_fingerprint", "dataset_units",
                            "model",               "deployment",
                            "finetuning",          "params",
                            "prompt",              "run_id",
                            "run_mode",            "seed",
                            "sample_strategy",     "sample_size",
                            "sample_fraction",     "sample_hash",
                            "annotations_hash",    "human_coder_count",
                            "intercoder_alpha",    "validation_metrics",
                            "intracoder_agreement"};
  std::vector<std::string> missing;
  for (const char* key : required)
    if (!j.contains(key)) missing.push_back(display_field(key));
  if (j.contains("model")) {
    for (const char* key : {"name", "provider", "endpoint"})
      if (!j.at("model").contains(key)) missing.push_back(fmt::format("model {}", key));
  }
  if (!missing.empty())
    throw Error(ErrorCode::validation,
                fmt::format("manifest incomplete, missing: {}", text::join(missing, ", ")));

  RunManifest manifest;
  manifest.tool_version = j.at("tool_version").get<std::string>();
  manifest.created = j.at("created").get<std::string>();
  manifest.codebook_hash = j.at("codebook_hash").get<std::string>();
  manifest.codebook_version = j.at("codebook_version").get<std::string>();
  manifest.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
  manifest.dataset_units = j.at("dataset_units").get<std::size_t>();
  manifest.model.name = j.at("model").at("name").get<std::string>();
  manifest.model.provider = j.at("model").at("provider").get<std::string>();
  manifest.model.endpoint = j.at("model").at("endpoint").get<std::string>();
  manifest.deployment = j.at("deployment").get<std::string>();
  manifest.finetuning = j.at("finetuning").get<std::string>();
  manifest.params = j.at("params");
  manifest.prompt = j.at("prompt");
  manifest.run_id = j.at("run_id").get<std::string>();
  manifest.run_mode = j.at("run_mode").get<std::string>();
  manifest.seed = j.at("seed").get<std::uint64_t>();
  manifest.sample_strategy = j.at("sample_strategy").get<std::string>();
  manifest.sample_size = j.at("sample_size").get<std::size_t>();
  manifest.sample_fraction = j.at("sample_fraction").get<double>();
  manifest.sample_hash = j.at("sample_hash").get<std::string>();
  manifest.annotations_hash = j.at("annotations_hash").get<std::string>();
  manifest.human_coder_count = j.at("human_coder_count").get<std::size_t>();
  manifest.intercoder_alpha = j.at("intercoder_alpha");
  manifest.validation_metrics = j.at("validation_metrics");
  manifest.intracoder_agreement = j.at("intracoder_agreement");
  return manifest;
}

RunManifest load_manifest_file(const fs::path& path) {
  return manifest_from_json(jsonio::load_file(path));
}

void save_manifest_file(const fs::path& path, const RunManifest& manifest) {
  jsonio::save_text_file(path, manifest.to_json().dump(2) + "\n");
}

namespace {

std::string sample_hash_for(const std::vector<std::string>& unit_ids) {
  std::uint64_t state = hash::kFnvOffset;
  for (const auto& id : unit_ids) {
    state = hash::fnv1a64(id, state);
    state = hash::fnv1a64("\n", state);
  }
  return hash::to_hex(state);
}

}  // namespace

std::string deployment_for(const gateway::ModelSpec& spec) {
  if (spec.provider == "mock") return "mock";
  if (spec.provider == "local") return "local-server";
  return "remote-api";
}

RunManifest build_manifest(const fs::path& run_dir, const model::Dataset* dataset,
                           const model::Codebook* codebook,
                           const gateway::Registry* registry,
                           const std::string& sample_strategy, const std::string& created,
                           const ManifestValidation* validation) {
  const auto config_path = run_dir / "config.json";
  if (!fs::exists(config_path))
    throw Error(ErrorCode::state,
                fmt::format("{} has no config.json; not a run directory", run_dir.string()));
  const auto config = runner::run_config_from_json(jsonio::load_file(config_path));
  const auto annotations_path = run_dir / "annotations.csv";
  if (!fs::exists(annotations_path))
    throw Error(ErrorCode::state,
                fmt::format("{} has no annotations.csv; the run has not finished",
                            run_dir.string()));

  const gateway::ModelSpec* spec =
      registry == nullptr ? nullptr : registry->find(config.model);
  std::vector<std::string> missing;
  if (spec == nullptr) {
    missing.push_back("model provider");
    missing.push_back("deployment");
  }
  if (validation == nullptr) {
    missing.push_back("human coder count");
    missing.push_back("intercoder alpha");
    missing.push_back("validation metrics");
    missing.push_back("intracoder agreement");
  } else {
    if (validation->human_coder_count == 0) missing.push_back("human coder count");
    if (validation->intercoder.is_null()) missing.push_back("intercoder alpha");
    if (validation->metrics.is_null()) missing.push_back("validation metrics");
    if (validation->intracoder.is_null()) missing.push_back("intracoder agreement");
  }
  if (!missing.empty())
    throw Error(ErrorCode::validation,
                fmt::format("manifest incomplete, missing: {}", text::join(missing, ", ")));

  RunManifest manifest;
  manifest.tool_version = kToolVersion;
  manifest.created = created;
  manifest.codebook_hash = config.codebook_hash;
  manifest.codebook_version = codebook != nullptr ? codebook->version : "";
  manifest.dataset_fingerprint = config.dataset_fingerprint;
  manifest.dataset_units = dataset != nullptr ? dataset->size() : config.unit_ids.size();
  manifest.model.name = config.model;
  manifest.model.provider = spec->provider;
  manifest.model.endpoint = spec->endpoint;
  manifest.deployment = deployment_for(*spec);
  manifest.params = config.params.to_json();
  manifest.prompt = config.prompt.to_json();
  manifest.run_id = config.base_run_id();
  manifest.run_mode = runner::to_string(config.mode);
  manifest.seed = config.seed;
  manifest.sample_strategy = sample_strategy;
  manifest.sample_size = config.unit_ids.size();
  manifest.sample_fraction =
      manifest.dataset_units == 0
          ? 0.0
          : static_cast<double>(manifest.sample_size) /
                static_cast<double>(manifest.dataset_units);
  manifest.sample_hash = sample_hash_for(config.unit_ids);
  manifest.annotations_hash = hash::digest_hex(jsonio::load_text_file(annotations_path));
  manifest.human_coder_count = validation->human_coder_count;
  manifest.intercoder_alpha = validation->intercoder;
  manifest.validation_metrics = validation->metrics;
  manifest.intracoder_agreement = validation->intracoder;
  return manifest;
}

std::vector<std::string> verify_manifest(const RunManifest& manifest, const fs::path& run_dir,
                                         const model::Dataset* dataset,
                                         const model::Codebook* codebook) {
  std::vector<std::string> mismatches;
  const auto config_path = run_dir / "config.json";
  if (!fs::exists(config_path)) {
    mismatches.push_back(fmt::format("{} has no config.json", run_dir.string()));
    return mismatches;
  }
  const auto config = runner::run_config_from_json(jsonio::load_file(config_path));

  if (config.base_run_id() != manifest.run_id)
    mismatches.push_back(fmt::format("run id mismatch: manifest {}, directory {}",
                                     manifest.run_id, config.base_run_id()));
  if (runner::to_string(config.mode) != manifest.run_mode)
    mismatches.push_back(fmt::format("run mode mismatch: manifest {}, directory {}",
                                     manifest.run_mode, runner::to_string(config.mode)));
  if (config.seed != manifest.seed)
    mismatches.push_back(fmt::format("seed mismatch: manifest {}, directory {}",
                                     manifest.seed, config.seed));
  if (config.params.to_json() != manifest.params)
    mismatches.push_back("generation parameters differ from the manifest");
  if (config.prompt.to_json() != manifest.prompt)
    mismatches.push_back("prompt template differs from the manifest");
  if (sample_hash_for(config.unit_ids) != manifest.sample_hash)
    mismatches.push_back("sampled unit ids differ from the manifest");
  if (config.unit_ids.size() != manifest.sample_size)
    mismatches.push_back(fmt::format("sample size mismatch: manifest {}, directory {}",
                                     manifest.sample_size, config.unit_ids.size()));

  const auto annotations_path = run_dir / "annotations.csv";
  if (!fs::exists(annotations_path)) {
    mismatches.push_back("annotations.csv is missing");
  } else {
    const auto digest = hash::digest_hex(jsonio::load_text_file(annotations_path));
    if (digest != manifest.annotations_hash)
      mismatches.push_back(fmt::format("annotations hash mismatch: manifest {}, file {}",
                                       manifest.annotations_hash, digest));
  }
  if (dataset != nullptr && dataset->fingerprint() != manifest.dataset_fingerprint)
    mismatches.push_back("dataset fingerprint differs from the manifest");
  if (codebook != nullptr && model::codebook_hash(*codebook) != manifest.codebook_hash)
    mismatches.push_back("codebook hash differs from the manifest");
  return mismatches;
}

namespace {

std::map<std::string, model::CellValue> values_by_unit(const model::AnnotationList& rows) {
  std::map<std::string, model::CellValue> values;
  for (const auto& row : rows) values[row.unit_id] = row.value;
  return values;
}

metrics::ReliabilityResult agreement_with_gold(
    const std::map<std::string, model::CellValue>& predicted,
    const sampling::GoldStandard& gold, const model::Variable& variable) {
  std::vector<std::string> units;
  for (const auto& [unit_id, code] : gold.codes)
    if (code.has_value() && predicted.count(unit_id) > 0) units.push_back(unit_id);
  model::AnnotationMatrix matrix(variable.name, {"gold", "model"}, units);
  for (std::size_t row = 0; row < units.size(); ++row) {
    matrix.set_cell(row, 0, gold.codes.at(matrix.unit_ids()[row]));
    matrix.set_cell(row, 1, predicted.at(matrix.unit_ids()[row]));
  }
  return metrics::krippendorff_alpha(matrix, variable.scale);
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkPlan& plan, const gateway::Registry& registry,
                              const model::Dataset& dataset, const model::Variable& variable,
                              const sampling::GoldStandard& gold) {
  if (plan.models.empty())
    throw Error(ErrorCode::invalid_argument, "benchmark needs at least one model");
  if (plan.max_candidates > 0 && plan.models.size() > plan.max_candidates)
    throw Error(ErrorCode::invalid_argument,
                fmt::format("candidate set exceeds {}", plan.max_candidates));
  std::map<std::string, model::CellValue> gold_values;
  for (const auto& [unit_id, code] : gold.codes) gold_values[unit_id] = code;

  BenchmarkResult result;
  for (const auto& model_name : plan.models) {
    const auto& spec = registry.require(model_name);
    BenchmarkEntry entry;
    entry.model = model_name;

    const auto screening = gateway::screen_model(spec, plan.requirements);
    if (!screening.eligible) {
      entry.screened_out = true;
      entry.screening_reasons = screening.reasons;
      result.entries.push_back(std::move(entry));
      continue;
    }

    auto config = plan.base_config;
    config.model = model_name;
    config.variable = variable.name;
    config.mode = runner::RunMode::single;
    config.unit_ids.clear();
    for (const auto& [unit_id, code] : gold.codes) {
      (void)code;
      config.unit_ids.push_back(unit_id);
    }

    gateway::Client client(gateway::make_provider(spec));
    runner::Runner bench_runner(client, plan.work_dir / model_name);
    const auto run = bench_runner.run(config, dataset, variable);
    entry.run_id = run.run_id;
    entry.prompt_tokens = run.summary.prompt_tokens;
    entry.completion_tokens = run.summary.completion_tokens;
    entry.model_latency_seconds = run.summary.model_latency_seconds;
    entry.cost_usd =
        gateway::estimate_cost_usd(run.summary.prompt_tokens, spec.price_per_mtok_input) +
        gateway::estimate_cost_usd(run.summary.completion_tokens, spec.price_per_mtok_output);

    const auto predicted = values_by_unit(run.annotations);
    entry.classification = metrics::classification_report(predicted, gold_values);
    entry.has_classification = true;
    entry.agreement_with_gold = agreement_with_gold(predicted, gold, variable);

    if (plan.intracoder_repetitions >= 2) {
      auto repeat_config = config;
      repeat_config.mode = runner::RunMode::repeated;
      repeat_config.repetitions = plan.intracoder_repetitions;
      gateway::Client repeat_client(gateway::make_provider(spec));
      runner::Runner repeat_runner(repeat_client,
                                   plan.work_dir / fmt::format("{}-consistency", model_name));
      const auto repeat_run = repeat_runner.run(repeat_config, dataset, variable);
      entry.intracoder = repeat_run.summary.intracoder;
      entry.has_intracoder = true;
    }
    result.entries.push_back(std::move(entry));
  }

  std::vector<const BenchmarkEntry*> eligible;
  for (const auto& entry : result.entries)
    if (!entry.screened_out) eligible.push_back(&entry);
  std::sort(eligible.begin(), eligible.end(),
            [](const BenchmarkEntry* a, const BenchmarkEntry* b) {
              if (a->classification.macro_f1 != b->classification.macro_f1)
                return a->classification.macro_f1 > b->classification.macro_f1;
              if (a->cost_usd != b->cost_usd) return a->cost_usd < b->cost_usd;
              if (a->model_latency_seconds != b->model_latency_seconds)
                return a->model_latency_seconds < b->model_latency_seconds;
              return a->model < b->model;
            });
  for (const auto* entry : eligible) result.ranking.push_back(entry->model);
  return result;
}

nlohmann::json BenchmarkResult::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json entries_json = nlohmann::ordered_json::array();
  for (const auto& entry : entries) {
    nlohmann::ordered_json e;
    e["model"] = entry.model;
    e["screened_out"] = entry.screened_out;
    e["screening_reasons"] = entry.screening_reasons;
    if (!entry.screened_out) {
      e["run_id"] = entry.run_id;
      if (entry.has_classification) {
        e["classification"] = metrics::classification_to_json(entry.classification);
        e["agreement_with_gold"] = metrics::reliability_to_json(entry.agreement_with_gold);
      }
      if (entry.has_intracoder)
        e["intracoder"] = metrics::intracoder_to_json(entry.intracoder);
      e["prompt_tokens"] = entry.prompt_tokens;
      e["completion_tokens"] = entry.completion_tokens;
      e["cost_usd"] = entry.cost_usd;
      e["model_latency_seconds"] = entry.model_latency_seconds;
    }
    entries_json.push_back(std::move(e));
  }
  j["entries"] = std::move(entries_json);
  j["ranking"] = ranking;
  return j;
}

BenchmarkResult benchmark_from_json(const nlohmann::json& j) {
  BenchmarkResult result;
  for (const auto& e : j.at("entries")) {
    BenchmarkEntry entry;
    entry.model = e.at("model").get<std::string>();
    entry.screened_out = e.at("screened_out").get<bool>();
    entry.screening_reasons = e.at("screening_reasons").get<std::vector<std::string>>();
    if (!entry.screened_out) {
      entry.run_id = e.at("run_id").get<std::string>();
      if (e.contains("classification")) {
        entry.classification = metrics::classification_from_json(e.at("classification"));
        entry.has_classification = true;
        entry.agreement_with_gold =
            metrics::reliability_from_json(e.at("agreement_with_gold"));
      }
      if (e.contains("intracoder")) {
        entry.intracoder = metrics::intracoder_from_json(e.at("intracoder"));
        entry.has_intracoder = true;
      }
      entry.prompt_tokens = e.at("prompt_tokens").get<std::size_t>();
      entry.completion_tokens = e.at("completion_tokens").get<std::size_t>();
      entry.cost_usd = e.at("cost_usd").get<double>();
      entry.model_latency_seconds = e.at("model_latency_seconds").get<double>();
    }
    result.entries.push_back(std::move(entry));
  }
  result.ranking = j.at("ranking").get<std::vector<std::string>>();
  return result;
}

namespace {

void text_line(std::string& out, const std::string& line) {
  out += line;
  out += "\n";
}

void render_classification_text(std::string& out,
                                const metrics::ClassificationReport& report) {
  text_line(out, "## Validity against the gold standard");
  text_line(out, fmt::format("evaluated {} units (excluded: {} unresolved gold, {} missing "
                             "predictions)",
                             report.evaluated, report.excluded_unresolved_gold,
                             report.excluded_missing_prediction));
  text_line(out, fmt::format("accuracy {}  macro F1 {}  weighted F1 {}",
                             text::format_value(report.accuracy),
                             text::format_value(report.macro_f1),
                             text::format_value(report.weighted_f1)));
  if (report.imbalanced)
    text_line(out,
              fmt::format("WARNING: dominant class holds {}% of gold units; accuracy "
                          "overstates validity, prefer macro F1",
                          text::format_value(100.0 * report.dominant_share)));
  for (const auto& cls : report.per_class)
    text_line(out, fmt::format("class {}: precision {}  recall {}  F1 {}  (support {})",
                               text::format_value(cls.label),
                               text::format_value(cls.precision),
                               text::format_value(cls.recall), text::format_value(cls.f1),
                               cls.support));
  for (const auto& warning : report.warnings) text_line(out, "note: " + warning);
}

}  // namespace

std::string render_text_report(const ReportInputs& inputs) {
  std::string out;
  text_line(out, fmt::format("# {}", inputs.title.empty() ? "Coding report" : inputs.title));

  if (inputs.reliability != nullptr) {
    const auto& r = *inputs.reliability;
    text_line(out, "## Reliability");
    if (r.defined)
      text_line(out, fmt::format("Krippendorff's alpha ({}) = {} over {} units ({} excluded)",
                                 model::scale_to_string(r.scale),
                                 text::format_value(r.alpha), r.units_used,
                                 r.units_excluded));
    else
      text_line(out, fmt::format("Krippendorff's alpha ({}): UNDEFINED ({})",
                                 model::scale_to_string(r.scale), r.undefined_reason));
  }
  if (inputs.gate != nullptr)
    text_line(out, fmt::format("gate: {} ({})", sampling::to_string(inputs.gate->level),
                               inputs.gate->reason));

  if (inputs.classification != nullptr) render_classification_text(out, *inputs.classification);

  if (inputs.intracoder != nullptr) {
    const auto& c = *inputs.intracoder;
    text_line(out, "## Intracoder consistency");
    text_line(out, fmt::format("{} runs over {} units: percent agreement {}", c.runs, c.units,
                               text::format_value(c.percent_agreement)));
    if (c.alpha.defined)
      text_line(out, fmt::format("alpha across runs = {}", text::format_value(c.alpha.alpha)));
    else
      text_line(out, fmt::format("alpha across runs: UNDEFINED ({})",
                                 c.alpha.undefined_reason));
  }

  if (inputs.sample != nullptr) {
    const auto& s = *inputs.sample;
    text_line(out, "## Validation sample");
    text_line(out, fmt::format("strategy {}: {} units{}", s.strategy, s.unit_ids.size(),
                               s.pilot_use_only ? " (pilot use only)" : ""));
    for (const auto& entry : s.audit)
      text_line(out, fmt::format("  fraction {} -> {} units (minority count {}): {}",
                                 text::format_value(entry.fraction), entry.size,
                                 entry.minority_count, entry.note));
    for (const auto& warning : s.warnings) text_line(out, "note: " + warning);
  }

  if (inputs.workload != nullptr) {
    text_line(out, "## Hybrid workload");
    text_line(out, fmt::format("routed to manual review: {} of {} units ({}%)",
                               inputs.workload->routed, inputs.workload->total,
                               text::format_value(100.0 * inputs.workload->routed_fraction())));
  }

  if (inputs.benchmark != nullptr) {
    text_line(out, "## Model benchmark");
    std::size_t rank = 1;
    for (const auto& name : inputs.benchmark->ranking) {
      for (const auto& entry : inputs.benchmark->entries) {
        if (entry.model != name) continue;
        text_line(out, fmt::format("{}. {}  macro F1 {}  cost ${}  latency {}s", rank, name,
                                   text::format_value(entry.classification.macro_f1),
                                   text::format_value(entry.cost_usd),
                                   text::format_value(entry.model_latency_seconds)));
      }
      ++rank;
    }
    for (const auto& entry : inputs.benchmark->entries)
      if (entry.screened_out)
        text_line(out, fmt::format("screened out: {} ({})", entry.model,
                                   text::join(entry.screening_reasons, "; ")));
  }

  if (inputs.manifest != nullptr) {
    text_line(out, "## Provenance");
    text_line(out, fmt::format("run {} ({} mode), seed {}", inputs.manifest->run_id,
                               inputs.manifest->run_mode, inputs.manifest->seed));
    text_line(out, fmt::format("model {} via {}  codebook {}  dataset {}",
                               inputs.manifest->model.name, inputs.manifest->deployment,
                               inputs.manifest->codebook_hash,
                               inputs.manifest->dataset_fingerprint));
  }
  return out;
}

nlohmann::json render_json_report(const ReportInputs& inputs) {
  nlohmann::ordered_json j;
  j["title"] = inputs.title.empty() ? "Coding report" : inputs.title;
  if (inputs.reliability != nullptr)
    j["reliability"] = metrics::reliability_to_json(*inputs.reliability);
  if (inputs.gate != nullptr) j["gate"] = sampling::gate_to_json(*inputs.gate);
  if (inputs.classification != nullptr)
    j["classification"] = metrics::classification_to_json(*inputs.classification);
  if (inputs.intracoder != nullptr)
    j["intracoder"] = metrics::intracoder_to_json(*inputs.intracoder);
  if (inputs.sample != nullptr) j["sample"] = inputs.sample->to_json();
  if (inputs.workload != nullptr) {
    nlohmann::ordered_json workload;
    workload["total"] = inputs.workload->total;
    workload["routed"] = inputs.workload->routed;
    workload["routed_fraction"] = inputs.workload->routed_fraction();
    j["workload"] = std::move(workload);
  }
  if (inputs.benchmark != nullptr) j["benchmark"] = inputs.benchmark->to_json();
  if (inputs.manifest != nullptr) j["manifest"] = inputs.manifest->to_json();
  return j;
}

}  // namespace ca::report
