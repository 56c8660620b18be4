// Command-line front end for the content-analysis workflow. Talks to
// the core library exclusively through the C API in ca/ca.h; every
// structured result is JSON on stdout (or --out), every failure is one
// machine-parseable JSON line on stderr.

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ca/ca.h"

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& code, const std::string& message) {
  json line;
  line["error"] = {{"code", code}, {"message", message}};
  std::cerr << line.dump() << "\n";
  std::exit(1);
}

void check(ca_status status) {
  if (status != CA_OK) fail(ca_status_name(status), ca_last_error());
}

/// Adopts a C-string result from the library.
std::string take(char* text) {
  std::string out = text == nullptr ? "" : text;
  ca_string_free(text);
  return out;
}

json take_json(char* text) { return json::parse(take(text)); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("io", "cannot open " + path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  if (in.bad()) fail("io", "cannot read " + path);
  return content;
}

json read_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail("parse", path + ": " + e.what());
  }
}

void write_output(const std::string& content, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << content << "\n";
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) fail("io", "cannot open " + out_path + " for writing");
  out << content << "\n";
  if (!out) fail("io", "cannot write " + out_path);
}

void write_output(const json& document, const std::string& out_path) {
  write_output(document.dump(2), out_path);
}

std::string now_iso8601() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

using codebook_ptr = std::unique_ptr<ca_codebook, void (*)(ca_codebook*)>;
using dataset_ptr = std::unique_ptr<ca_dataset, void (*)(ca_dataset*)>;
using annotations_ptr = std::unique_ptr<ca_annotations, void (*)(ca_annotations*)>;
using matrix_ptr = std::unique_ptr<ca_matrix, void (*)(ca_matrix*)>;
using registry_ptr = std::unique_ptr<ca_registry, void (*)(ca_registry*)>;

codebook_ptr load_codebook(const std::string& path) {
  ca_codebook* raw = nullptr;
  check(ca_codebook_load(path.c_str(), &raw));
  return {raw, ca_codebook_free};
}

dataset_ptr load_dataset(const std::string& path) {
  ca_dataset* raw = nullptr;
  check(ca_dataset_load(path.c_str(), &raw));
  return {raw, ca_dataset_free};
}

annotations_ptr load_annotations(const std::string& path) {
  ca_annotations* raw = nullptr;
  check(ca_annotations_load(path.c_str(), &raw));
  return {raw, ca_annotations_free};
}

registry_ptr load_registry(const std::string& path) {
  ca_registry* raw = nullptr;
  check(ca_registry_load(path.c_str(), &raw));
  return {raw, ca_registry_free};
}

/// Accepts either a bare JSON array of ids or a sample document.
json unit_ids_from_file(const std::string& path) {
  const json j = read_json_file(path);
  if (j.is_array()) return j;
  if (j.is_object() && j.contains("unit_ids")) return j.at("unit_ids");
  fail("parse", path + ": expected a JSON array of unit ids or a sample document");
}

matrix_ptr build_matrix(const ca_annotations* annotations, const ca_codebook* codebook,
                        const std::string& variable,
                        const std::vector<std::string>& coders,
                        const std::string& units_file) {
  std::string coders_text;
  if (!coders.empty()) coders_text = json(coders).dump();
  std::string units_text;
  if (!units_file.empty()) units_text = unit_ids_from_file(units_file).dump();
  ca_matrix* raw = nullptr;
  check(ca_matrix_build(annotations, codebook, variable.c_str(),
                        coders.empty() ? nullptr : coders_text.c_str(),
                        units_file.empty() ? nullptr : units_text.c_str(), &raw));
  return {raw, ca_matrix_free};
}

// ---- subcommand options ----

struct validate_opts {
  std::string codebook;
  std::string out;
};

struct ingest_opts {
  std::string input;
  std::string output;
  std::string out;
};

struct sample_opts {
  std::string dataset;
  std::string codebook;
  std::string n = "auto";
  std::uint64_t seed = 0;
  double fraction = 0.0;
  double step = 0.0;
  std::size_t floor = 0;
  std::size_t minority_minimum = 0;
  std::string labels;
  std::string strategy = "probabilistic";
  std::string variable;
  std::size_t per_category_minimum = 2;
  bool heuristic = false;
  std::string out;
};

struct pilot_opts {
  std::string dataset;
  std::size_t n = 50;
  std::uint64_t seed = 0;
  std::string out;
};

struct annotate_opts {
  std::string run_dir;
  std::string dataset;
  std::string codebook;
  std::string registry;
  std::string run_config;
  bool resume = false;
  std::string model;
  std::string variable;
  std::string mode;
  std::string run_name;
  std::uint64_t seed = 0;
  std::size_t batch_size = 0;
  std::size_t permutations = 0;
  std::size_t repetitions = 0;
  std::size_t concurrency = 0;
  double temperature = 0.0;
  std::size_t max_tokens = 0;
  std::string prompt;
  std::string examples;
  std::string units;
  std::string out;
};

struct gold_opts {
  std::string annotations;
  std::string codebook;
  std::string variable;
  std::vector<std::string> coders;
  std::string units;
  std::string method = "majority";
  std::string resolutions;
  std::string out;
};

struct metrics_opts {
  std::string annotations;
  std::string codebook;
  std::string variable;
  std::vector<std::string> coders;
  std::string units;
  std::string scale;
  std::vector<double> rank_order;
  std::string gold;
  std::string coder;
  bool intracoder = false;
  std::string out;
};

struct benchmark_opts {
  std::string plan;
  std::string registry;
  std::string dataset;
  std::string codebook;
  std::string variable;
  std::string gold;
  std::string work_dir;
  std::string out;
};

struct hybrid_export_opts {
  std::string annotations;
  std::string dataset;
  std::string codebook;
  std::string variable;
  std::string by = "confidence";
  double threshold = 0.70;
  std::vector<std::string> coders;
  std::string units;
  std::string queue;
  std::string accepted;
  std::string out;
};

struct hybrid_import_opts {
  std::string queue;
  std::string codebook;
  std::string variable;
  std::string resolved;
  std::string out;
};

struct report_opts {
  std::string format = "text";
  std::string title;
  std::string reliability;
  std::string gate;
  std::string classification;
  std::string intracoder;
  std::string sample;
  std::string workload;
  std::string benchmark;
  std::string manifest;
  std::string out;
};

struct manifest_build_opts {
  std::string run_dir;
  std::string dataset;
  std::string codebook;
  std::string registry;
  std::string strategy = "full";
  std::string created;
  std::vector<std::string> validation;
  std::string gold;
  std::size_t human_coders = 0;
  std::string out;
};

struct manifest_verify_opts {
  std::string manifest;
  std::string run_dir;
  std::string dataset;
  std::string codebook;
};

// ---- subcommand implementations ----

void run_validate(const validate_opts& opt) {
  auto codebook = load_codebook(opt.codebook);
  char* findings_text = nullptr;
  check(ca_codebook_validate(codebook.get(), &findings_text));
  const json findings = take_json(findings_text);
  write_output(findings, opt.out);
  std::size_t errors = 0;
  for (const auto& finding : findings)
    if (finding.value("severity", "") == "error") ++errors;
  if (errors > 0)
    fail("validation",
         "codebook has " + std::to_string(errors) + " error finding(s)");
}

void run_ingest(const ingest_opts& opt) {
  auto dataset = load_dataset(opt.input);
  if (!opt.output.empty()) check(ca_dataset_write(dataset.get(), opt.output.c_str()));
  char* info_text = nullptr;
  check(ca_dataset_info(dataset.get(), &info_text));
  const json info = take_json(info_text);
  for (const auto& warning : info.value("warnings", json::array()))
    std::cerr << "warning: " << warning.get<std::string>() << "\n";
  write_output(info, opt.out);
}

void run_sample(const sample_opts& opt, const CLI::App* cmd) {
  auto dataset = load_dataset(opt.dataset);
  char* result_text = nullptr;

  if (opt.heuristic) {
    char* info_text = nullptr;
    check(ca_dataset_info(dataset.get(), &info_text));
    const auto units = take_json(info_text).at("units").get<std::size_t>();
    check(ca_sample_heuristic(units, &result_text));
    write_output(take_json(result_text), opt.out);
    return;
  }

  if (opt.strategy == "rich-range") {
    if (opt.codebook.empty() || opt.variable.empty() || opt.labels.empty())
      fail("invalid_argument",
           "rich-range sampling needs --codebook, --variable and --labels");
    auto codebook = load_codebook(opt.codebook);
    const std::string labels = read_json_file(opt.labels).dump();
    check(ca_sample_rich_range(dataset.get(), codebook.get(), opt.variable.c_str(),
                               labels.c_str(), opt.per_category_minimum, opt.seed,
                               &result_text));
  } else if (opt.strategy != "probabilistic") {
    fail("invalid_argument",
         "unknown strategy '" + opt.strategy + "' (probabilistic | rich-range)");
  } else if (opt.n == "auto") {
    json config = json::object();
    if (cmd->count("--fraction") > 0) config["initial_fraction"] = opt.fraction;
    if (cmd->count("--step") > 0) config["step"] = opt.step;
    if (cmd->count("--floor") > 0) config["floor"] = opt.floor;
    if (cmd->count("--minority-min") > 0) config["minority_minimum"] = opt.minority_minimum;
    config["seed"] = opt.seed;
    std::string labels;
    if (!opt.labels.empty()) labels = read_json_file(opt.labels).dump();
    check(ca_sample_draw(dataset.get(), config.dump().c_str(),
                         opt.labels.empty() ? nullptr : labels.c_str(), &result_text));
  } else {
    std::size_t n = 0;
    try {
      n = std::stoul(opt.n);
    } catch (const std::exception&) {
      fail("invalid_argument", "--n must be \"auto\" or a positive integer");
    }
    check(ca_sample_fixed(dataset.get(), n, opt.seed, &result_text));
  }

  const json result = take_json(result_text);
  for (const auto& warning : result.value("warnings", json::array()))
    std::cerr << "warning: " << warning.get<std::string>() << "\n";
  write_output(result, opt.out);
}

void run_pilot(const pilot_opts& opt) {
  auto dataset = load_dataset(opt.dataset);
  char* result_text = nullptr;
  check(ca_sample_fixed(dataset.get(), opt.n, opt.seed, &result_text));
  write_output(take_json(result_text), opt.out);
}

void run_annotate(const annotate_opts& opt, const CLI::App* cmd) {
  auto dataset = load_dataset(opt.dataset);
  auto codebook = load_codebook(opt.codebook);
  auto registry = load_registry(opt.registry);
  char* summary_text = nullptr;

  if (opt.resume) {
    check(ca_run_resume(opt.run_dir.c_str(), registry.get(), dataset.get(),
                        codebook.get(), &summary_text));
  } else {
    char* defaults_text = nullptr;
    check(ca_run_defaults(&defaults_text));
    json config = take_json(defaults_text);
    if (!opt.run_config.empty()) config.update(read_json_file(opt.run_config), true);
    if (cmd->count("--model") > 0) config["model"] = opt.model;
    if (cmd->count("--variable") > 0) config["variable"] = opt.variable;
    if (cmd->count("--mode") > 0) config["mode"] = opt.mode;
    if (cmd->count("--run-name") > 0) config["run_name"] = opt.run_name;
    if (cmd->count("--seed") > 0) config["seed"] = opt.seed;
    if (cmd->count("--batch-size") > 0) config["batch_size"] = opt.batch_size;
    if (cmd->count("--permutations") > 0) config["permutations"] = opt.permutations;
    if (cmd->count("--repetitions") > 0) config["repetitions"] = opt.repetitions;
    if (cmd->count("--concurrency") > 0) config["concurrency"] = opt.concurrency;
    if (cmd->count("--temperature") > 0) config["params"]["temperature"] = opt.temperature;
    if (cmd->count("--max-tokens") > 0) config["params"]["max_tokens"] = opt.max_tokens;
    if (!opt.prompt.empty()) config["prompt"] = read_json_file(opt.prompt);
    if (!opt.examples.empty()) config["examples"] = read_json_file(opt.examples);
    if (!opt.units.empty()) config["unit_ids"] = unit_ids_from_file(opt.units);
    if (config["prompt"].value("name", "").empty()) config["prompt"]["name"] = "zero_shot";
    check(ca_run(opt.run_dir.c_str(), config.dump().c_str(), registry.get(),
                 dataset.get(), codebook.get(), &summary_text));
  }

  const json summary = take_json(summary_text);
  for (const auto& warning : summary.value("warnings", json::array()))
    std::cerr << "warning: " << warning.get<std::string>() << "\n";
  write_output(summary, opt.out);
}

void run_gold(const gold_opts& opt) {
  auto annotations = load_annotations(opt.annotations);
  auto codebook = load_codebook(opt.codebook);
  auto matrix =
      build_matrix(annotations.get(), codebook.get(), opt.variable, opt.coders, opt.units);

  char* gold_text = nullptr;
  if (opt.method == "majority") {
    check(ca_gold_majority(matrix.get(), &gold_text));
  } else if (opt.method == "consensus") {
    if (opt.resolutions.empty())
      fail("invalid_argument", "consensus gold needs --resolutions");
    const std::string resolutions = read_json_file(opt.resolutions).dump();
    check(ca_gold_consensus(matrix.get(), resolutions.c_str(), &gold_text));
  } else if (opt.method == "agreement-only") {
    check(ca_gold_agreement_only(matrix.get(), &gold_text));
  } else {
    fail("invalid_argument",
         "unknown method '" + opt.method + "' (majority | consensus | agreement-only)");
  }

  const json gold = take_json(gold_text);
  for (const auto& warning : gold.value("warnings", json::array()))
    std::cerr << "warning: " << warning.get<std::string>() << "\n";
  write_output(gold, opt.out);
}

void run_metrics(const metrics_opts& opt) {
  auto annotations = load_annotations(opt.annotations);
  auto codebook = load_codebook(opt.codebook);
  auto matrix =
      build_matrix(annotations.get(), codebook.get(), opt.variable, opt.coders, opt.units);

  json document = json::object();
  char* info_text = nullptr;
  check(ca_matrix_info(matrix.get(), &info_text));
  const auto coder_columns = take_json(info_text).at("coders").size();

  // Intercoder reliability needs at least two coder columns; a lone
  // model's repeated runs go through --intracoder instead.
  if (coder_columns >= 2) {
    std::string rank_order;
    if (!opt.rank_order.empty()) rank_order = json(opt.rank_order).dump();
    char* reliability_text = nullptr;
    check(ca_krippendorff_alpha(matrix.get(),
                                opt.scale.empty() ? nullptr : opt.scale.c_str(),
                                opt.rank_order.empty() ? nullptr : rank_order.c_str(),
                                &reliability_text));
    const std::string reliability = take(reliability_text);
    document["reliability"] = json::parse(reliability);
    char* gate_text = nullptr;
    check(ca_gate(reliability.c_str(), &gate_text));
    document["gate"] = take_json(gate_text);
  }

  if (!opt.gold.empty()) {
    std::vector<std::string> prediction_coders;
    if (!opt.coder.empty()) prediction_coders.push_back(opt.coder);
    auto predictions = build_matrix(annotations.get(), codebook.get(), opt.variable,
                                    prediction_coders, opt.units);
    const std::string gold = read_json_file(opt.gold).dump();
    char* report_text = nullptr;
    check(ca_classification(predictions.get(), opt.coder.empty() ? nullptr : opt.coder.c_str(),
                            gold.c_str(), &report_text));
    document["classification"] = take_json(report_text);
  }

  if (opt.intracoder) {
    char* intracoder_text = nullptr;
    check(ca_intracoder(annotations.get(), codebook.get(), opt.variable.c_str(),
                        &intracoder_text));
    document["intracoder"] = take_json(intracoder_text);
  }

  write_output(document, opt.out);
}

void run_benchmark(const benchmark_opts& opt) {
  auto dataset = load_dataset(opt.dataset);
  auto codebook = load_codebook(opt.codebook);
  auto registry = load_registry(opt.registry);

  json plan = read_json_file(opt.plan);
  char* defaults_text = nullptr;
  check(ca_run_defaults(&defaults_text));
  json base_config = take_json(defaults_text);
  if (plan.contains("base_config")) base_config.update(plan.at("base_config"), true);
  if (base_config["prompt"].value("name", "").empty())
    base_config["prompt"]["name"] = "zero_shot";
  plan["base_config"] = base_config;
  if (!opt.work_dir.empty()) plan["work_dir"] = opt.work_dir;

  const std::string gold = read_json_file(opt.gold).dump();
  char* result_text = nullptr;
  check(ca_benchmark(plan.dump().c_str(), registry.get(), dataset.get(), codebook.get(),
                     opt.variable.c_str(), gold.c_str(), &result_text));
  write_output(take_json(result_text), opt.out);
}

void run_hybrid_export(const hybrid_export_opts& opt) {
  auto codebook = load_codebook(opt.codebook);
  auto dataset = load_dataset(opt.dataset);
  auto annotations = load_annotations(opt.annotations);

  ca_annotations* accepted_raw = nullptr;
  char* summary_text = nullptr;
  if (opt.by == "confidence") {
    check(ca_hybrid_route_confidence(annotations.get(), dataset.get(), codebook.get(),
                                     opt.variable.c_str(), opt.threshold,
                                     opt.queue.c_str(),
                                     opt.accepted.empty() ? nullptr : &accepted_raw,
                                     &summary_text));
  } else if (opt.by == "divergence") {
    auto matrix = build_matrix(annotations.get(), codebook.get(), opt.variable, opt.coders,
                               opt.units);
    check(ca_hybrid_route_divergence(matrix.get(), dataset.get(), opt.queue.c_str(),
                                     opt.accepted.empty() ? nullptr : &accepted_raw,
                                     &summary_text));
  } else {
    fail("invalid_argument", "unknown routing '" + opt.by + "' (confidence | divergence)");
  }

  annotations_ptr accepted(accepted_raw, ca_annotations_free);
  if (!opt.accepted.empty())
    check(ca_annotations_save(accepted.get(), opt.accepted.c_str()));
  write_output(take_json(summary_text), opt.out);
}

void run_hybrid_import(const hybrid_import_opts& opt) {
  auto codebook = load_codebook(opt.codebook);
  ca_annotations* resolved_raw = nullptr;
  char* report_text = nullptr;
  check(ca_hybrid_import(opt.queue.c_str(), codebook.get(), opt.variable.c_str(),
                         opt.resolved.empty() ? nullptr : &resolved_raw, &report_text));
  annotations_ptr resolved(resolved_raw, ca_annotations_free);
  if (!opt.resolved.empty())
    check(ca_annotations_save(resolved.get(), opt.resolved.c_str()));
  const json report = take_json(report_text);
  for (const auto& error : report.value("errors", json::array()))
    std::cerr << "error: " << error.get<std::string>() << "\n";
  write_output(report, opt.out);
}

void run_report(const report_opts& opt) {
  json inputs = json::object();
  if (!opt.title.empty()) inputs["title"] = opt.title;
  if (!opt.reliability.empty()) inputs["reliability"] = read_json_file(opt.reliability);
  if (!opt.gate.empty()) inputs["gate"] = read_json_file(opt.gate);
  if (!opt.classification.empty())
    inputs["classification"] = read_json_file(opt.classification);
  if (!opt.intracoder.empty()) inputs["intracoder"] = read_json_file(opt.intracoder);
  if (!opt.sample.empty()) inputs["sample"] = read_json_file(opt.sample);
  if (!opt.workload.empty()) inputs["workload"] = read_json_file(opt.workload);
  if (!opt.benchmark.empty()) inputs["benchmark"] = read_json_file(opt.benchmark);
  if (!opt.manifest.empty()) inputs["manifest"] = read_json_file(opt.manifest);

  // A metrics-output file may carry several sections at once; unwrap
  // the requested one.
  for (const char* key : {"reliability", "gate", "classification", "intracoder"}) {
    if (inputs.contains(key) && inputs.at(key).is_object() && inputs.at(key).contains(key))
      inputs[key] = inputs.at(key).at(key);
  }

  char* report_text = nullptr;
  check(ca_report_render(inputs.dump().c_str(), opt.format.c_str(), &report_text));
  if (opt.format == "json")
    write_output(take_json(report_text), opt.out);
  else
    write_output(take(report_text), opt.out);
}

void run_manifest_build(const manifest_build_opts& opt, const CLI::App* cmd) {
  dataset_ptr dataset(nullptr, ca_dataset_free);
  if (!opt.dataset.empty()) dataset = load_dataset(opt.dataset);
  codebook_ptr codebook(nullptr, ca_codebook_free);
  if (!opt.codebook.empty()) codebook = load_codebook(opt.codebook);
  registry_ptr registry(nullptr, ca_registry_free);
  if (!opt.registry.empty()) registry = load_registry(opt.registry);

  json validation = json::object();
  for (const auto& path : opt.validation) {
    const json v = read_json_file(path);
    if (v.contains("reliability") || v.contains("classification") ||
        v.contains("intracoder")) {
      // metrics-command output: map its sections onto the manifest slots
      if (v.contains("reliability")) validation["intercoder"] = v.at("reliability");
      if (v.contains("classification")) validation["metrics"] = v.at("classification");
      if (v.contains("intracoder")) validation["intracoder"] = v.at("intracoder");
    } else {
      validation.update(v, true);
    }
  }
  if (cmd->count("--human-coders") > 0) {
    validation["human_coder_count"] = opt.human_coders;
  } else if (!opt.gold.empty()) {
    validation["human_coder_count"] =
        read_json_file(opt.gold).value("coder_count", std::size_t{0});
  }

  const std::string created = opt.created.empty() ? now_iso8601() : opt.created;
  char* manifest_text = nullptr;
  check(ca_manifest_build(opt.run_dir.c_str(), dataset.get(), codebook.get(),
                          registry.get(), opt.strategy.c_str(), created.c_str(),
                          validation.empty() ? nullptr : validation.dump().c_str(),
                          &manifest_text));
  write_output(take_json(manifest_text), opt.out);
}

void run_manifest_verify(const manifest_verify_opts& opt) {
  dataset_ptr dataset(nullptr, ca_dataset_free);
  if (!opt.dataset.empty()) dataset = load_dataset(opt.dataset);
  codebook_ptr codebook(nullptr, ca_codebook_free);
  if (!opt.codebook.empty()) codebook = load_codebook(opt.codebook);

  const std::string manifest = read_json_file(opt.manifest).dump();
  char* mismatches_text = nullptr;
  check(ca_manifest_verify(manifest.c_str(), opt.run_dir.c_str(), dataset.get(),
                           codebook.get(), &mismatches_text));
  const json mismatches = take_json(mismatches_text);
  write_output(mismatches, "");
  if (!mismatches.empty())
    fail("validation",
         "manifest does not reproduce: " + std::to_string(mismatches.size()) +
             " mismatch(es)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LLM-assisted content analysis: codebooks, prompts, annotation runs, "
               "validation metrics, hybrid routing, and reproducibility manifests"};
  app.set_config("--config", "", "Read option defaults from this TOML/INI file");
  app.set_version_flag("--version", ca_version());
  app.require_subcommand(1);

  // validate-codebook
  auto validate = std::make_shared<validate_opts>();
  auto* validate_cmd =
      app.add_subcommand("validate-codebook", "Check a codebook against its invariants");
  validate_cmd->add_option("--codebook", validate->codebook, "Codebook JSON file")
      ->required();
  validate_cmd->add_option("--out", validate->out, "Write findings JSON here");
  validate_cmd->callback([validate] { run_validate(*validate); });

  // ingest
  auto ingest = std::make_shared<ingest_opts>();
  auto* ingest_cmd =
      app.add_subcommand("ingest", "Read a line-delimited dataset and report on it");
  ingest_cmd->add_option("--input", ingest->input, "JSONL dataset file")->required();
  ingest_cmd->add_option("--output", ingest->output, "Write the canonical dataset here");
  ingest_cmd->add_option("--out", ingest->out, "Write the info JSON here");
  ingest_cmd->callback([ingest] { run_ingest(*ingest); });

  // sample
  auto sample = std::make_shared<sample_opts>();
  auto* sample_cmd = app.add_subcommand("sample", "Draw a validation sample");
  sample_cmd->add_option("--dataset", sample->dataset, "JSONL dataset file")->required();
  sample_cmd->add_option("--codebook", sample->codebook, "Codebook (rich-range only)");
  sample_cmd->add_option("--n", sample->n, "\"auto\" for the sizing rule, or a fixed count");
  sample_cmd->add_option("--seed", sample->seed, "Draw seed");
  sample_cmd->add_option("--fraction", sample->fraction, "Initial sampling fraction");
  sample_cmd->add_option("--step", sample->step, "Fraction growth per expansion step");
  sample_cmd->add_option("--floor", sample->floor, "Minimum sample size");
  sample_cmd->add_option("--minority-min", sample->minority_minimum,
                         "Required instances of every class");
  sample_cmd->add_option("--labels", sample->labels, "Provisional labels JSON file");
  sample_cmd->add_option("--strategy", sample->strategy, "probabilistic | rich-range");
  sample_cmd->add_option("--variable", sample->variable, "Variable (rich-range only)");
  sample_cmd->add_option("--per-category-min", sample->per_category_minimum,
                         "Instances per category (rich-range only)");
  sample_cmd->add_flag("--heuristic", sample->heuristic,
                       "Print the 10%-clamped size recommendation instead");
  sample_cmd->add_option("--out", sample->out, "Write the sample JSON here");
  sample_cmd->callback([sample, sample_cmd] { run_sample(*sample, sample_cmd); });

  // pilot
  auto pilot = std::make_shared<pilot_opts>();
  auto* pilot_cmd =
      app.add_subcommand("pilot", "Draw a small pilot sample for codebook refinement");
  pilot_cmd->add_option("--dataset", pilot->dataset, "JSONL dataset file")->required();
  pilot_cmd->add_option("--n", pilot->n, "Pilot size");
  pilot_cmd->add_option("--seed", pilot->seed, "Draw seed");
  pilot_cmd->add_option("--out", pilot->out, "Write the sample JSON here");
  pilot_cmd->callback([pilot] { run_pilot(*pilot); });

  // annotate
  auto annotate = std::make_shared<annotate_opts>();
  auto* annotate_cmd = app.add_subcommand("annotate", "Run a model over the dataset");
  annotate_cmd->add_option("--run-dir", annotate->run_dir, "Run directory")->required();
  annotate_cmd->add_option("--dataset", annotate->dataset, "JSONL dataset file")
      ->required();
  annotate_cmd->add_option("--codebook", annotate->codebook, "Codebook JSON file")
      ->required();
  annotate_cmd->add_option("--registry", annotate->registry, "Model registry JSON file")
      ->required();
  annotate_cmd->add_option("--run-config", annotate->run_config,
                           "Run configuration JSON (merged over defaults)");
  annotate_cmd->add_flag("--resume", annotate->resume, "Resume an interrupted run");
  annotate_cmd->add_option("--model", annotate->model, "Registry model name");
  annotate_cmd->add_option("--variable", annotate->variable, "Variable to code");
  annotate_cmd->add_option("--mode", annotate->mode, "single | batched | repeated");
  annotate_cmd->add_option("--run-name", annotate->run_name, "Label for the run");
  annotate_cmd->add_option("--seed", annotate->seed, "Run seed");
  annotate_cmd->add_option("--batch-size", annotate->batch_size, "Units per batched call");
  annotate_cmd->add_option("--permutations", annotate->permutations,
                           "Presentation orders in batched mode");
  annotate_cmd->add_option("--repetitions", annotate->repetitions,
                           "Repeated-mode run count");
  annotate_cmd->add_option("--concurrency", annotate->concurrency, "Parallel calls (<= 4)");
  annotate_cmd->add_option("--temperature", annotate->temperature, "Sampling temperature");
  annotate_cmd->add_option("--max-tokens", annotate->max_tokens, "Response token limit");
  annotate_cmd->add_option("--prompt", annotate->prompt, "Prompt template JSON file");
  annotate_cmd->add_option("--examples", annotate->examples, "Few-shot examples JSON file");
  annotate_cmd->add_option("--units", annotate->units, "Sample document or id array file");
  annotate_cmd->add_option("--out", annotate->out, "Write the run summary here");
  annotate_cmd->callback([annotate, annotate_cmd] { run_annotate(*annotate, annotate_cmd); });

  // gold
  auto gold = std::make_shared<gold_opts>();
  auto* gold_cmd =
      app.add_subcommand("gold", "Consolidate coder annotations into a gold standard");
  gold_cmd->add_option("--annotations", gold->annotations, "Annotations CSV file")
      ->required();
  gold_cmd->add_option("--codebook", gold->codebook, "Codebook JSON file")->required();
  gold_cmd->add_option("--variable", gold->variable, "Variable name")->required();
  gold_cmd->add_option("--coders", gold->coders, "Coder ids (comma-separated)")
      ->delimiter(',');
  gold_cmd->add_option("--units", gold->units, "Sample document or id array file");
  gold_cmd->add_option("--method", gold->method, "majority | consensus | agreement-only");
  gold_cmd->add_option("--resolutions", gold->resolutions,
                       "Discussion outcomes JSON file (consensus only)");
  gold_cmd->add_option("--out", gold->out, "Write the gold JSON here");
  gold_cmd->callback([gold] { run_gold(*gold); });

  // metrics
  auto metrics = std::make_shared<metrics_opts>();
  auto* metrics_cmd =
      app.add_subcommand("metrics", "Reliability, validity, and consistency metrics");
  metrics_cmd->add_option("--annotations", metrics->annotations, "Annotations CSV file")
      ->required();
  metrics_cmd->add_option("--codebook", metrics->codebook, "Codebook JSON file")
      ->required();
  metrics_cmd->add_option("--variable", metrics->variable, "Variable name")->required();
  metrics_cmd->add_option("--coders", metrics->coders, "Coder ids (comma-separated)")
      ->delimiter(',');
  metrics_cmd->add_option("--units", metrics->units, "Sample document or id array file");
  metrics_cmd->add_option("--scale", metrics->scale,
                          "Override the variable's measurement scale");
  metrics_cmd->add_option("--rank-order", metrics->rank_order,
                          "Ordinal rank order (comma-separated codes)")
      ->delimiter(',');
  metrics_cmd->add_option("--gold", metrics->gold, "Gold JSON for validity metrics");
  metrics_cmd->add_option("--coder", metrics->coder, "Prediction coder id");
  metrics_cmd->add_flag("--intracoder", metrics->intracoder,
                        "Repeated-run agreement across run ids");
  metrics_cmd->add_option("--out", metrics->out, "Write the metrics JSON here");
  metrics_cmd->callback([metrics] { run_metrics(*metrics); });

  // benchmark
  auto benchmark = std::make_shared<benchmark_opts>();
  auto* benchmark_cmd =
      app.add_subcommand("benchmark", "Rank candidate models against a gold standard");
  benchmark_cmd->add_option("--plan", benchmark->plan, "Benchmark plan JSON file")
      ->required();
  benchmark_cmd->add_option("--registry", benchmark->registry, "Model registry JSON file")
      ->required();
  benchmark_cmd->add_option("--dataset", benchmark->dataset, "JSONL dataset file")
      ->required();
  benchmark_cmd->add_option("--codebook", benchmark->codebook, "Codebook JSON file")
      ->required();
  benchmark_cmd->add_option("--variable", benchmark->variable, "Variable name")
      ->required();
  benchmark_cmd->add_option("--gold", benchmark->gold, "Gold JSON file")->required();
  benchmark_cmd->add_option("--work-dir", benchmark->work_dir,
                            "Overrides the plan's run directory");
  benchmark_cmd->add_option("--out", benchmark->out, "Write the benchmark JSON here");
  benchmark_cmd->callback([benchmark] { run_benchmark(*benchmark); });

  // hybrid
  auto* hybrid_cmd =
      app.add_subcommand("hybrid", "Split units between machine codes and manual review");
  hybrid_cmd->require_subcommand(1);

  auto hybrid_export = std::make_shared<hybrid_export_opts>();
  auto* export_cmd =
      hybrid_cmd->add_subcommand("export", "Route units and write the review queue");
  export_cmd->add_option("--annotations", hybrid_export->annotations,
                         "Annotations CSV file")
      ->required();
  export_cmd->add_option("--dataset", hybrid_export->dataset, "JSONL dataset file")
      ->required();
  export_cmd->add_option("--codebook", hybrid_export->codebook, "Codebook JSON file")
      ->required();
  export_cmd->add_option("--variable", hybrid_export->variable, "Variable name")
      ->required();
  export_cmd->add_option("--by", hybrid_export->by, "confidence | divergence");
  export_cmd->add_option("--threshold", hybrid_export->threshold,
                         "Confidence acceptance threshold");
  export_cmd->add_option("--coders", hybrid_export->coders,
                         "Coder ids (divergence routing)")
      ->delimiter(',');
  export_cmd->add_option("--units", hybrid_export->units,
                         "Sample document or id array file");
  export_cmd->add_option("--queue", hybrid_export->queue, "Review queue CSV to write")
      ->required();
  export_cmd->add_option("--accepted", hybrid_export->accepted,
                         "Write accepted annotations here");
  export_cmd->add_option("--out", hybrid_export->out, "Write the routing summary here");
  export_cmd->callback([hybrid_export] { run_hybrid_export(*hybrid_export); });

  auto hybrid_import = std::make_shared<hybrid_import_opts>();
  auto* import_cmd =
      hybrid_cmd->add_subcommand("import", "Validate and import review resolutions");
  import_cmd->add_option("--queue", hybrid_import->queue, "Filled-in review queue CSV")
      ->required();
  import_cmd->add_option("--codebook", hybrid_import->codebook, "Codebook JSON file")
      ->required();
  import_cmd->add_option("--variable", hybrid_import->variable, "Variable name")
      ->required();
  import_cmd->add_option("--resolved", hybrid_import->resolved,
                         "Write resolved annotations here");
  import_cmd->add_option("--out", hybrid_import->out, "Write the import report here");
  import_cmd->callback([hybrid_import] { run_hybrid_import(*hybrid_import); });

  // report
  auto report = std::make_shared<report_opts>();
  auto* report_cmd = app.add_subcommand("report", "Render collected results");
  report_cmd->add_option("--format", report->format, "text | json");
  report_cmd->add_option("--title", report->title, "Report heading");
  report_cmd->add_option("--reliability", report->reliability, "Reliability JSON file");
  report_cmd->add_option("--gate", report->gate, "Gate JSON file");
  report_cmd->add_option("--classification", report->classification,
                         "Classification JSON file");
  report_cmd->add_option("--intracoder", report->intracoder, "Intracoder JSON file");
  report_cmd->add_option("--sample", report->sample, "Sample JSON file");
  report_cmd->add_option("--workload", report->workload,
                         "Routing summary JSON file (total/routed)");
  report_cmd->add_option("--benchmark", report->benchmark, "Benchmark JSON file");
  report_cmd->add_option("--manifest", report->manifest, "Manifest JSON file");
  report_cmd->add_option("--out", report->out, "Write the report here");
  report_cmd->callback([report] { run_report(*report); });

  // manifest
  auto* manifest_cmd =
      app.add_subcommand("manifest", "Build or verify reproducibility manifests");
  manifest_cmd->require_subcommand(1);

  auto manifest_build = std::make_shared<manifest_build_opts>();
  auto* build_cmd = manifest_cmd->add_subcommand(
      "build", "Assemble the disclosure manifest for a finished run");
  build_cmd->add_option("--run-dir", manifest_build->run_dir, "Run directory")->required();
  build_cmd->add_option("--dataset", manifest_build->dataset, "JSONL dataset file");
  build_cmd->add_option("--codebook", manifest_build->codebook, "Codebook JSON file");
  build_cmd->add_option("--registry", manifest_build->registry, "Model registry JSON file");
  build_cmd->add_option("--strategy", manifest_build->strategy,
                        "Sampling strategy to record");
  build_cmd->add_option("--created", manifest_build->created,
                        "Timestamp to record (default: now, UTC)");
  build_cmd->add_option("--validation", manifest_build->validation,
                        "Metrics-command output JSON file(s), merged in order");
  build_cmd->add_option("--gold", manifest_build->gold,
                        "Gold JSON (supplies the human coder count)");
  build_cmd->add_option("--human-coders", manifest_build->human_coders,
                        "Human coder count behind the gold standard");
  build_cmd->add_option("--out", manifest_build->out, "Write the manifest here");
  build_cmd->callback(
      [manifest_build, build_cmd] { run_manifest_build(*manifest_build, build_cmd); });

  auto manifest_verify = std::make_shared<manifest_verify_opts>();
  auto* verify_cmd = manifest_cmd->add_subcommand(
      "verify", "Check a manifest against the run directory artifacts");
  verify_cmd->add_option("--manifest", manifest_verify->manifest, "Manifest JSON file")
      ->required();
  verify_cmd->add_option("--run-dir", manifest_verify->run_dir, "Run directory")
      ->required();
  verify_cmd->add_option("--dataset", manifest_verify->dataset, "JSONL dataset file");
  verify_cmd->add_option("--codebook", manifest_verify->codebook, "Codebook JSON file");
  verify_cmd->callback([manifest_verify] { run_manifest_verify(*manifest_verify); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << ca_version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help();
    json line;
    line["error"] = {{"code", "usage"}, {"message", e.what()}};
    std::cerr << line.dump() << "\n";
    return 2;
  }
  return 0;
}
