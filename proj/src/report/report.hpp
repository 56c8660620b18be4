#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "core/codebook.hpp"
#include "core/dataset.hpp"
#include "gateway/client.hpp"
#include "gateway/models.hpp"
#include "metrics/classification.hpp"
#include "metrics/reliability.hpp"
#include "runner/runner.hpp"
#include "sampling/gold.hpp"
#include "sampling/sampling.hpp"

namespace ca::report {

inline constexpr const char* kToolVersion = "0.1.0";

struct ManifestModel {
  std::string name;
  std::string provider;
  std::string endpoint;
};

/// Validation results that complete a manifest; a manifest cannot be
/// built without them.
struct ManifestValidation {
  std::size_t human_coder_count = 0;
  nlohmann::json intercoder;  // reliability document for the human panel
  nlohmann::json metrics;     // classification report against the gold standard
  nlohmann::json intracoder;  // repeated-run agreement document
};

/// The full disclosure record for one coding run: provenance, exact
/// prompt and parameters, sampling, and validation results. The
/// serializer is strict: loading rejects a manifest with missing fields
/// and names every one of them in a single error.
struct RunManifest {
  std::string tool_version;
  std::string created;  // ISO-8601, informational only
  std::string codebook_hash;
  std::string codebook_version;
  std::string dataset_fingerprint;
  std::size_t dataset_units = 0;
  ManifestModel model;
  std::string deployment;           // remote-api | local-server | mock
  std::string finetuning = "none";  // fine-tuning is out of scope
  nlohmann::json params;  // generation parameters as sent
  nlohmann::json prompt;  // full template
  std::string run_id;
  std::string run_mode;
  std::uint64_t seed = 0;
  std::string sample_strategy;
  std::size_t sample_size = 0;
  double sample_fraction = 0.0;  // of the full corpus
  std::string sample_hash;       // over the ordered unit ids
  std::string annotations_hash;  // over the final table bytes
  std::size_t human_coder_count = 0;
  nlohmann::json intercoder_alpha;
  nlohmann::json validation_metrics;
  nlohmann::json intracoder_agreement;

  nlohmann::json to_json() const;
};

RunManifest manifest_from_json(const nlohmann::json& j);
RunManifest load_manifest_file(const std::filesystem::path& path);
void save_manifest_file(const std::filesystem::path& path, const RunManifest& manifest);

/// Assembles the manifest from a finished run directory plus validation
/// results. `dataset` supplies the corpus size; `codebook` the version
/// string; both may be null. `registry` supplies provider, endpoint and
/// deployment method for the run's model. `sample_strategy` is recorded
/// verbatim ("full" when no sample file was involved). Missing
/// validation results or model provenance fail with an error naming
/// every absent field.
RunManifest build_manifest(const std::filesystem::path& run_dir,
                           const model::Dataset* dataset, const model::Codebook* codebook,
                           const gateway::Registry* registry,
                           const std::string& sample_strategy, const std::string& created,
                           const ManifestValidation* validation);

/// remote-api | local-server | mock, from the provider field.
std::string deployment_for(const gateway::ModelSpec& spec);

/// Replay check: recompute every fingerprint against the current
/// artifacts and list mismatches; empty means the run reproduces.
std::vector<std::string> verify_manifest(const RunManifest& manifest,
                                         const std::filesystem::path& run_dir,
                                         const model::Dataset* dataset,
                                         const model::Codebook* codebook);

struct BenchmarkPlan {
  std::vector<std::string> models;  // registry names
  gateway::ScreeningRequirements requirements;
  runner::RunConfig base_config;  // mode/model/unit_ids are set per model
  std::size_t intracoder_repetitions = 0;  // 0 = skip consistency runs
  std::size_t max_candidates = 10;
  std::filesystem::path work_dir;
};

struct BenchmarkEntry {
  std::string model;
  bool screened_out = false;
  std::vector<std::string> screening_reasons;
  std::string run_id;
  bool has_classification = false;
  metrics::ClassificationReport classification;
  metrics::ReliabilityResult agreement_with_gold;
  bool has_intracoder = false;
  metrics::IntracoderResult intracoder;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  double cost_usd = 0.0;
  double model_latency_seconds = 0.0;
};

struct BenchmarkResult {
  std::vector<BenchmarkEntry> entries;
  /// Eligible models ordered macro-F1 desc, cost asc, latency asc.
  std::vector<std::string> ranking;

  nlohmann::json to_json() const;
};

BenchmarkResult benchmark_from_json(const nlohmann::json& j);

/// Screens every candidate, runs the survivors over the gold units, and
/// ranks them. Providers come from the registry (mock models run
/// offline).
BenchmarkResult run_benchmark(const BenchmarkPlan& plan, const gateway::Registry& registry,
                              const model::Dataset& dataset, const model::Variable& variable,
                              const sampling::GoldStandard& gold);

struct WorkloadSummary {
  std::size_t total = 0;
  std::size_t routed = 0;

  double routed_fraction() const {
    return total == 0 ? 0.0 : static_cast<double>(routed) / static_cast<double>(total);
  }
};

/// Optional sections; null pointers are skipped.
struct ReportInputs {
  std::string title;
  const metrics::ReliabilityResult* reliability = nullptr;
  const sampling::GateResult* gate = nullptr;
  const metrics::ClassificationReport* classification = nullptr;
  const metrics::IntracoderResult* intracoder = nullptr;
  const sampling::SampleResult* sample = nullptr;
  const WorkloadSummary* workload = nullptr;
  const BenchmarkResult* benchmark = nullptr;
  const RunManifest* manifest = nullptr;
};

std::string render_text_report(const ReportInputs& inputs);
nlohmann::json render_json_report(const ReportInputs& inputs);

}  // namespace ca::report
