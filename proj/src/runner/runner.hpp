#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "core/annotations.hpp"
#include "core/dataset.hpp"
#include "gateway/client.hpp"
#include "metrics/reliability.hpp"
#include "prompts/prompts.hpp"
#include "support/errors.hpp"

namespace ca::runner {

enum class RunMode { single, batched, repeated };

const char* to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& text);

inline constexpr std::size_t kDefaultBatchSize = 32;
inline constexpr std::size_t kDefaultPermutations = 5;
inline constexpr std::size_t kDefaultRepetitions = 3;
inline constexpr std::size_t kMaxConcurrency = 4;
inline constexpr double kDegradedMissingFraction = 0.20;

struct RunConfig {
  std::string run_name;
  std::string model;
  std::string variable;
  RunMode mode = RunMode::single;
  std::size_t batch_size = kDefaultBatchSize;
  std::size_t permutations = kDefaultPermutations;  // batched presentation orders
  std::size_t repetitions = kDefaultRepetitions;    // repeated-mode passes
  std::uint64_t seed = 0;
  std::size_t concurrency = 1;  // capped at kMaxConcurrency
  bool parse_retry = true;      // one corrective re-ask on parse failure
  gateway::GenerationParams params;
  prompts::PromptTemplate prompt;
  std::vector<prompts::FewShotExample> examples;

  // Pinned when the run starts; resume refuses to continue on mismatch.
  std::vector<std::string> unit_ids;
  std::string dataset_fingerprint;
  std::string codebook_hash;

  void validate() const;
  nlohmann::json to_json() const;

  /// Content id over the full configuration: identical configs on
  /// identical data share a run id.
  std::string base_run_id() const;
};

RunConfig run_config_from_json(const nlohmann::json& j);

struct RunSummary {
  std::string run_id;
  RunMode mode = RunMode::single;
  std::size_t units = 0;
  std::size_t coded = 0;
  std::size_t missing = 0;
  double missing_fraction = 0.0;
  bool degraded = false;  // missing fraction above kDegradedMissingFraction
  std::size_t parse_retries = 0;
  std::size_t truncated = 0;
  std::size_t calls = 0;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  double model_latency_seconds = 0.0;
  /// batched mode: per-unit vote tally (code text -> count; "" = missing).
  std::map<std::string, std::map<std::string, std::size_t>> votes;
  bool has_intracoder = false;  // repeated mode
  metrics::IntracoderResult intracoder;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

struct RunResult {
  std::string run_id;
  model::AnnotationList annotations;  // final table rows, sorted
  RunSummary summary;
};

/// Executes annotation runs against a run directory:
///   config.json              resolved configuration, written first
///   exchanges.jsonl          every model call, appended as it happens
///   annotations.partial.csv  append-only progress log
///   annotations.csv          final table (byte-identical for equal runs)
///   summary.json             counts, votes, warnings
/// An interrupted run leaves the directory resumable; resuming finishes
/// with the same final table as an uninterrupted run.
class Runner {
 public:
  Runner(gateway::Client client, std::filesystem::path run_dir);

  RunResult run(RunConfig config, const model::Dataset& dataset,
                const model::Variable& variable);
  RunResult resume(const model::Dataset& dataset, const model::Variable& variable);

  static bool can_resume(const std::filesystem::path& run_dir);

 private:
  struct Vote {
    bool present = false;  // a pass produced a verdict (possibly MISSING)
    model::CellValue value;
    std::optional<double> confidence;
  };

  // unit id -> pass run id -> vote; prefilled from the partial table on
  // resume so finished work is never re-requested.
  using DoneMap = std::map<std::string, std::map<std::string, Vote>>;

  struct UnitOutcome {
    Vote vote;
    std::vector<nlohmann::json> exchanges;
    std::size_t retries = 0;
    std::size_t truncated = 0;
    std::size_t calls = 0;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    double latency_seconds = 0.0;
    bool failed = false;
    ErrorCode error_code = ErrorCode::internal;
    std::string error_message;
  };

  RunResult execute(const RunConfig& config, const model::Dataset& dataset,
                    const model::Variable& variable, DoneMap& done);

  UnitOutcome code_unit(const RunConfig& config, const model::Variable& variable,
                        const model::CodingUnit& unit, const std::string& pass_id);

  void run_unit_passes(const RunConfig& config, const model::Dataset& dataset,
                       const model::Variable& variable, const std::string& pass_id,
                       DoneMap& done, RunSummary& summary);

  void run_batched_pass(const RunConfig& config, const model::Dataset& dataset,
                        const model::Variable& variable, std::size_t permutation,
                        const std::string& pass_id, DoneMap& done, RunSummary& summary);

  void write_exchange(const nlohmann::json& record);
  void append_partial(const model::Annotation& annotation);

  gateway::Client client_;
  std::filesystem::path run_dir_;
  std::size_t sequence_ = 0;
};

/// Sub-run id for one pass (permutation or repetition) of a run.
std::string pass_run_id(const std::string& base_run_id, const char* kind, std::size_t index);

}  // namespace ca::runner
