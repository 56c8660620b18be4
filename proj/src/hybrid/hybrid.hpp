#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "core/annotations.hpp"
#include "core/dataset.hpp"

namespace ca::hybrid {

inline constexpr double kDefaultConfidenceThreshold = 0.70;

struct RoutingPolicy {
  double confidence_threshold = kDefaultConfidenceThreshold;

  void validate() const;
};

struct ReviewItem {
  std::string unit_id;
  std::string text;
  std::vector<double> candidates;  // codes in play for this unit
  std::string reason;
  std::optional<double> resolution;  // filled by a human or a judge model
  std::string resolver;
};

struct ReviewQueue {
  std::string variable;
  std::vector<ReviewItem> items;
};

struct RoutingResult {
  model::AnnotationList accepted;  // auto-retained machine codes
  ReviewQueue queue;               // routed to review
  std::size_t total = 0;

  /// Manual workload share; what hybrid coding actually costs.
  double routed_fraction() const;

  nlohmann::json to_json() const;
};

/// One machine coder: units whose code is missing, carries no
/// confidence, or scores below the threshold go to review; the rest are
/// accepted as-is.
RoutingResult route_by_confidence(const model::AnnotationList& annotations,
                                  const model::Dataset& dataset,
                                  const model::Variable& variable,
                                  const RoutingPolicy& policy);

/// Multiple machine coders: unanimously coded units are accepted (coder
/// "agreement"); units with disagreement or missing codes go to review
/// with the competing codes as candidates.
RoutingResult route_by_divergence(const model::AnnotationMatrix& matrix,
                                  const model::Dataset& dataset,
                                  const model::Variable& variable);

struct EscalationResult {
  model::AnnotationList resolved;  // judge sided with a candidate
  ReviewQueue remaining;           // still needs a human
  std::size_t judged = 0;

  nlohmann::json to_json() const;
};

/// Second-opinion pass: a judge model's code settles an item only when
/// it matches one of the candidates; everything else stays queued.
EscalationResult judge_escalation(const ReviewQueue& queue,
                                  const model::AnnotationList& judge_codes,
                                  const model::Variable& variable);

// Review table format: header
//   unit_id,text,candidates,reason,resolution,resolver
// candidates joined with '|'; resolution/resolver empty until resolved.
std::string queue_to_csv(const ReviewQueue& queue);
ReviewQueue queue_from_csv(const std::string& content, const std::string& variable_name);
void save_queue_file(const std::filesystem::path& path, const ReviewQueue& queue);
ReviewQueue load_queue_file(const std::filesystem::path& path, const std::string& variable_name);

struct ImportResult {
  model::AnnotationList annotations;  // accepted resolutions, coder = resolver
  ReviewQueue queue;                  // rejected or blank rows stay pending
  std::vector<std::string> errors;    // one message per rejected row
  std::size_t accepted = 0;
  std::size_t pending = 0;

  nlohmann::json to_json() const;
};

/// Validates filled-in resolutions row by row: in-domain codes with a
/// resolver become annotations; out-of-domain codes or missing resolvers
/// are reported and the entry stays pending; blanks stay pending silently.
ImportResult import_resolutions(const ReviewQueue& queue,
                                const model::Variable& variable);

}  // namespace ca::hybrid
