#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/annotations.hpp"

namespace ca::metrics {

struct ClassSummary {
  double label = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;          // gold count
  std::size_t predicted_count = 0;
};

/// Classes with no true or predicted instances resolve P/R/F1 to 0 with
/// a warning rather than NaN.
struct ClassificationReport {
  std::vector<double> labels;            // class axis, ascending
  std::vector<std::size_t> confusion;    // gold x predicted, row-major
  std::vector<ClassSummary> per_class;
  double macro_f1 = 0.0;                 // unweighted mean of class F1
  double weighted_f1 = 0.0;              // support-weighted mean
  double accuracy = 0.0;                 // trace / evaluated
  std::size_t evaluated = 0;
  std::size_t excluded_unresolved_gold = 0;
  std::size_t excluded_missing_prediction = 0;
  std::vector<std::string> warnings;
  double dominant_share = 0.0;           // largest class support fraction
  bool imbalanced = false;               // accuracy unreliable when set

  std::size_t confusion_at(std::size_t gold_idx, std::size_t pred_idx) const {
    return confusion[gold_idx * labels.size() + pred_idx];
  }
};

/// Gold share above which the accuracy figure is flagged as unreliable
/// (a 9:1 binary split trips it, a balanced set does not).
inline constexpr double kImbalanceDominantShare = 0.75;

/// Compares predictions to gold over an identical unit set. Gold
/// UNRESOLVED units and missing predictions are excluded and counted.
/// `label_domain` fixes the class axis; empty means the observed union.
ClassificationReport classification_report(
    const std::map<std::string, model::CellValue>& predicted,
    const std::map<std::string, model::CellValue>& gold,
    const std::vector<double>& label_domain = {});

nlohmann::json classification_to_json(const ClassificationReport& r);
ClassificationReport classification_from_json(const nlohmann::json& j);

}  // namespace ca::metrics
