#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/annotations.hpp"
#include "core/codebook.hpp"

namespace ca::metrics {

/// Symmetric value-pair count table underlying alpha. For each unit with
/// m_u >= 2 non-missing codes, every ordered pair of values from
/// different coders contributes weight 1/(m_u - 1); units with fewer
/// than two codes are excluded.
struct CoincidenceMatrix {
  std::vector<double> values;     // distinct observed values, ascending
  std::vector<double> counts;     // o(c,k), row-major over `values`
  std::vector<double> marginals;  // n(c) = sum_k o(c,k)
  double total = 0.0;             // n = sum_c n(c)
  std::size_t units_used = 0;
  std::size_t units_excluded = 0;

  double o(std::size_t i, std::size_t j) const { return counts[i * values.size() + j]; }
};

CoincidenceMatrix coincidence_matrix(const model::AnnotationMatrix& matrix);

struct ReliabilityResult {
  bool defined = false;
  double alpha = 0.0;
  double observed_disagreement = 0.0;  // D_o
  double expected_disagreement = 0.0;  // D_e
  model::MeasurementScale scale = model::MeasurementScale::nominal;
  std::size_t units_used = 0;
  std::size_t units_excluded = 0;
  std::string undefined_reason;  // set when !defined
};

/// Krippendorff's alpha = 1 - D_o/D_e with the scale's squared
/// difference:
///   nominal   delta2(c,k) = [c != k]
///   ordinal   delta2(c,k) = (sum of marginals n_g for ranks between
///                            c and k inclusive - (n_c + n_k)/2)^2
///   interval  delta2(c,k) = (c - k)^2
///   ratio     delta2(c,k) = ((c - k)/(c + k))^2
/// Zero expected disagreement (single observed value) yields an
/// UNDEFINED result, never a numeric guess.
///
/// `rank_order`, when non-empty, fixes the ordinal rank order of values;
/// by default values rank in ascending numeric order.
ReliabilityResult krippendorff_alpha(const model::AnnotationMatrix& matrix,
                                     model::MeasurementScale scale,
                                     const std::vector<double>& rank_order = {});

struct IntracoderResult {
  double percent_agreement = 0.0;  // pairwise-complete
  ReliabilityResult alpha;         // runs treated as coders, nominal
  std::size_t runs = 0;
  std::size_t units = 0;
  std::size_t pairs_compared = 0;
};

/// Agreement of repeated runs over identical units (runs as coders).
/// All runs must cover the same unit set.
IntracoderResult intracoder_agreement(
    const std::vector<std::map<std::string, model::CellValue>>& runs);

nlohmann::json reliability_to_json(const ReliabilityResult& r);
nlohmann::json intracoder_to_json(const IntracoderResult& r);
ReliabilityResult reliability_from_json(const nlohmann::json& j);
IntracoderResult intracoder_from_json(const nlohmann::json& j);

}  // namespace ca::metrics
