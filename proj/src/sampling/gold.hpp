#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/annotations.hpp"
#include "metrics/reliability.hpp"

namespace ca::sampling {

struct GoldStandard {
  enum class Method { majority_vote, consensus, agreement_only };

  std::string variable;
  Method method = Method::majority_vote;
  std::size_t coder_count = 0;
  /// unit id -> resolved code; nullopt marks UNRESOLVED (majority/consensus)
  /// or excluded (agreement-only filtering).
  std::map<std::string, model::CellValue> codes;
  std::vector<std::string> warnings;

  std::size_t unresolved_count() const;
  std::size_t resolved_count() const;

  nlohmann::json to_json() const;
};

const char* to_string(GoldStandard::Method method);
GoldStandard gold_from_json(const nlohmann::json& j);

/// Strict majority over the non-missing codes per unit: a value wins only
/// when it appears on more than half of that unit's codes. Ties and
/// units without codes come back UNRESOLVED. Warns on an even number of
/// coders because ties then become possible.
GoldStandard majority_vote(const model::AnnotationMatrix& matrix);

/// Unanimous units resolve directly; disagreements take the supplied
/// discussion outcome or stay UNRESOLVED. Carries the methodological
/// warning that negotiated codes mask independent disagreement.
GoldStandard consensus_gold(const model::AnnotationMatrix& matrix,
                            const std::map<std::string, double>& resolutions);

/// Keeps only units every coder coded identically (>= 2 codes); all other
/// units are dropped from the gold standard. Warns that discarding
/// contested units inflates downstream agreement.
GoldStandard agreement_only_gold(const model::AnnotationMatrix& matrix);

enum class GateLevel { sufficient, tentative, insufficient };

struct GateResult {
  GateLevel level = GateLevel::insufficient;
  double alpha = 0.0;
  bool defined = false;
  std::string reason;
};

const char* to_string(GateLevel level);
GateLevel gate_level_from_string(const std::string& text);
nlohmann::json gate_to_json(const GateResult& gate);
GateResult gate_from_json(const nlohmann::json& j);

/// alpha > 0.80 -> sufficient; alpha in [0.667, 0.80] -> tentative
/// (exploratory use only); alpha < 0.667 -> insufficient. An undefined
/// alpha gates as insufficient with the reason carried through.
GateResult gate_reliability(const metrics::ReliabilityResult& reliability);
GateResult gate_reliability(double alpha);

inline constexpr double kGateSufficient = 0.80;
inline constexpr double kGateTentative = 0.667;

}  // namespace ca::sampling
