#include "metrics/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "support/errors.hpp"

namespace ca::metrics {

namespace {

std::size_t value_index(const std::vector<double>& values, double v) {
  auto it = std::lower_bound(values.begin(), values.end(), v);
  return static_cast<std::size_t>(it - values.begin());
}

/// delta^2 table for one scale over the coincidence value domain.
std::vector<double> squared_differences(const CoincidenceMatrix& cm,
                                        model::MeasurementScale scale,
                                        const std::vector<double>& rank_order) {
  const std::size_t k = cm.values.size();
  std::vector<double> delta2(k * k, 0.0);

  // Rank position of each value index for the ordinal metric.
  std::vector<std::size_t> rank(k);
  if (scale == model::MeasurementScale::ordinal) {
    if (rank_order.empty()) {
      for (std::size_t i = 0; i < k; ++i) rank[i] = i;  // values are ascending
    } else {
      for (std::size_t i = 0; i < k; ++i) {
        auto it = std::find(rank_order.begin(), rank_order.end(), cm.values[i]);
        if (it == rank_order.end()) {
          throw Error(ErrorCode::invalid_argument,
                      "ordinal rank order does not cover observed value");
        }
        rank[i] = static_cast<std::size_t>(it - rank_order.begin());
      }
    }
  }
  // Marginals indexed by rank, for the cumulative-marginal ordinal form.
  std::vector<double> marginal_by_rank(k, 0.0);
  std::vector<std::size_t> index_by_rank(k, 0);
  if (scale == model::MeasurementScale::ordinal) {
    for (std::size_t i = 0; i < k; ++i) {
      marginal_by_rank[rank[i]] = cm.marginals[i];
      index_by_rank[rank[i]] = i;
    }
  }

  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const double c = cm.values[i];
      const double v = cm.values[j];
      double d = 0.0;
      switch (scale) {
        case model::MeasurementScale::nominal:
          d = 1.0;
          break;
        case model::MeasurementScale::interval:
          d = (c - v) * (c - v);
          break;
        case model::MeasurementScale::ratio: {
          const double s = c + v;
          d = s == 0.0 ? 0.0 : ((c - v) / s) * ((c - v) / s);
          break;
        }
        case model::MeasurementScale::ordinal: {
          const std::size_t lo = std::min(rank[i], rank[j]);
          const std::size_t hi = std::max(rank[i], rank[j]);
          double cum = 0.0;
          for (std::size_t g = lo; g <= hi; ++g) cum += marginal_by_rank[g];
          cum -= (cm.marginals[i] + cm.marginals[j]) / 2.0;
          d = cum * cum;
          break;
        }
      }
      delta2[i * k + j] = d;
    }
  }
  return delta2;
}

}  // namespace

CoincidenceMatrix coincidence_matrix(const model::AnnotationMatrix& matrix) {
  std::set<double> observed;
  std::size_t pairable_units = 0;
  for (std::size_t u = 0; u < matrix.unit_count(); ++u) {
    auto values = matrix.unit_values(u);
    if (values.size() < 2) continue;
    ++pairable_units;
    for (double v : values) observed.insert(v);
  }
  if (pairable_units == 0) {
    throw Error(ErrorCode::validation,
                "no pairable values: every unit has fewer than two codes");
  }

  CoincidenceMatrix cm;
  cm.values.assign(observed.begin(), observed.end());
  const std::size_t k = cm.values.size();
  cm.counts.assign(k * k, 0.0);
  cm.marginals.assign(k, 0.0);

  for (std::size_t u = 0; u < matrix.unit_count(); ++u) {
    auto values = matrix.unit_values(u);
    const std::size_t m = values.size();
    if (m < 2) {
      ++cm.units_excluded;
      continue;
    }
    ++cm.units_used;
    const double weight = 1.0 / static_cast<double>(m - 1);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        if (a == b) continue;
        const std::size_t i = value_index(cm.values, values[a]);
        const std::size_t j = value_index(cm.values, values[b]);
        cm.counts[i * k + j] += weight;
      }
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += cm.counts[i * k + j];
    cm.marginals[i] = sum;
    cm.total += sum;
  }
  return cm;
}

ReliabilityResult krippendorff_alpha(const model::AnnotationMatrix& matrix,
                                     model::MeasurementScale scale,
                                     const std::vector<double>& rank_order) {
  ReliabilityResult result;
  result.scale = scale;

  CoincidenceMatrix cm = coincidence_matrix(matrix);
  result.units_used = cm.units_used;
  result.units_excluded = cm.units_excluded;

  const std::size_t k = cm.values.size();
  if (k < 2 || cm.total <= 1.0) {
    result.defined = false;
    result.undefined_reason = k < 2 ? "no variation: a single value was observed"
                                    : "fewer than two pairable values";
    return result;
  }

  const std::vector<double> delta2 = squared_differences(cm, scale, rank_order);

  double observed = 0.0;
  double expected = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      observed += cm.o(i, j) * delta2[i * k + j];
      expected += cm.marginals[i] * cm.marginals[j] * delta2[i * k + j];
    }
  }
  const double n = cm.total;
  result.observed_disagreement = observed / n;
  result.expected_disagreement = expected / (n * (n - 1.0));

  if (result.expected_disagreement <= 0.0) {
    result.defined = false;
    result.undefined_reason = "expected disagreement is zero";
    return result;
  }
  result.defined = true;
  result.alpha = 1.0 - result.observed_disagreement / result.expected_disagreement;
  return result;
}

IntracoderResult intracoder_agreement(
    const std::vector<std::map<std::string, model::CellValue>>& runs) {
  if (runs.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "intracoder agreement needs at least two runs");
  }
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].size() != runs[0].size() ||
        !std::equal(runs[r].begin(), runs[r].end(), runs[0].begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw Error(ErrorCode::invalid_argument, "runs cover different unit sets");
    }
  }

  IntracoderResult result;
  result.runs = runs.size();
  result.units = runs[0].size();

  std::size_t agree = 0;
  std::size_t compared = 0;
  for (const auto& [unit, first] : runs[0]) {
    for (std::size_t a = 0; a < runs.size(); ++a) {
      for (std::size_t b = a + 1; b < runs.size(); ++b) {
        const auto& va = runs[a].at(unit);
        const auto& vb = runs[b].at(unit);
        if (!va || !vb) continue;  // pairwise-complete
        ++compared;
        if (*va == *vb) ++agree;
      }
    }
  }
  result.pairs_compared = compared;
  result.percent_agreement =
      compared == 0 ? 0.0 : static_cast<double>(agree) / static_cast<double>(compared);

  std::vector<std::string> run_ids;
  std::vector<std::string> unit_ids;
  for (std::size_t r = 0; r < runs.size(); ++r) run_ids.push_back("run-" + std::to_string(r));
  for (const auto& [unit, _] : runs[0]) unit_ids.push_back(unit);
  model::AnnotationMatrix m("intracoder", run_ids, unit_ids);
  for (std::size_t u = 0; u < unit_ids.size(); ++u) {
    for (std::size_t r = 0; r < runs.size(); ++r) {
      m.set_cell(u, r, runs[r].at(unit_ids[u]));
    }
  }
  result.alpha = krippendorff_alpha(m, model::MeasurementScale::nominal);
  return result;
}

nlohmann::json reliability_to_json(const ReliabilityResult& r) {
  nlohmann::json j;
  j["defined"] = r.defined;
  if (r.defined) {
    j["alpha"] = r.alpha;
    j["observed_disagreement"] = r.observed_disagreement;
    j["expected_disagreement"] = r.expected_disagreement;
  } else {
    j["alpha"] = nullptr;
    j["reason"] = r.undefined_reason;
  }
  j["scale"] = model::scale_to_string(r.scale);
  j["units_used"] = r.units_used;
  j["units_excluded"] = r.units_excluded;
  return j;
}

nlohmann::json intracoder_to_json(const IntracoderResult& r) {
  nlohmann::json j;
  j["percent_agreement"] = r.percent_agreement;
  j["alpha"] = reliability_to_json(r.alpha);
  j["runs"] = r.runs;
  j["units"] = r.units;
  j["pairs_compared"] = r.pairs_compared;
  return j;
}

ReliabilityResult reliability_from_json(const nlohmann::json& j) {
  ReliabilityResult r;
  r.defined = j.at("defined").get<bool>();
  if (r.defined) {
    r.alpha = j.at("alpha").get<double>();
    r.observed_disagreement = j.at("observed_disagreement").get<double>();
    r.expected_disagreement = j.at("expected_disagreement").get<double>();
  } else {
    r.undefined_reason = j.at("reason").get<std::string>();
  }
  r.scale = model::scale_from_string(j.at("scale").get<std::string>());
  r.units_used = j.at("units_used").get<std::size_t>();
  r.units_excluded = j.at("units_excluded").get<std::size_t>();
  return r;
}

IntracoderResult intracoder_from_json(const nlohmann::json& j) {
  IntracoderResult r;
  r.percent_agreement = j.at("percent_agreement").get<double>();
  r.alpha = reliability_from_json(j.at("alpha"));
  r.runs = j.at("runs").get<std::size_t>();
  r.units = j.at("units").get<std::size_t>();
  r.pairs_compared = j.at("pairs_compared").get<std::size_t>();
  return r;
}

}  // namespace ca::metrics
