#include "metrics/classification.hpp"

#include <algorithm>
#include <set>

#include "support/errors.hpp"
#include "support/text.hpp"

namespace ca::metrics {

ClassificationReport classification_report(
    const std::map<std::string, model::CellValue>& predicted,
    const std::map<std::string, model::CellValue>& gold,
    const std::vector<double>& label_domain) {
  if (predicted.size() != gold.size() ||
      !std::equal(predicted.begin(), predicted.end(), gold.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw Error(ErrorCode::invalid_argument,
                "predicted and gold must cover the same unit set");
  }

  ClassificationReport report;

  std::vector<std::pair<double, double>> pairs;  // (gold, predicted)
  for (const auto& [unit, gold_value] : gold) {
    const auto& pred_value = predicted.at(unit);
    if (!gold_value) {
      ++report.excluded_unresolved_gold;
      continue;
    }
    if (!pred_value) {
      ++report.excluded_missing_prediction;
      continue;
    }
    pairs.emplace_back(*gold_value, *pred_value);
  }
  if (pairs.empty()) {
    throw Error(ErrorCode::validation, "no evaluable units: nothing to score");
  }

  std::set<double> label_set(label_domain.begin(), label_domain.end());
  if (label_set.empty()) {
    for (const auto& [g, p] : pairs) {
      label_set.insert(g);
      label_set.insert(p);
    }
  } else {
    for (const auto& [g, p] : pairs) {
      if (!label_set.count(g) || !label_set.count(p)) {
        throw Error(ErrorCode::validation, "observed label outside the supplied domain");
      }
    }
  }
  report.labels.assign(label_set.begin(), label_set.end());
  const std::size_t k = report.labels.size();
  report.confusion.assign(k * k, 0);

  auto index_of = [&](double v) {
    return static_cast<std::size_t>(
        std::lower_bound(report.labels.begin(), report.labels.end(), v) -
        report.labels.begin());
  };
  for (const auto& [g, p] : pairs) {
    report.confusion[index_of(g) * k + index_of(p)] += 1;
  }
  report.evaluated = pairs.size();

  double f1_sum = 0.0;
  double weighted_sum = 0.0;
  std::size_t trace = 0;
  std::size_t max_support = 0;
  for (std::size_t i = 0; i < k; ++i) {
    ClassSummary cls;
    cls.label = report.labels[i];
    std::size_t tp = report.confusion[i * k + i];
    std::size_t gold_count = 0;
    std::size_t pred_count = 0;
    for (std::size_t j = 0; j < k; ++j) {
      gold_count += report.confusion[i * k + j];
      pred_count += report.confusion[j * k + i];
    }
    cls.support = gold_count;
    cls.predicted_count = pred_count;
    trace += tp;

    if (pred_count == 0) {
      cls.precision = 0.0;
      report.warnings.push_back("class " + text::format_value(cls.label) +
                                ": no predictions; precision set to 0");
    } else {
      cls.precision = static_cast<double>(tp) / static_cast<double>(pred_count);
    }
    if (gold_count == 0) {
      cls.recall = 0.0;
      report.warnings.push_back("class " + text::format_value(cls.label) +
                                ": no gold instances; recall set to 0");
    } else {
      cls.recall = static_cast<double>(tp) / static_cast<double>(gold_count);
    }
    cls.f1 = (cls.precision + cls.recall) == 0.0
                 ? 0.0
                 : 2.0 * cls.precision * cls.recall / (cls.precision + cls.recall);

    f1_sum += cls.f1;
    weighted_sum += cls.f1 * static_cast<double>(cls.support);
    max_support = std::max(max_support, cls.support);
    report.per_class.push_back(cls);
  }
  report.macro_f1 = f1_sum / static_cast<double>(k);
  report.weighted_f1 = weighted_sum / static_cast<double>(report.evaluated);
  report.accuracy = static_cast<double>(trace) / static_cast<double>(report.evaluated);
  report.dominant_share =
      static_cast<double>(max_support) / static_cast<double>(report.evaluated);
  report.imbalanced = report.dominant_share >= kImbalanceDominantShare;
  return report;
}

nlohmann::json classification_to_json(const ClassificationReport& r) {
  nlohmann::json j;
  j["labels"] = r.labels;
  nlohmann::json confusion = nlohmann::json::array();
  const std::size_t k = r.labels.size();
  for (std::size_t i = 0; i < k; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < k; ++c) row.push_back(r.confusion[i * k + c]);
    confusion.push_back(row);
  }
  j["confusion"] = confusion;
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& cls : r.per_class) {
    per_class.push_back({{"label", cls.label},
                         {"precision", cls.precision},
                         {"recall", cls.recall},
                         {"f1", cls.f1},
                         {"support", cls.support},
                         {"predicted_count", cls.predicted_count}});
  }
  j["per_class"] = per_class;
  j["macro_f1"] = r.macro_f1;
  j["weighted_f1"] = r.weighted_f1;
  j["accuracy"] = r.accuracy;
  j["evaluated"] = r.evaluated;
  j["excluded_unresolved_gold"] = r.excluded_unresolved_gold;
  j["excluded_missing_prediction"] = r.excluded_missing_prediction;
  j["warnings"] = r.warnings;
  j["dominant_share"] = r.dominant_share;
  j["imbalanced"] = r.imbalanced;
  return j;
}

ClassificationReport classification_from_json(const nlohmann::json& j) {
  ClassificationReport r;
  r.labels = j.at("labels").get<std::vector<double>>();
  for (const auto& row : j.at("confusion"))
    for (const auto& cell : row) r.confusion.push_back(cell.get<std::size_t>());
  for (const auto& c : j.at("per_class")) {
    ClassSummary cls;
    cls.label = c.at("label").get<double>();
    cls.precision = c.at("precision").get<double>();
    cls.recall = c.at("recall").get<double>();
    cls.f1 = c.at("f1").get<double>();
    cls.support = c.at("support").get<std::size_t>();
    cls.predicted_count = c.at("predicted_count").get<std::size_t>();
    r.per_class.push_back(cls);
  }
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.weighted_f1 = j.at("weighted_f1").get<double>();
  r.accuracy = j.at("accuracy").get<double>();
  r.evaluated = j.at("evaluated").get<std::size_t>();
  r.excluded_unresolved_gold = j.at("excluded_unresolved_gold").get<std::size_t>();
  r.excluded_missing_prediction = j.at("excluded_missing_prediction").get<std::size_t>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  r.dominant_share = j.at("dominant_share").get<double>();
  r.imbalanced = j.at("imbalanced").get<bool>();
  return r;
}

}  // namespace ca::metrics
