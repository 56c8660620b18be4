#include <doctest.h>

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "common/alpha_oracle.hpp"
#include "common/fixtures.hpp"
#include "common/generators.hpp"
#include "metrics/classification.hpp"
#include "metrics/reliability.hpp"
#include "support/errors.hpp"
#include "support/rng.hpp"

using ca::model::CellValue;
using ca::model::MeasurementScale;
using fixtures::matrix_from;
using Rows = std::vector<std::vector<std::optional<double>>>;

namespace {

ca::metrics::ReliabilityResult nominal_alpha(const Rows& rows) {
  return ca::metrics::krippendorff_alpha(matrix_from(rows), MeasurementScale::nominal);
}

// Outcome as data for invariance checks: 0 = rejected (no pairable
// values), 1 = defined alpha, 2 = UNDEFINED.
std::pair<int, double> alpha_outcome(const Rows& rows, MeasurementScale scale) {
  try {
    const auto r = ca::metrics::krippendorff_alpha(matrix_from(rows), scale);
    return r.defined ? std::pair<int, double>{1, r.alpha}
                     : std::pair<int, double>{2, 0.0};
  } catch (const ca::Error&) {
    return {0, 0.0};
  }
}

std::pair<int, double> nominal_safe(const Rows& rows) {
  return alpha_outcome(rows, MeasurementScale::nominal);
}

std::pair<int, double> interval_safe(const Rows& rows) {
  return alpha_outcome(rows, MeasurementScale::interval);
}

std::pair<int, double> ratio_safe(const Rows& rows) {
  return alpha_outcome(rows, MeasurementScale::ratio);
}

}  // namespace

TEST_CASE("alpha: canonical binary reversal scores -0.5 exactly") {
  const auto r = nominal_alpha({{0.0, 1.0}, {1.0, 0.0}});
  REQUIRE(r.defined);
  CHECK(r.alpha == -0.5);
  CHECK(r.units_used == 2);
  CHECK(r.units_excluded == 0);
}

TEST_CASE("alpha: perfect agreement scores 1.0") {
  const auto r = nominal_alpha({{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}});
  REQUIRE(r.defined);
  CHECK(r.alpha == 1.0);
}

TEST_CASE("alpha: single observed value is UNDEFINED, not a number") {
  const auto r = nominal_alpha({{1.0, 1.0}, {1.0, 1.0}});
  CHECK_FALSE(r.defined);
  CHECK(r.undefined_reason == "no variation: a single value was observed");
}

TEST_CASE("alpha: zero expected disagreement is UNDEFINED") {
  // Two distinct ratio values summing to zero: every delta2 vanishes.
  const auto r = ca::metrics::krippendorff_alpha(
      matrix_from({{-1.0, 1.0}, {1.0, -1.0}}), MeasurementScale::ratio);
  CHECK_FALSE(r.defined);
  CHECK(r.undefined_reason == "expected disagreement is zero");
}

TEST_CASE("alpha: all-singleton units are rejected") {
  const Rows rows = {{0.0, std::nullopt}, {std::nullopt, 1.0}};
  CHECK_THROWS_WITH_AS(nominal_alpha(rows),
                       "no pairable values: every unit has fewer than two codes",
                       ca::Error);
}

TEST_CASE("alpha: exhaustive two-coder/two-unit binary space matches the oracle") {
  const std::optional<double> choices[3] = {std::nullopt, 0.0, 1.0};
  std::size_t checked = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
          const Rows rows = {{choices[a], choices[b]}, {choices[c], choices[d]}};
          const auto diff =
              testgen::compare_alpha(rows, MeasurementScale::nominal, 1e-9);
          INFO("cells " << a << b << c << d << ": " << diff);
          CHECK(diff.empty());
          ++checked;
        }
  CHECK(checked == 81);
}

TEST_CASE("alpha: 1000 random matrices match the oracle on every scale") {
  ca::rng::Engine engine(20260823);
  const MeasurementScale scales[] = {MeasurementScale::nominal, MeasurementScale::ordinal,
                                     MeasurementScale::interval, MeasurementScale::ratio};
  for (int i = 0; i < 1000; ++i) {
    const auto rows = testgen::random_matrix(engine);
    for (auto scale : scales) {
      const auto diff = testgen::compare_alpha(rows, scale, 1e-9);
      INFO("matrix " << i << " scale " << ca::model::scale_to_string(scale) << ": "
                     << diff);
      CHECK(diff.empty());
    }
  }
}

TEST_CASE("alpha: interval anchor") {
  // Units (1,2) and (3,3): D_o = 1/2, D_e = 11/6, alpha = 8/11.
  const auto r = ca::metrics::krippendorff_alpha(matrix_from({{1.0, 2.0}, {3.0, 3.0}}),
                                                 MeasurementScale::interval);
  REQUIRE(r.defined);
  CHECK(r.alpha == doctest::Approx(8.0 / 11.0).epsilon(1e-12));
}

TEST_CASE("alpha: ordinal anchor") {
  // Units (0,0), (1,1), (0,2): D_o = 16/3, D_e = 6, alpha = 1/9.
  const auto r = ca::metrics::krippendorff_alpha(
      matrix_from({{0.0, 0.0}, {1.0, 1.0}, {0.0, 2.0}}), MeasurementScale::ordinal);
  REQUIRE(r.defined);
  CHECK(r.alpha == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("alpha: ratio anchor") {
  // Units (1,2) and (4,4): D_o = 1/18, D_e = 79/450, alpha = 54/79.
  const auto r = ca::metrics::krippendorff_alpha(matrix_from({{1.0, 2.0}, {4.0, 4.0}}),
                                                 MeasurementScale::ratio);
  REQUIRE(r.defined);
  CHECK(r.alpha == doctest::Approx(54.0 / 79.0).epsilon(1e-12));
}

TEST_CASE("alpha: explicit ascending rank order equals the default") {
  const Rows rows = {{0.0, 0.0}, {1.0, 1.0}, {0.0, 2.0}};
  const auto by_default =
      ca::metrics::krippendorff_alpha(matrix_from(rows), MeasurementScale::ordinal);
  const auto by_order = ca::metrics::krippendorff_alpha(
      matrix_from(rows), MeasurementScale::ordinal, {0.0, 1.0, 2.0});
  REQUIRE(by_default.defined);
  REQUIRE(by_order.defined);
  CHECK(by_default.alpha == by_order.alpha);
}

TEST_CASE("alpha: rank order must cover every observed value") {
  CHECK_THROWS_WITH_AS(
      ca::metrics::krippendorff_alpha(matrix_from({{0.0, 0.0}, {1.0, 2.0}}),
                                      MeasurementScale::ordinal, {0.0, 1.0}),
      "ordinal rank order does not cover observed value", ca::Error);
}

TEST_CASE("alpha: reversed rank order changes ordinal distances coherently") {
  // With ranks reversed the cumulative-marginal deltas are mirrored, so
  // the result must equal the default on the relabeled data.
  const Rows rows = {{0.0, 1.0}, {1.0, 2.0}, {0.0, 2.0}, {2.0, 2.0}};
  Rows mirrored = rows;
  for (auto& row : mirrored)
    for (auto& cell : row)
      if (cell) cell = 2.0 - *cell;
  const auto reversed_order = ca::metrics::krippendorff_alpha(
      matrix_from(rows), MeasurementScale::ordinal, {2.0, 1.0, 0.0});
  const auto relabeled =
      ca::metrics::krippendorff_alpha(matrix_from(mirrored), MeasurementScale::ordinal);
  REQUIRE(reversed_order.defined);
  REQUIRE(relabeled.defined);
  CHECK(reversed_order.alpha == doctest::Approx(relabeled.alpha).epsilon(1e-12));
}

TEST_CASE("alpha: nominal result is invariant under category relabeling") {
  ca::rng::Engine engine(41);
  for (int i = 0; i < 200; ++i) {
    const auto rows = testgen::random_matrix(engine);
    Rows relabeled = rows;
    for (auto& row : relabeled)
      for (auto& cell : row)
        if (cell) cell = std::fmod(*cell + 7.0, 3.0);  // bijection on {0,1,2}
    const auto a = nominal_safe(rows);
    const auto b = nominal_safe(relabeled);
    REQUIRE(a.first == b.first);
    if (a.first == 1) CHECK(a.second == doctest::Approx(b.second).epsilon(1e-12));
  }
}

TEST_CASE("alpha: invariant under coder and unit permutation") {
  ca::rng::Engine engine(42);
  for (int i = 0; i < 200; ++i) {
    const auto rows = testgen::random_matrix(engine);
    Rows shuffled = rows;
    std::reverse(shuffled.begin(), shuffled.end());
    for (auto& row : shuffled) std::reverse(row.begin(), row.end());
    const auto a = nominal_safe(rows);
    const auto b = nominal_safe(shuffled);
    REQUIRE(a.first == b.first);
    if (a.first == 1) CHECK(a.second == doctest::Approx(b.second).epsilon(1e-12));
  }
}

TEST_CASE("alpha: interval result is invariant under affine transforms") {
  ca::rng::Engine engine(43);
  for (int i = 0; i < 200; ++i) {
    const auto rows = testgen::random_matrix(engine);
    Rows scaled = rows;
    for (auto& row : scaled)
      for (auto& cell : row)
        if (cell) cell = -2.5 * *cell + 3.0;
    const auto a = interval_safe(rows);
    const auto b = interval_safe(scaled);
    REQUIRE(a.first == b.first);
    if (a.first == 1) CHECK(a.second == doctest::Approx(b.second).epsilon(1e-9));
  }
}

TEST_CASE("alpha: ratio result is invariant under positive scaling") {
  ca::rng::Engine engine(44);
  for (int i = 0; i < 200; ++i) {
    const auto rows = testgen::random_matrix(engine);
    Rows scaled = rows;
    for (auto& row : scaled)
      for (auto& cell : row)
        if (cell) cell = 4.0 * *cell;
    const auto a = ratio_safe(rows);
    const auto b = ratio_safe(scaled);
    REQUIRE(a.first == b.first);
    if (a.first == 1) CHECK(a.second == doctest::Approx(b.second).epsilon(1e-9));
  }
}

TEST_CASE("coincidence matrix: binary reversal counts") {
  const auto cm = ca::metrics::coincidence_matrix(matrix_from({{0.0, 1.0}, {1.0, 0.0}}));
  REQUIRE(cm.values == std::vector<double>{0.0, 1.0});
  CHECK(cm.o(0, 1) == 2.0);
  CHECK(cm.o(1, 0) == 2.0);
  CHECK(cm.o(0, 0) == 0.0);
  CHECK(cm.o(1, 1) == 0.0);
  CHECK(cm.marginals == std::vector<double>{2.0, 2.0});
  CHECK(cm.total == 4.0);
}

TEST_CASE("intracoder: identical runs agree perfectly") {
  std::map<std::string, CellValue> run;
  for (int i = 0; i < 10; ++i) run["u" + std::to_string(i)] = i % 2;
  const auto r = ca::metrics::intracoder_agreement({run, run, run});
  CHECK(r.percent_agreement == 1.0);
  REQUIRE(r.alpha.defined);
  CHECK(r.alpha.alpha == 1.0);
  CHECK(r.runs == 3);
  CHECK(r.units == 10);
  CHECK(r.pairs_compared == 30);
}

TEST_CASE("intracoder: one flip in ten units over two runs scores 0.90") {
  std::map<std::string, CellValue> first;
  for (int i = 0; i < 10; ++i) first["u" + std::to_string(i)] = i < 6 ? 0.0 : 1.0;
  auto second = first;
  second["u7"] = 0.0;
  const auto r = ca::metrics::intracoder_agreement({first, second});
  CHECK(r.percent_agreement == 0.9);
  CHECK(r.pairs_compared == 10);
  CHECK(r.alpha.defined);
}

TEST_CASE("intracoder: comparison is pairwise-complete over missing codes") {
  std::map<std::string, CellValue> first{{"a", 1.0}, {"b", 0.0}, {"c", std::nullopt}};
  std::map<std::string, CellValue> second{{"a", 1.0}, {"b", std::nullopt}, {"c", 0.0}};
  const auto r = ca::metrics::intracoder_agreement({first, second});
  CHECK(r.percent_agreement == 1.0);
  CHECK(r.pairs_compared == 1);
  CHECK_FALSE(r.alpha.defined);  // only one pairable unit, single value
}

TEST_CASE("intracoder: argument validation") {
  std::map<std::string, CellValue> only{{"a", 1.0}};
  CHECK_THROWS_WITH_AS(ca::metrics::intracoder_agreement({only}),
                       "intracoder agreement needs at least two runs", ca::Error);
  std::map<std::string, CellValue> other{{"b", 1.0}};
  CHECK_THROWS_WITH_AS(ca::metrics::intracoder_agreement({only, other}),
                       "runs cover different unit sets", ca::Error);
}

TEST_CASE("reliability documents round-trip through JSON") {
  const auto defined = nominal_alpha({{0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}});
  const auto j = ca::metrics::reliability_to_json(defined);
  CHECK(ca::metrics::reliability_to_json(ca::metrics::reliability_from_json(j)).dump() ==
        j.dump());

  const auto undefined = nominal_alpha({{1.0, 1.0}});
  const auto ju = ca::metrics::reliability_to_json(undefined);
  CHECK(ju["alpha"].is_null());
  CHECK(ca::metrics::reliability_to_json(ca::metrics::reliability_from_json(ju)).dump() ==
        ju.dump());

  std::map<std::string, CellValue> run{{"a", 1.0}, {"b", 0.0}};
  const auto intra = ca::metrics::intracoder_agreement({run, run});
  const auto ji = ca::metrics::intracoder_to_json(intra);
  CHECK(ca::metrics::intracoder_to_json(ca::metrics::intracoder_from_json(ji)).dump() ==
        ji.dump());
}

namespace {

using UnitMap = std::map<std::string, CellValue>;

// gold/pred pairs -> maps on synthetic unit ids.
std::pair<UnitMap, UnitMap> maps_from_pairs(
    const std::vector<std::pair<CellValue, CellValue>>& pairs) {
  UnitMap gold;
  UnitMap pred;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto id = "t" + std::to_string(100 + i);
    gold[id] = pairs[i].first;
    pred[id] = pairs[i].second;
  }
  return {gold, pred};
}

}  // namespace

TEST_CASE("classification: counting anchor TP=8 FP=2 FN=4 TN=6") {
  std::vector<std::pair<CellValue, CellValue>> pairs;
  for (int i = 0; i < 8; ++i) pairs.push_back({1.0, 1.0});   // TP
  for (int i = 0; i < 4; ++i) pairs.push_back({1.0, 0.0});   // FN
  for (int i = 0; i < 2; ++i) pairs.push_back({0.0, 1.0});   // FP
  for (int i = 0; i < 6; ++i) pairs.push_back({0.0, 0.0});   // TN
  const auto [gold, pred] = maps_from_pairs(pairs);
  const auto r = ca::metrics::classification_report(pred, gold);

  REQUIRE(r.labels == std::vector<double>{0.0, 1.0});
  REQUIRE(r.per_class.size() == 2);
  const auto& positive = r.per_class[1];
  CHECK(positive.precision == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(positive.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(positive.f1 == doctest::Approx(16.0 / 22.0).epsilon(1e-12));
  CHECK(positive.support == 12);
  CHECK(positive.predicted_count == 10);
  CHECK(r.accuracy == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(r.evaluated == 20);
  CHECK(r.confusion_at(1, 1) == 8);
  CHECK(r.confusion_at(1, 0) == 4);
  CHECK(r.confusion_at(0, 1) == 2);
  CHECK(r.confusion_at(0, 0) == 6);
  CHECK(r.macro_f1 == doctest::Approx(23.0 / 33.0).epsilon(1e-12));
  CHECK(r.weighted_f1 == doctest::Approx(116.0 / 165.0).epsilon(1e-12));
  CHECK(r.dominant_share == doctest::Approx(0.6).epsilon(1e-12));
  CHECK_FALSE(r.imbalanced);
}

TEST_CASE("classification: random confusion matrices satisfy the counting identities") {
  ca::rng::Engine engine(20260824);
  for (int round = 0; round < 1000; ++round) {
    const std::size_t k = 2 + engine.below(4);
    std::vector<std::size_t> confusion(k * k, 0);
    std::size_t filled = 0;
    for (auto& cell : confusion) {
      cell = engine.below(8);
      filled += cell;
    }
    if (filled == 0) confusion[0] = 1;

    std::vector<std::pair<CellValue, CellValue>> pairs;
    for (std::size_t g = 0; g < k; ++g)
      for (std::size_t p = 0; p < k; ++p)
        for (std::size_t c = 0; c < confusion[g * k + p]; ++c)
          pairs.push_back({static_cast<double>(g), static_cast<double>(p)});

    std::vector<double> domain;
    for (std::size_t i = 0; i < k; ++i) domain.push_back(static_cast<double>(i));
    const auto [gold, pred] = maps_from_pairs(pairs);
    const auto r = ca::metrics::classification_report(pred, gold, domain);

    REQUIRE(r.labels.size() == k);
    CHECK(r.evaluated == pairs.size());

    // Support-weighted recall is accuracy.
    double weighted_recall = 0.0;
    double min_f1 = 2.0;
    double max_f1 = -1.0;
    double macro = 0.0;
    for (const auto& cls : r.per_class) {
      weighted_recall += cls.recall * static_cast<double>(cls.support);
      min_f1 = std::min(min_f1, cls.f1);
      max_f1 = std::max(max_f1, cls.f1);
      macro += cls.f1;
    }
    weighted_recall /= static_cast<double>(r.evaluated);
    CHECK(std::abs(weighted_recall - r.accuracy) <= 1e-12);

    // Macro F1 sits between the class extremes.
    macro /= static_cast<double>(k);
    CHECK(r.macro_f1 >= min_f1 - 1e-12);
    CHECK(r.macro_f1 <= max_f1 + 1e-12);
    CHECK(r.macro_f1 == doctest::Approx(macro).epsilon(1e-12));

    // Confusion marginals match the per-class counts.
    std::size_t trace = 0;
    for (std::size_t g = 0; g < k; ++g) {
      std::size_t row = 0;
      std::size_t col = 0;
      for (std::size_t p = 0; p < k; ++p) {
        row += r.confusion_at(g, p);
        col += r.confusion_at(p, g);
      }
      CHECK(row == r.per_class[g].support);
      CHECK(col == r.per_class[g].predicted_count);
      trace += r.confusion_at(g, g);
    }
    CHECK(r.accuracy ==
          doctest::Approx(static_cast<double>(trace) / static_cast<double>(r.evaluated))
              .epsilon(1e-12));
  }
}

TEST_CASE("classification: exclusions are counted per reason") {
  UnitMap gold{{"a", 1.0}, {"b", std::nullopt}, {"c", 0.0}, {"d", 1.0}};
  UnitMap pred{{"a", 1.0}, {"b", 0.0}, {"c", std::nullopt}, {"d", 0.0}};
  const auto r = ca::metrics::classification_report(pred, gold);
  CHECK(r.evaluated == 2);
  CHECK(r.excluded_unresolved_gold == 1);
  CHECK(r.excluded_missing_prediction == 1);
}

TEST_CASE("classification: unit-set mismatch and empty evaluable set are rejected") {
  UnitMap gold{{"a", 1.0}};
  UnitMap pred{{"b", 1.0}};
  CHECK_THROWS_WITH_AS(ca::metrics::classification_report(pred, gold),
                       "predicted and gold must cover the same unit set", ca::Error);
  UnitMap gold2{{"a", std::nullopt}};
  UnitMap pred2{{"a", 1.0}};
  CHECK_THROWS_WITH_AS(ca::metrics::classification_report(pred2, gold2),
                       "no evaluable units: nothing to score", ca::Error);
}

TEST_CASE("classification: label domain pins the class axis") {
  UnitMap gold{{"a", 0.0}, {"b", 5.0}};
  UnitMap pred{{"a", 0.0}, {"b", 2.0}};
  const auto r = ca::metrics::classification_report(pred, gold, {0.0, 2.0, 5.0});
  CHECK(r.labels == std::vector<double>{0.0, 2.0, 5.0});
  CHECK(r.per_class.size() == 3);

  CHECK_THROWS_WITH_AS(ca::metrics::classification_report(pred, gold, {0.0, 2.0}),
                       "observed label outside the supplied domain", ca::Error);
}

TEST_CASE("classification: zero-support and zero-prediction classes warn and score 0") {
  UnitMap gold{{"a", 0.0}, {"b", 0.0}, {"c", 1.0}};
  UnitMap pred{{"a", 0.0}, {"b", 1.0}, {"c", 1.0}};
  const auto r = ca::metrics::classification_report(pred, gold, {0.0, 1.0, 2.0});
  const auto& ghost = r.per_class[2];
  CHECK(ghost.precision == 0.0);
  CHECK(ghost.recall == 0.0);
  CHECK(ghost.f1 == 0.0);
  bool warned_predictions = false;
  bool warned_gold = false;
  for (const auto& w : r.warnings) {
    if (w == "class 2: no predictions; precision set to 0") warned_predictions = true;
    if (w == "class 2: no gold instances; recall set to 0") warned_gold = true;
  }
  CHECK(warned_predictions);
  CHECK(warned_gold);
}

TEST_CASE("classification: imbalance flag trips at a 9:1 split") {
  std::vector<std::pair<CellValue, CellValue>> pairs;
  for (int i = 0; i < 9; ++i) pairs.push_back({0.0, 0.0});
  pairs.push_back({1.0, 0.0});
  const auto [gold, pred] = maps_from_pairs(pairs);
  const auto r = ca::metrics::classification_report(pred, gold);
  CHECK(r.dominant_share == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(r.imbalanced);
  CHECK(r.accuracy == doctest::Approx(0.9).epsilon(1e-12));  // accuracy looks great...
  CHECK(r.per_class[1].f1 == 0.0);                           // ...while a class is never found
}

TEST_CASE("classification documents round-trip through JSON") {
  std::vector<std::pair<CellValue, CellValue>> pairs = {
      {0.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, {2.0, 0.0}};
  const auto [gold, pred] = maps_from_pairs(pairs);
  const auto r = ca::metrics::classification_report(pred, gold);
  const auto j = ca::metrics::classification_to_json(r);
  CHECK(
      ca::metrics::classification_to_json(ca::metrics::classification_from_json(j)).dump() ==
      j.dump());
}
