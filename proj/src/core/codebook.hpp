#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ca::model {

enum class MeasurementScale { nominal, ordinal, interval, ratio };

MeasurementScale scale_from_string(const std::string& s);
const char* scale_to_string(MeasurementScale scale);

struct Category {
  std::int64_t code = 0;
  std::string label;
  std::string definition;
  std::vector<std::string> examples;
};

struct NumericRange {
  double min_value = 0.0;
  double max_value = 0.0;
};

/// One coded construct. For ordinal variables the category list order
/// is the rank order.
struct Variable {
  std::string name;
  MeasurementScale scale = MeasurementScale::nominal;
  std::vector<Category> categories;
  std::optional<NumericRange> range;
  std::string instruction;
  std::vector<std::string> coding_rules;

  bool is_categorical() const {
    return scale == MeasurementScale::nominal || scale == MeasurementScale::ordinal;
  }
  std::vector<std::int64_t> category_codes() const;
  const Category* find_category(std::int64_t code) const;
  bool in_domain(double value) const;
};

struct Codebook {
  std::vector<Variable> variables;
  std::string version;
  std::string provenance_notes;

  const Variable* find_variable(const std::string& name) const;
  const Variable& require_variable(const std::string& name) const;
};

Codebook codebook_from_json(const nlohmann::json& j);
nlohmann::json codebook_to_json(const Codebook& cb);
Codebook load_codebook_file(const std::filesystem::path& path);

/// Stable content hash of the canonical serialization; recorded in run
/// manifests as the codebook version fingerprint.
std::string codebook_hash(const Codebook& cb);

struct Finding {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string code;      // machine-readable, e.g. "duplicate-code"
  std::string message;
  std::string where;     // "variable[/category]" path
};

std::vector<Finding> validate_codebook(const Codebook& cb);
bool has_errors(const std::vector<Finding>& findings);
nlohmann::json findings_to_json(const std::vector<Finding>& findings);

}  // namespace ca::model
