#include "core/codebook.hpp"

#include <set>
#include <unordered_set>

#include "support/errors.hpp"
#include "support/hash.hpp"
#include "support/jsonio.hpp"

namespace ca::model {

namespace {

using nlohmann::json;

std::string require_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw Error(ErrorCode::parse, where + ": missing or non-string field '" + key + "'");
  }
  return j.at(key).get<std::string>();
}

std::vector<std::string> optional_string_list(const json& j, const char* key,
                                              const std::string& where) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  const json& arr = j.at(key);
  if (!arr.is_array()) {
    throw Error(ErrorCode::parse, where + ": field '" + key + "' must be a list");
  }
  for (const auto& item : arr) {
    if (!item.is_string()) {
      throw Error(ErrorCode::parse, where + ": field '" + key + "' must contain strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

Category category_from_json(const json& j, const std::string& where) {
  Category c;
  if (!j.contains("code") || !j.at("code").is_number_integer()) {
    throw Error(ErrorCode::parse, where + ": category needs an integer 'code'");
  }
  c.code = j.at("code").get<std::int64_t>();
  c.label = require_string(j, "label", where);
  c.definition = j.value("definition", std::string{});
  c.examples = optional_string_list(j, "examples", where);
  return c;
}

Variable variable_from_json(const json& j) {
  Variable v;
  v.name = require_string(j, "name", "variable");
  const std::string where = "variable '" + v.name + "'";
  v.scale = scale_from_string(require_string(j, "scale", where));
  v.instruction = j.value("instruction", std::string{});
  v.coding_rules = optional_string_list(j, "coding_rules", where);
  if (j.contains("categories")) {
    if (!j.at("categories").is_array()) {
      throw Error(ErrorCode::parse, where + ": 'categories' must be a list");
    }
    for (const auto& cj : j.at("categories")) {
      v.categories.push_back(category_from_json(cj, where));
    }
  }
  if (j.contains("range")) {
    const json& r = j.at("range");
    if (!r.is_object() || !r.contains("min") || !r.contains("max") ||
        !r.at("min").is_number() || !r.at("max").is_number()) {
      throw Error(ErrorCode::parse, where + ": 'range' needs numeric 'min' and 'max'");
    }
    v.range = NumericRange{r.at("min").get<double>(), r.at("max").get<double>()};
  }
  return v;
}

}  // namespace

MeasurementScale scale_from_string(const std::string& s) {
  if (s == "nominal") return MeasurementScale::nominal;
  if (s == "ordinal") return MeasurementScale::ordinal;
  if (s == "interval") return MeasurementScale::interval;
  if (s == "ratio") return MeasurementScale::ratio;
  throw Error(ErrorCode::parse, "unknown measurement scale: '" + s + "'");
}

const char* scale_to_string(MeasurementScale scale) {
  switch (scale) {
    case MeasurementScale::nominal: return "nominal";
    case MeasurementScale::ordinal: return "ordinal";
    case MeasurementScale::interval: return "interval";
    case MeasurementScale::ratio: return "ratio";
  }
  return "nominal";
}

std::vector<std::int64_t> Variable::category_codes() const {
  std::vector<std::int64_t> codes;
  codes.reserve(categories.size());
  for (const auto& c : categories) codes.push_back(c.code);
  return codes;
}

const Category* Variable::find_category(std::int64_t code) const {
  for (const auto& c : categories) {
    if (c.code == code) return &c;
  }
  return nullptr;
}

bool Variable::in_domain(double value) const {
  if (is_categorical()) {
    for (const auto& c : categories) {
      if (static_cast<double>(c.code) == value) return true;
    }
    return false;
  }
  if (range) {
    return value >= range->min_value && value <= range->max_value;
  }
  return true;
}

const Variable* Codebook::find_variable(const std::string& name) const {
  for (const auto& v : variables) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

const Variable& Codebook::require_variable(const std::string& name) const {
  const Variable* v = find_variable(name);
  if (!v) {
    throw Error(ErrorCode::invalid_argument, "unknown variable: '" + name + "'");
  }
  return *v;
}

Codebook codebook_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("variables") || !j.at("variables").is_array()) {
    throw Error(ErrorCode::parse, "codebook: top-level 'variables' list required");
  }
  Codebook cb;
  cb.version = j.value("version", std::string{});
  cb.provenance_notes = j.value("provenance_notes", std::string{});
  for (const auto& vj : j.at("variables")) {
    cb.variables.push_back(variable_from_json(vj));
  }
  return cb;
}

nlohmann::json codebook_to_json(const Codebook& cb) {
  nlohmann::ordered_json j;
  j["version"] = cb.version;
  j["provenance_notes"] = cb.provenance_notes;
  j["variables"] = nlohmann::ordered_json::array();
  for (const auto& v : cb.variables) {
    nlohmann::ordered_json vj;
    vj["name"] = v.name;
    vj["scale"] = scale_to_string(v.scale);
    vj["instruction"] = v.instruction;
    vj["coding_rules"] = v.coding_rules;
    if (v.is_categorical()) {
      vj["categories"] = nlohmann::ordered_json::array();
      for (const auto& c : v.categories) {
        nlohmann::ordered_json cj;
        cj["code"] = c.code;
        cj["label"] = c.label;
        cj["definition"] = c.definition;
        cj["examples"] = c.examples;
        vj["categories"].push_back(cj);
      }
    }
    if (v.range) {
      vj["range"] = {{"min", v.range->min_value}, {"max", v.range->max_value}};
    }
    j["variables"].push_back(vj);
  }
  return j;
}

Codebook load_codebook_file(const std::filesystem::path& path) {
  return codebook_from_json(jsonio::load_file(path));
}

std::string codebook_hash(const Codebook& cb) {
  return hash::digest_hex(codebook_to_json(cb).dump());
}

std::vector<Finding> validate_codebook(const Codebook& cb) {
  std::vector<Finding> findings;
  auto error = [&](std::string code, std::string message, std::string where) {
    findings.push_back({Finding::Severity::error, std::move(code), std::move(message),
                        std::move(where)});
  };
  auto warning = [&](std::string code, std::string message, std::string where) {
    findings.push_back({Finding::Severity::warning, std::move(code), std::move(message),
                        std::move(where)});
  };

  if (cb.variables.empty()) {
    error("no-variables", "codebook defines no variables", "codebook");
  }
  std::unordered_set<std::string> names;
  for (const auto& v : cb.variables) {
    if (!names.insert(v.name).second) {
      error("duplicate-variable", "duplicate variable name '" + v.name + "'", v.name);
    }
    if (v.name.empty()) {
      error("empty-name", "variable with empty name", v.name);
    }
    if (v.is_categorical()) {
      if (v.categories.empty()) {
        error("no-categories",
              "variable '" + v.name + "' is " + scale_to_string(v.scale) +
                  " but has no categories",
              v.name);
      }
      if (v.range) {
        error("unexpected-range",
              "categorical variable '" + v.name + "' must not carry a numeric range",
              v.name);
      }
      std::set<std::int64_t> codes;
      for (const auto& c : v.categories) {
        const std::string where = v.name + "/" + c.label;
        if (!codes.insert(c.code).second) {
          error("duplicate-code",
                "duplicate code " + std::to_string(c.code) + " in variable '" + v.name + "'",
                where);
        }
        if (c.code < 0) {
          error("negative-code",
                "category code " + std::to_string(c.code) + " is negative", where);
        }
        if (c.definition.empty()) {
          error("empty-definition",
                "category '" + c.label + "' has an empty definition", where);
        }
        if (c.examples.empty()) {
          warning("no-examples", "category '" + c.label + "' lists no examples", where);
        }
      }
    } else {
      if (!v.categories.empty()) {
        error("unexpected-categories",
              "variable '" + v.name + "' is " + scale_to_string(v.scale) +
                  " and must carry a numeric range, not categories",
              v.name);
      }
      if (!v.range) {
        error("missing-range",
              "variable '" + v.name + "' needs a numeric range", v.name);
      } else if (!(v.range->min_value < v.range->max_value)) {
        error("empty-range", "variable '" + v.name + "' range is empty", v.name);
      }
      if (v.scale == MeasurementScale::ratio && v.range && v.range->min_value < 0) {
        warning("negative-ratio", "ratio variable '" + v.name + "' admits negative values",
                v.name);
      }
    }
  }
  return findings;
}

bool has_errors(const std::vector<Finding>& findings) {
  for (const auto& f : findings) {
    if (f.severity == Finding::Severity::error) return true;
  }
  return false;
}

nlohmann::json findings_to_json(const std::vector<Finding>& findings) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : findings) {
    arr.push_back({{"severity", f.severity == Finding::Severity::error ? "error" : "warning"},
                   {"code", f.code},
                   {"message", f.message},
                   {"where", f.where}});
  }
  return arr;
}

}  // namespace ca::model
