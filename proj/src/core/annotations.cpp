#include "core/annotations.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "support/csv.hpp"
#include "support/errors.hpp"
#include "support/jsonio.hpp"
#include "support/text.hpp"

namespace ca::model {

namespace {

const std::vector<std::string> kHeader = {"unit_id", "variable", "coder", "value",
                                          "confidence", "run_id", "timestamp"};

}  // namespace

AnnotationList annotations_from_csv(const std::string& content) {
  auto rows = csv::parse(content);
  if (rows.empty()) {
    throw Error(ErrorCode::parse, "annotations: empty file");
  }
  if (rows.front() != kHeader) {
    throw Error(ErrorCode::parse,
                "annotations: expected header 'unit_id,variable,coder,value,"
                "confidence,run_id,timestamp'");
  }
  AnnotationList out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != kHeader.size()) {
      throw Error(ErrorCode::parse,
                  "annotations: row " + std::to_string(i + 1) + " has " +
                      std::to_string(row.size()) + " fields, expected 7");
    }
    Annotation a;
    a.unit_id = row[0];
    a.variable = row[1];
    a.coder.id = row[2];
    if (!row[3].empty()) {
      auto v = text::parse_value(row[3]);
      if (!v) {
        throw Error(ErrorCode::parse, "annotations: row " + std::to_string(i + 1) +
                                          ": non-numeric value '" + row[3] + "'");
      }
      a.value = v;
    }
    if (!row[4].empty()) {
      auto c = text::parse_value(row[4]);
      if (!c || *c < 0.0 || *c > 1.0) {
        throw Error(ErrorCode::validation, "annotations: row " + std::to_string(i + 1) +
                                               ": confidence outside [0,1]");
      }
      a.confidence = c;
    }
    a.coder.run_id = row[5];
    a.timestamp = row[6];
    out.push_back(std::move(a));
  }
  return out;
}

std::string annotations_to_csv(const AnnotationList& annotations) {
  std::string out = csv::write_row(kHeader);
  for (const auto& a : annotations) {
    out += csv::write_row({a.unit_id, a.variable, a.coder.id,
                           a.value ? text::format_value(*a.value) : std::string{},
                           a.confidence ? text::format_value(*a.confidence) : std::string{},
                           a.coder.run_id, a.timestamp});
  }
  return out;
}

AnnotationList load_annotations_file(const std::filesystem::path& path) {
  return annotations_from_csv(jsonio::load_text_file(path));
}

void save_annotations_file(const std::filesystem::path& path,
                           const AnnotationList& annotations) {
  jsonio::save_text_file(path, annotations_to_csv(annotations));
}

AnnotationMatrix::AnnotationMatrix(std::string variable, std::vector<std::string> coder_ids,
                                   std::vector<std::string> unit_ids)
    : variable_(std::move(variable)),
      coder_ids_(std::move(coder_ids)),
      unit_ids_(std::move(unit_ids)),
      cells_(coder_ids_.size() * unit_ids_.size()) {}

CellValue AnnotationMatrix::cell(std::size_t unit_row, std::size_t coder_col) const {
  return cells_.at(unit_row * coder_ids_.size() + coder_col);
}

void AnnotationMatrix::set_cell(std::size_t unit_row, std::size_t coder_col, CellValue value) {
  cells_.at(unit_row * coder_ids_.size() + coder_col) = value;
}

std::vector<double> AnnotationMatrix::unit_values(std::size_t unit_row) const {
  std::vector<double> values;
  for (std::size_t c = 0; c < coder_ids_.size(); ++c) {
    if (auto v = cell(unit_row, c)) values.push_back(*v);
  }
  return values;
}

AnnotationMatrix build_annotation_matrix(const AnnotationList& annotations,
                                         const Variable& variable,
                                         std::vector<std::string> coder_ids,
                                         std::vector<std::string> unit_ids) {
  if (coder_ids.empty() || unit_ids.empty()) {
    std::set<std::string> coders_seen;
    std::set<std::string> units_seen;
    for (const auto& a : annotations) {
      if (a.variable != variable.name) continue;
      coders_seen.insert(a.coder.id);
      units_seen.insert(a.unit_id);
    }
    if (coder_ids.empty()) coder_ids.assign(coders_seen.begin(), coders_seen.end());
    if (unit_ids.empty()) unit_ids.assign(units_seen.begin(), units_seen.end());
  }
  std::sort(coder_ids.begin(), coder_ids.end());
  std::sort(unit_ids.begin(), unit_ids.end());

  AnnotationMatrix matrix(variable.name, coder_ids, unit_ids);
  std::map<std::string, std::size_t> coder_index;
  std::map<std::string, std::size_t> unit_index;
  for (std::size_t i = 0; i < coder_ids.size(); ++i) coder_index[coder_ids[i]] = i;
  for (std::size_t i = 0; i < unit_ids.size(); ++i) unit_index[unit_ids[i]] = i;

  // Explicit MISSING rows and absent rows produce the same cell; only two
  // different non-missing values from one coder conflict.
  std::map<std::pair<std::size_t, std::size_t>, double> assigned;
  for (const auto& a : annotations) {
    if (a.variable != variable.name) continue;
    auto ci = coder_index.find(a.coder.id);
    auto ui = unit_index.find(a.unit_id);
    if (ci == coder_index.end() || ui == unit_index.end()) continue;
    if (!a.value) continue;
    if (!variable.in_domain(*a.value)) {
      throw Error(ErrorCode::validation,
                  "value " + text::format_value(*a.value) + " outside domain of variable '" +
                      variable.name + "' (unit '" + a.unit_id + "', coder '" + a.coder.id +
                      "')");
    }
    auto key = std::make_pair(ui->second, ci->second);
    auto it = assigned.find(key);
    if (it != assigned.end()) {
      if (it->second != *a.value) {
        throw Error(ErrorCode::validation,
                    "conflicting annotation: coder '" + a.coder.id + "' coded unit '" +
                        a.unit_id + "' more than once with different values");
      }
      continue;
    }
    assigned.emplace(key, *a.value);
    matrix.set_cell(ui->second, ci->second, a.value);
  }
  return matrix;
}

}  // namespace ca::model
