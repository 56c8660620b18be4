#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "core/codebook.hpp"

namespace ca::model {

/// Cell value; std::nullopt is the explicit MISSING sentinel (reliability
/// math treats absent codes specially, so MISSING is never conflated with
/// any code).
using CellValue = std::optional<double>;

struct CoderRef {
  std::string id;
  std::string run_id;  // empty for human coders
};

struct Annotation {
  std::string unit_id;
  std::string variable;
  CoderRef coder;
  CellValue value;                    // nullopt = MISSING
  std::optional<double> confidence;   // in [0, 1] when present
  std::string raw_response;
  std::string timestamp;
};

using AnnotationList = std::vector<Annotation>;

// Tabular annotation format: header
//   unit_id,variable,coder,value,confidence,run_id,timestamp
// MISSING is an empty value field.
AnnotationList annotations_from_csv(const std::string& content);
std::string annotations_to_csv(const AnnotationList& annotations);
AnnotationList load_annotations_file(const std::filesystem::path& path);
void save_annotations_file(const std::filesystem::path& path, const AnnotationList& annotations);

/// Coders x units grid for one variable. Rows are sorted by unit id and
/// columns by coder id, so construction is invariant under permutation
/// of the input annotation list.
class AnnotationMatrix {
 public:
  AnnotationMatrix(std::string variable, std::vector<std::string> coder_ids,
                   std::vector<std::string> unit_ids);

  const std::string& variable_name() const { return variable_; }
  const std::vector<std::string>& coder_ids() const { return coder_ids_; }
  const std::vector<std::string>& unit_ids() const { return unit_ids_; }
  std::size_t coder_count() const { return coder_ids_.size(); }
  std::size_t unit_count() const { return unit_ids_.size(); }

  CellValue cell(std::size_t unit_row, std::size_t coder_col) const;
  void set_cell(std::size_t unit_row, std::size_t coder_col, CellValue value);

  /// Non-missing values of one unit row.
  std::vector<double> unit_values(std::size_t unit_row) const;

 private:
  std::string variable_;
  std::vector<std::string> coder_ids_;
  std::vector<std::string> unit_ids_;
  std::vector<CellValue> cells_;  // row-major
};

/// Builds the grid; cells without an annotation stay MISSING. Two
/// different values from the same coder for the same unit are rejected
/// (coders code once). When `coder_ids`/`unit_ids` are empty the sets
/// observed in the annotations are used.
AnnotationMatrix build_annotation_matrix(const AnnotationList& annotations,
                                         const Variable& variable,
                                         std::vector<std::string> coder_ids = {},
                                         std::vector<std::string> unit_ids = {});

}  // namespace ca::model
