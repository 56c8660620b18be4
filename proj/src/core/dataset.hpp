#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/codebook.hpp"

namespace ca::model {

struct CodingUnit {
  std::string id;
  std::string text;
  std::size_t word_count = 0;  // derived from text
  std::map<std::string, std::string> metadata;
};

/// Line-delimited corpus: one JSON record per line with fields
/// `id`, `text`, optional flat `meta` map. Units keep input order.
class Dataset {
 public:
  Dataset() = default;

  static Dataset ingest(std::istream& in, std::vector<Finding>* warnings = nullptr);
  static Dataset ingest_string(const std::string& content,
                               std::vector<Finding>* warnings = nullptr);
  static Dataset load_file(const std::filesystem::path& path,
                           std::vector<Finding>* warnings = nullptr);
  static Dataset from_units(std::vector<CodingUnit> units);

  std::string serialize() const;
  void write_file(const std::filesystem::path& path) const;

  const std::vector<CodingUnit>& units() const { return units_; }
  std::size_t size() const { return units_.size(); }
  bool empty() const { return units_.empty(); }

  const CodingUnit* find(const std::string& id) const;
  const CodingUnit& require(const std::string& id) const;

  std::size_t max_word_count() const;

  /// Stable content fingerprint over ids, texts, and metadata.
  std::string fingerprint() const;

 private:
  void append(CodingUnit unit, std::size_t line_no);

  std::vector<CodingUnit> units_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace ca::model
