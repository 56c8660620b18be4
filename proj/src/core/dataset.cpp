#include "core/dataset.hpp"

#include <fstream>
#include <sstream>

#include "support/errors.hpp"
#include "support/hash.hpp"
#include "support/jsonio.hpp"
#include "support/text.hpp"

namespace ca::model {

namespace {

using nlohmann::json;

CodingUnit unit_from_json(const json& j, std::size_t line_no) {
  const std::string where = "line " + std::to_string(line_no);
  if (!j.is_object()) {
    throw Error(ErrorCode::parse, where + ": unit record must be a JSON object");
  }
  if (!j.contains("id") || !j.at("id").is_string()) {
    throw Error(ErrorCode::parse, where + ": missing string field 'id'");
  }
  if (!j.contains("text") || !j.at("text").is_string()) {
    throw Error(ErrorCode::parse, where + ": missing string field 'text'");
  }
  CodingUnit unit;
  unit.id = j.at("id").get<std::string>();
  unit.text = j.at("text").get<std::string>();
  unit.word_count = text::word_count(unit.text);
  if (unit.id.empty()) {
    throw Error(ErrorCode::parse, where + ": empty unit id");
  }
  if (j.contains("meta")) {
    const json& meta = j.at("meta");
    if (!meta.is_object()) {
      throw Error(ErrorCode::parse, where + ": 'meta' must be a flat map");
    }
    for (const auto& [key, value] : meta.items()) {
      if (!value.is_string()) {
        throw Error(ErrorCode::parse, where + ": meta value for '" + key + "' must be text");
      }
      unit.metadata[key] = value.get<std::string>();
    }
  }
  return unit;
}

}  // namespace

void Dataset::append(CodingUnit unit, std::size_t line_no) {
  auto [it, inserted] = index_.emplace(unit.id, units_.size());
  if (!inserted) {
    throw Error(ErrorCode::validation,
                "duplicate id " + unit.id +
                    (line_no ? " (line " + std::to_string(line_no) + ")" : ""));
  }
  units_.push_back(std::move(unit));
}

Dataset Dataset::ingest(std::istream& in, std::vector<Finding>* warnings) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": invalid JSON");
    }
    CodingUnit unit = unit_from_json(j, line_no);
    if (unit.text.empty() && warnings) {
      warnings->push_back({Finding::Severity::warning, "empty-text",
                           "unit '" + unit.id + "' has empty text", unit.id});
    }
    ds.append(std::move(unit), line_no);
  }
  return ds;
}

Dataset Dataset::ingest_string(const std::string& content, std::vector<Finding>* warnings) {
  std::istringstream in(content);
  return ingest(in, warnings);
}

Dataset Dataset::load_file(const std::filesystem::path& path, std::vector<Finding>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io, "cannot open dataset: " + path.string());
  }
  return ingest(in, warnings);
}

Dataset Dataset::from_units(std::vector<CodingUnit> units) {
  Dataset ds;
  for (auto& u : units) {
    u.word_count = text::word_count(u.text);
    ds.append(std::move(u), 0);
  }
  return ds;
}

std::string Dataset::serialize() const {
  std::string out;
  for (const auto& u : units_) {
    json j;
    j["id"] = u.id;
    j["text"] = u.text;
    if (!u.metadata.empty()) {
      j["meta"] = u.metadata;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

void Dataset::write_file(const std::filesystem::path& path) const {
  jsonio::save_text_file(path, serialize());
}

const CodingUnit* Dataset::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &units_[it->second];
}

const CodingUnit& Dataset::require(const std::string& id) const {
  const CodingUnit* u = find(id);
  if (!u) {
    throw Error(ErrorCode::invalid_argument, "unknown unit id: '" + id + "'");
  }
  return *u;
}

std::size_t Dataset::max_word_count() const {
  std::size_t max = 0;
  for (const auto& u : units_) {
    if (u.word_count > max) max = u.word_count;
  }
  return max;
}

std::string Dataset::fingerprint() const {
  return hash::digest_hex(serialize());
}

}  // namespace ca::model
