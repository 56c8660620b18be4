#include "ca/ca.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core/annotations.hpp"
#include "core/codebook.hpp"
#include "core/dataset.hpp"
#include "gateway/client.hpp"
#include "gateway/models.hpp"
#include "gateway/provider.hpp"
#include "hybrid/hybrid.hpp"
#include "metrics/classification.hpp"
#include "metrics/reliability.hpp"
#include "prompts/prompts.hpp"
#include "report/report.hpp"
#include "runner/runner.hpp"
#include "sampling/gold.hpp"
#include "sampling/sampling.hpp"
#include "support/errors.hpp"
#include "support/hash.hpp"
#include "support/jsonio.hpp"

using nlohmann::json;

struct ca_codebook {
  ca::model::Codebook value;
};

struct ca_dataset {
  ca::model::Dataset value;
  std::vector<ca::model::Finding> warnings;
};

struct ca_annotations {
  ca::model::AnnotationList value;
};

struct ca_matrix {
  ca::model::AnnotationMatrix value;
  ca::model::Variable variable;
};

struct ca_template {
  ca::prompts::PromptTemplate value;
};

struct ca_registry {
  ca::gateway::Registry value;
};

namespace {

thread_local std::string tl_error;

ca_status status_from(ca::ErrorCode code) {
  switch (code) {
    case ca::ErrorCode::invalid_argument: return CA_ERR_INVALID_ARGUMENT;
    case ca::ErrorCode::parse: return CA_ERR_PARSE;
    case ca::ErrorCode::validation: return CA_ERR_VALIDATION;
    case ca::ErrorCode::io: return CA_ERR_IO;
    case ca::ErrorCode::transport: return CA_ERR_TRANSPORT;
    case ca::ErrorCode::credentials: return CA_ERR_CREDENTIALS;
    case ca::ErrorCode::state: return CA_ERR_STATE;
    case ca::ErrorCode::unsupported: return CA_ERR_UNSUPPORTED;
    case ca::ErrorCode::internal: return CA_ERR_INTERNAL;
  }
  return CA_ERR_INTERNAL;
}

template <typename Fn>
ca_status guarded(Fn&& fn) {
  tl_error.clear();
  try {
    return fn();
  } catch (const ca::Error& e) {
    tl_error = e.what();
    return status_from(e.code());
  } catch (const json::exception& e) {
    tl_error = e.what();
    return CA_ERR_PARSE;
  } catch (const std::exception& e) {
    tl_error = e.what();
    return CA_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out != nullptr) std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

void set_out(char** out, const std::string& text) {
  if (out != nullptr) *out = dup_string(text);
}

void set_out(char** out, const json& j) { set_out(out, j.dump(2)); }

void require_arg(const void* pointer, const char* what) {
  if (pointer == nullptr)
    throw ca::Error(ca::ErrorCode::invalid_argument,
                    std::string(what) + " must not be null");
}

json parse_json(const char* text, const char* what) {
  require_arg(text, what);
  return ca::jsonio::parse(text, what);
}

std::map<std::string, double> parse_label_map(const char* labels_json, const char* what) {
  std::map<std::string, double> labels;
  const json j = parse_json(labels_json, what);
  if (!j.is_object())
    throw ca::Error(ca::ErrorCode::parse, std::string(what) + " must be a JSON object");
  for (const auto& [unit_id, value] : j.items()) {
    if (!value.is_number())
      throw ca::Error(ca::ErrorCode::parse,
                      std::string(what) + " values must be numbers");
    labels[unit_id] = value.get<double>();
  }
  return labels;
}

std::vector<std::string> parse_string_array(const char* text, const char* what) {
  const json j = parse_json(text, what);
  if (!j.is_array())
    throw ca::Error(ca::ErrorCode::parse, std::string(what) + " must be a JSON array");
  return j.get<std::vector<std::string>>();
}

ca::gateway::ScreeningRequirements requirements_from_json(const json& j) {
  ca::gateway::ScreeningRequirements requirements;
  if (j.is_null()) return requirements;
  if (!j.is_object())
    throw ca::Error(ca::ErrorCode::parse, "requirements must be a JSON object");
  if (j.contains("min_context_tokens"))
    requirements.min_context_tokens = j.at("min_context_tokens").get<std::size_t>();
  if (j.contains("require_open_weights"))
    requirements.require_open_weights = j.at("require_open_weights").get<bool>();
  if (j.contains("max_price_per_mtok"))
    requirements.max_price_per_mtok = j.at("max_price_per_mtok").get<double>();
  if (j.contains("max_vram_gb"))
    requirements.max_vram_gb = j.at("max_vram_gb").get<double>();
  if (j.contains("quantization")) {
    const auto name = j.at("quantization").get<std::string>();
    if (name == "none")
      requirements.quantization = ca::gateway::Quantization::none;
    else if (name == "four_bit")
      requirements.quantization = ca::gateway::Quantization::four_bit;
    else
      throw ca::Error(ca::ErrorCode::parse, "unknown quantization '" + name + "'");
  }
  return requirements;
}

ca::gateway::Quantization quantization_from_name(const char* name) {
  if (name == nullptr || std::string(name) == "none")
    return ca::gateway::Quantization::none;
  if (std::string(name) == "four_bit") return ca::gateway::Quantization::four_bit;
  throw ca::Error(ca::ErrorCode::invalid_argument,
                  "unknown quantization '" + std::string(name) + "'");
}

/// Distinct (coder id, run id) pairs become runs, ordered by pair.
std::vector<std::map<std::string, ca::model::CellValue>> runs_by_coder(
    const ca::model::AnnotationList& annotations, const std::string& variable) {
  std::map<std::pair<std::string, std::string>, std::map<std::string, ca::model::CellValue>>
      runs;
  for (const auto& annotation : annotations) {
    if (annotation.variable != variable) continue;
    runs[{annotation.coder.id, annotation.coder.run_id}][annotation.unit_id] =
        annotation.value;
  }
  std::vector<std::map<std::string, ca::model::CellValue>> ordered;
  for (auto& [coder, values] : runs) ordered.push_back(std::move(values));
  return ordered;
}

ca::gateway::Client client_for(const ca_registry* registry, const std::string& model) {
  const auto& spec = registry->value.require(model);
  return ca::gateway::Client(ca::gateway::make_provider(spec));
}

/// Provenance stub next to every run: which model ran, how it was
/// deployed, and under which exact configuration. `manifest build`
/// extends this into the full disclosure record once validation
/// results exist.
void write_provenance(const std::filesystem::path& run_dir,
                      const ca::gateway::ModelSpec& spec) {
  const auto config =
      ca::runner::run_config_from_json(ca::jsonio::load_file(run_dir / "config.json"));
  nlohmann::ordered_json j;
  j["tool_version"] = ca::report::kToolVersion;
  j["run_id"] = config.base_run_id();
  j["run_mode"] = ca::runner::to_string(config.mode);
  j["seed"] = config.seed;
  j["model"] = {{"name", spec.name}, {"provider", spec.provider},
                {"endpoint", spec.endpoint}};
  j["deployment"] = ca::report::deployment_for(spec);
  j["finetuning"] = "none";
  j["params"] = config.params.to_json();
  j["prompt"] = config.prompt.to_json();
  j["dataset_fingerprint"] = config.dataset_fingerprint;
  j["codebook_hash"] = config.codebook_hash;
  ca::jsonio::save_text_file(run_dir / "provenance.json", j.dump(2) + "\n");
}

}  // namespace

extern "C" {

const char* ca_version(void) { return ca::report::kToolVersion; }

const char* ca_status_name(ca_status status) {
  switch (status) {
    case CA_OK: return "ok";
    case CA_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case CA_ERR_PARSE: return "parse";
    case CA_ERR_VALIDATION: return "validation";
    case CA_ERR_IO: return "io";
    case CA_ERR_TRANSPORT: return "transport";
    case CA_ERR_CREDENTIALS: return "credentials";
    case CA_ERR_STATE: return "state";
    case CA_ERR_UNSUPPORTED: return "unsupported";
    case CA_ERR_INTERNAL: return "internal";
  }
  return "internal";
}

const char* ca_last_error(void) { return tl_error.c_str(); }

void ca_string_free(char* text) { std::free(text); }

/* ---- codebook ---- */

ca_status ca_codebook_load(const char* path, ca_codebook** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    auto handle = std::make_unique<ca_codebook>();
    handle->value = ca::model::load_codebook_file(path);
    *out = handle.release();
    return CA_OK;
  });
}

ca_status ca_codebook_parse(const char* json_text, ca_codebook** out) {
  return guarded([&] {
    require_arg(out, "out");
    auto handle = std::make_unique<ca_codebook>();
    handle->value = ca::model::codebook_from_json(parse_json(json_text, "codebook"));
    *out = handle.release();
    return CA_OK;
  });
}

void ca_codebook_free(ca_codebook* codebook) { delete codebook; }

ca_status ca_codebook_validate(const ca_codebook* codebook, char** findings_json) {
  return guarded([&] {
    require_arg(codebook, "codebook");
    const auto findings = ca::model::validate_codebook(codebook->value);
    set_out(findings_json, ca::model::findings_to_json(findings));
    return CA_OK;
  });
}

ca_status ca_codebook_hash(const ca_codebook* codebook, char** hex) {
  return guarded([&] {
    require_arg(codebook, "codebook");
    set_out(hex, ca::model::codebook_hash(codebook->value));
    return CA_OK;
  });
}

ca_status ca_codebook_info(const ca_codebook* codebook, char** info_json) {
  return guarded([&] {
    require_arg(codebook, "codebook");
    json variables = json::array();
    for (const auto& variable : codebook->value.variables) {
      json v;
      v["name"] = variable.name;
      v["scale"] = ca::model::scale_to_string(variable.scale);
      v["categories"] = variable.categories.size();
      variables.push_back(std::move(v));
    }
    json info;
    info["version"] = codebook->value.version;
    info["variables"] = std::move(variables);
    set_out(info_json, info);
    return CA_OK;
  });
}

/* ---- dataset ---- */

ca_status ca_dataset_load(const char* path, ca_dataset** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    auto handle = std::make_unique<ca_dataset>();
    handle->value = ca::model::Dataset::load_file(path, &handle->warnings);
    *out = handle.release();
    return CA_OK;
  });
}

ca_status ca_dataset_parse(const char* jsonl_text, ca_dataset** out) {
  return guarded([&] {
    require_arg(jsonl_text, "content");
    require_arg(out, "out");
    auto handle = std::make_unique<ca_dataset>();
    handle->value = ca::model::Dataset::ingest_string(jsonl_text, &handle->warnings);
    *out = handle.release();
    return CA_OK;
  });
}

void ca_dataset_free(ca_dataset* dataset) { delete dataset; }

ca_status ca_dataset_write(const ca_dataset* dataset, const char* path) {
  return guarded([&] {
    require_arg(dataset, "dataset");
    require_arg(path, "path");
    dataset->value.write_file(path);
    return CA_OK;
  });
}

ca_status ca_dataset_info(const ca_dataset* dataset, char** info_json) {
  return guarded([&] {
    require_arg(dataset, "dataset");
    json warnings = json::array();
    for (const auto& finding : dataset->warnings)
      warnings.push_back(finding.message + (finding.where.empty() ? "" : " (" + finding.where + ")"));
    json info;
    info["units"] = dataset->value.size();
    info["fingerprint"] = dataset->value.fingerprint();
    info["max_word_count"] = dataset->value.max_word_count();
    info["warnings"] = std::move(warnings);
    set_out(info_json, info);
    return CA_OK;
  });
}

/* ---- annotations ---- */

ca_status ca_annotations_load(const char* path, ca_annotations** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    auto handle = std::make_unique<ca_annotations>();
    handle->value = ca::model::load_annotations_file(path);
    *out = handle.release();
    return CA_OK;
  });
}

ca_status ca_annotations_parse(const char* csv_text, ca_annotations** out) {
  return guarded([&] {
    require_arg(csv_text, "content");
    require_arg(out, "out");
    auto handle = std::make_unique<ca_annotations>();
    handle->value = ca::model::annotations_from_csv(csv_text);
    *out = handle.release();
    return CA_OK;
  });
}

void ca_annotations_free(ca_annotations* annotations) { delete annotations; }

ca_status ca_annotations_save(const ca_annotations* annotations, const char* path) {
  return guarded([&] {
    require_arg(annotations, "annotations");
    require_arg(path, "path");
    ca::model::save_annotations_file(path, annotations->value);
    return CA_OK;
  });
}

ca_status ca_annotations_concat(const ca_annotations* first, const ca_annotations* second,
                                ca_annotations** out) {
  return guarded([&] {
    require_arg(first, "first");
    require_arg(second, "second");
    require_arg(out, "out");
    auto handle = std::make_unique<ca_annotations>();
    handle->value = first->value;
    handle->value.insert(handle->value.end(), second->value.begin(), second->value.end());
    *out = handle.release();
    return CA_OK;
  });
}

ca_status ca_annotations_info(const ca_annotations* annotations, char** info_json) {
  return guarded([&] {
    require_arg(annotations, "annotations");
    std::map<std::pair<std::string, std::string>, std::size_t> coders;
    std::map<std::string, std::size_t> variables;
    std::map<std::string, std::size_t> units;
    for (const auto& annotation : annotations->value) {
      coders[{annotation.coder.id, annotation.coder.run_id}] += 1;
      variables[annotation.variable] += 1;
      units[annotation.unit_id] += 1;
    }
    json coders_json = json::array();
    for (const auto& [coder, count] : coders) {
      json c;
      c["id"] = coder.first;
      c["run_id"] = coder.second;
      c["rows"] = count;
      coders_json.push_back(std::move(c));
    }
    json variables_json = json::array();
    for (const auto& [name, count] : variables) variables_json.push_back(name);
    json info;
    info["rows"] = annotations->value.size();
    info["units"] = units.size();
    info["coders"] = std::move(coders_json);
    info["variables"] = std::move(variables_json);
    set_out(info_json, info);
    return CA_OK;
  });
}

ca_status ca_matrix_build(const ca_annotations* annotations, const ca_codebook* codebook,
                          const char* variable, const char* coders_json,
                          const char* units_json, ca_matrix** out) {
  return guarded([&] {
    require_arg(annotations, "annotations");
    require_arg(codebook, "codebook");
    require_arg(variable, "variable");
    require_arg(out, "out");
    const auto& var = codebook->value.require_variable(variable);
    std::vector<std::string> coders;
    if (coders_json != nullptr) coders = parse_string_array(coders_json, "coders");
    std::vector<std::string> units;
    if (units_json != nullptr) units = parse_string_array(units_json, "units");
    auto matrix = ca::model::build_annotation_matrix(annotations->value, var, coders, units);
    *out = new ca_matrix{std::move(matrix), var};
    return CA_OK;
  });
}

void ca_matrix_free(ca_matrix* matrix) { delete matrix; }

ca_status ca_matrix_info(const ca_matrix* matrix, char** info_json) {
  return guarded([&] {
    require_arg(matrix, "matrix");
    json info;
    info["variable"] = matrix->value.variable_name();
    info["coders"] = matrix->value.coder_ids();
    info["units"] = matrix->value.unit_ids();
    set_out(info_json, info);
    return CA_OK;
  });
}

/* ---- reliability & validity ---- */

ca_status ca_krippendorff_alpha(const ca_matrix* matrix, const char* scale,
                                const char* rank_order_json, char** result_json) {
  return guarded([&] {
    require_arg(matrix, "matrix");
    const auto effective_scale =
        scale == nullptr ? matrix->variable.scale : ca::model::scale_from_string(scale);
    std::vector<double> rank_order;
    if (rank_order_json != nullptr) {
      const json j = parse_json(rank_order_json, "rank order");
      if (!j.is_array())
        throw ca::Error(ca::ErrorCode::parse, "rank order must be a JSON array");
      rank_order = j.get<std::vector<double>>();
    }
    const auto result =
        ca::metrics::krippendorff_alpha(matrix->value, effective_scale, rank_order);
    set_out(result_json, ca::metrics::reliability_to_json(result));
    return CA_OK;
  });
}

ca_status ca_gate(const char* reliability_json, char** gate_json) {
  return guarded([&] {
    const auto reliability =
        ca::metrics::reliability_from_json(parse_json(reliability_json, "reliability"));
    set_out(gate_json, ca::sampling::gate_to_json(ca::sampling::gate_reliability(reliability)));
    return CA_OK;
  });
}

ca_status ca_classification(const ca_matrix* matrix, const char* coder,
                            const char* gold_json, char** report_json) {
  return guarded([&] {
    require_arg(matrix, "matrix");
    const auto gold = ca::sampling::gold_from_json(parse_json(gold_json, "gold standard"));
    std::size_t column = 0;
    if (coder == nullptr) {
      if (matrix->value.coder_count() != 1)
        throw ca::Error(ca::ErrorCode::invalid_argument,
                        "matrix has several coders; name the one to evaluate");
    } else {
      const auto& ids = matrix->value.coder_ids();
      const auto it = std::find(ids.begin(), ids.end(), std::string(coder));
      if (it == ids.end())
        throw ca::Error(ca::ErrorCode::invalid_argument,
                        "coder '" + std::string(coder) + "' is not in the matrix");
      column = static_cast<std::size_t>(it - ids.begin());
    }
    std::map<std::string, ca::model::CellValue> predicted;
    const auto& units = matrix->value.unit_ids();
    for (std::size_t row = 0; row < units.size(); ++row)
      predicted[units[row]] = matrix->value.cell(row, column);
    std::vector<double> domain;
    if (matrix->variable.is_categorical())
      for (const auto code : matrix->variable.category_codes())
        domain.push_back(static_cast<double>(code));
    const auto report = ca::metrics::classification_report(predicted, gold.codes, domain);
    set_out(report_json, ca::metrics::classification_to_json(report));
    return CA_OK;
  });
}

ca_status ca_intracoder(const ca_annotations* annotations, const ca_codebook* codebook,
                        const char* variable, char** result_json) {
  return guarded([&] {
    require_arg(annotations, "annotations");
    require_arg(codebook, "codebook");
    require_arg(variable, "variable");
    codebook->value.require_variable(variable);
    const auto runs = runs_by_coder(annotations->value, variable);
    const auto result = ca::metrics::intracoder_agreement(runs);
    set_out(result_json, ca::metrics::intracoder_to_json(result));
    return CA_OK;
  });
}

/* ---- sampling & gold standard ---- */

ca_status ca_sample_draw(const ca_dataset* dataset, const char* config_json,
                         const char* labels_json, char** sample_json) {
  return guarded([&] {
    require_arg(dataset, "dataset");
    ca::sampling::SamplingConfig config;
    if (config_json != nullptr) {
      const json j = parse_json(config_json, "sampling config");
      if (!j.is_object())
        throw ca::Error(ca::ErrorCode::parse, "sampling config must be a JSON object");
      if (j.contains("initial_fraction"))
        config.initial_fraction = j.at("initial_fraction").get<double>();
      if (j.contains("step")) config.step = j.at("step").get<double>();
      if (j.contains("floor")) config.floor = j.at("floor").get<std::size_t>();
      if (j.contains("minority_minimum"))
        config.minority_minimum = j.at("minority_minimum").get<std::size_t>();
      if (j.contains("heuristic_cap"))
        config.heuristic_cap = j.at("heuristic_cap").get<std::size_t>();
      if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    }
    std::map<std::string, double> labels;
    const ca::sampling::LabelMap* labels_pointer = nullptr;
    if (labels_json != nullptr) {
      labels = parse_label_map(labels_json, "labels");
      labels_pointer = &labels;
    }
    const auto result = ca::sampling::draw_validation_sample(dataset->value, config, labels_pointer);
    set_out(sample_json, result.to_json());
    return CA_OK;
  });
}

ca_status ca_sample_fixed(const ca_dataset* dataset, size_t n, uint64_t seed,
                          char** sample_json) {
  return guarded([&] {
    require_arg(dataset, "dataset");
    set_out(sample_json, ca::sampling::pilot_sample(dataset->value, n, seed).to_json());
    return CA_OK;
  });
}

ca_status ca_sample_heuristic(size_t population, char** size_json) {
  return guarded([&] {
    const auto result = ca::sampling::heuristic_size(population);
    json j;
    j["recommended"] = result.recommended;
    j["rationale"] = result.rationale;
    set_out(size_json, j);
    return CA_OK;
  });
}

ca_status ca_sample_rich_range(const ca_dataset* dataset, const ca_codebook* codebook,
                               const char* variable, const char* labels_json,
                               size_t per_category_minimum, uint64_t seed,
                               char** sample_json) {
  return guarded([&] {
    require_arg(dataset, "dataset");
    require_arg(codebook, "codebook");
    require_arg(variable, "variable");
    const auto& var = codebook->value.require_variable(variable);
    const auto labels = parse_label_map(labels_json, "labels");
    const auto result = ca::sampling::rich_range_sample(dataset->value, var, labels,
                                                        per_category_minimum, seed);
    set_out(sample_json, result.to_json());
    return CA_OK;
  });
}

ca_status ca_gold_majority(const ca_matrix* matrix, char** gold_json) {
  return guarded([&] {
    require_arg(matrix, "matrix");
    set_out(gold_json, ca::sampling::majority_vote(matrix->value).to_json());
    return CA_OK;
  });
}

ca_status ca_gold_consensus(const ca_matrix* matrix, const char* resolutions_json,
                            char** gold_json) {
  return guarded([&] {
    require_arg(matrix, "matrix");
    const auto resolutions = parse_label_map(resolutions_json, "resolutions");
    set_out(gold_json, ca::sampling::consensus_gold(matrix->value, resolutions).to_json());
    return CA_OK;
  });
}

ca_status ca_gold_agreement_only(const ca_matrix* matrix, char** gold_json) {
  return guarded([&] {
    require_arg(matrix, "matrix");
    set_out(gold_json, ca::sampling::agreement_only_gold(matrix->value).to_json());
    return CA_OK;
  });
}

/* ---- prompts ---- */

ca_status ca_template_load(const char* path, ca_template** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    auto handle = std::make_unique<ca_template>();
    handle->value = ca::prompts::load_template_file(path);
    *out = handle.release();
    return CA_OK;
  });
}

ca_status ca_template_parse(const char* json_text, ca_template** out) {
  return guarded([&] {
    require_arg(out, "out");
    auto handle = std::make_unique<ca_template>();
    handle->value = ca::prompts::template_from_json(parse_json(json_text, "template"));
    *out = handle.release();
    return CA_OK;
  });
}

void ca_template_free(ca_template* tmpl) { delete tmpl; }

ca_status ca_template_json(const ca_template* tmpl, char** json_text) {
  return guarded([&] {
    require_arg(tmpl, "template");
    set_out(json_text, tmpl->value.to_json());
    return CA_OK;
  });
}

ca_status ca_render_prompt(const ca_template* tmpl, const ca_codebook* codebook,
                           const char* variable, const ca_dataset* dataset,
                           const char* unit_id, const char* examples_json,
                           char** rendered_json) {
  return guarded([&] {
    require_arg(tmpl, "template");
    require_arg(codebook, "codebook");
    require_arg(variable, "variable");
    require_arg(dataset, "dataset");
    require_arg(unit_id, "unit id");
    const auto& var = codebook->value.require_variable(variable);
    const auto& unit = dataset->value.require(unit_id);
    std::vector<ca::prompts::FewShotExample> examples;
    if (examples_json != nullptr) {
      const json j = parse_json(examples_json, "examples");
      if (!j.is_array())
        throw ca::Error(ca::ErrorCode::parse, "examples must be a JSON array");
      for (const auto& e : j) {
        ca::prompts::FewShotExample example;
        example.text = e.at("text").get<std::string>();
        example.code = e.at("code").get<double>();
        if (e.contains("rationale")) example.rationale = e.at("rationale").get<std::string>();
        examples.push_back(std::move(example));
      }
    }
    const auto rendered = ca::prompts::render_prompt(tmpl->value, var, unit, examples);
    json j;
    j["template"] = rendered.template_name;
    j["system"] = rendered.system;
    j["user"] = rendered.user;
    j["content_hash"] = ca::hash::to_hex(rendered.content_hash);
    set_out(rendered_json, j);
    return CA_OK;
  });
}

ca_status ca_prompt_variants(size_t few_shot_k, int ask_justification, char** variants_json) {
  return guarded([&] {
    json variants = json::array();
    for (const auto& tmpl : ca::prompts::generate_variants(few_shot_k, ask_justification != 0))
      variants.push_back(tmpl.to_json());
    set_out(variants_json, variants);
    return CA_OK;
  });
}

ca_status ca_parse_response(const ca_template* tmpl, const ca_codebook* codebook,
                            const char* variable, const char* response_text,
                            char** parsed_json) {
  return guarded([&] {
    require_arg(tmpl, "template");
    require_arg(codebook, "codebook");
    require_arg(variable, "variable");
    require_arg(response_text, "response");
    const auto& var = codebook->value.require_variable(variable);
    const auto parsed = ca::prompts::parse_response(
        response_text, var, ca::prompts::parse_mode_for(tmpl->value));
    json j;
    j["ok"] = parsed.ok;
    if (parsed.ok) {
      j["code"] = parsed.code;
      if (parsed.confidence.has_value()) j["confidence"] = *parsed.confidence;
    } else {
      j["reason"] = parsed.reason;
    }
    set_out(parsed_json, j);
    return CA_OK;
  });
}

/* ---- models & screening ---- */

ca_status ca_registry_load(const char* path, ca_registry** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    auto handle = std::make_unique<ca_registry>();
    handle->value = ca::gateway::Registry::load_file(path);
    *out = handle.release();
    return CA_OK;
  });
}

ca_status ca_registry_parse(const char* json_text, ca_registry** out) {
  return guarded([&] {
    require_arg(out, "out");
    auto handle = std::make_unique<ca_registry>();
    handle->value = ca::gateway::Registry::from_json(parse_json(json_text, "registry"));
    *out = handle.release();
    return CA_OK;
  });
}

void ca_registry_free(ca_registry* registry) { delete registry; }

ca_status ca_registry_json(const ca_registry* registry, char** json_text) {
  return guarded([&] {
    require_arg(registry, "registry");
    set_out(json_text, registry->value.to_json());
    return CA_OK;
  });
}

ca_status ca_screen_model(const ca_registry* registry, const char* model,
                          const char* requirements_json, char** result_json) {
  return guarded([&] {
    require_arg(registry, "registry");
    const auto requirements = requirements_from_json(
        requirements_json == nullptr ? json() : parse_json(requirements_json, "requirements"));
    if (model != nullptr) {
      const auto& spec = registry->value.require(model);
      set_out(result_json, ca::gateway::screen_model(spec, requirements).to_json());
      return CA_OK;
    }
    json results = json::array();
    for (const auto& spec : registry->value.models())
      results.push_back(ca::gateway::screen_model(spec, requirements).to_json());
    set_out(result_json, results);
    return CA_OK;
  });
}

ca_status ca_credential_env(const char* provider, char** env_name) {
  return guarded([&] {
    require_arg(provider, "provider");
    set_out(env_name, ca::gateway::credential_env_name(provider));
    return CA_OK;
  });
}

ca_status ca_estimate_tokens(uint64_t word_count, uint64_t* tokens) {
  return guarded([&] {
    require_arg(tokens, "tokens");
    *tokens = ca::gateway::estimate_tokens(static_cast<std::size_t>(word_count));
    return CA_OK;
  });
}

ca_status ca_estimate_tokens_for_text(const char* text, uint64_t* tokens) {
  return guarded([&] {
    require_arg(text, "text");
    require_arg(tokens, "tokens");
    *tokens = ca::gateway::estimate_tokens_for_text(text);
    return CA_OK;
  });
}

ca_status ca_estimate_cost(uint64_t tokens, double price_per_mtok, double* usd) {
  return guarded([&] {
    require_arg(usd, "usd");
    *usd = ca::gateway::estimate_cost_usd(static_cast<std::size_t>(tokens), price_per_mtok);
    return CA_OK;
  });
}

ca_status ca_estimate_vram(double size_billion, const char* quantization, double* gb) {
  return guarded([&] {
    require_arg(gb, "gb");
    *gb = ca::gateway::estimate_vram_gb(size_billion, quantization_from_name(quantization));
    return CA_OK;
  });
}

ca_status ca_project_runtime(double per_item_seconds, uint64_t item_count, double* seconds) {
  return guarded([&] {
    require_arg(seconds, "seconds");
    *seconds = ca::gateway::project_runtime_seconds(per_item_seconds,
                                                    static_cast<std::size_t>(item_count));
    return CA_OK;
  });
}

/* ---- annotation runs ---- */

ca_status ca_run_defaults(char** config_json) {
  return guarded([&] {
    set_out(config_json, ca::runner::RunConfig{}.to_json());
    return CA_OK;
  });
}

ca_status ca_run(const char* run_dir, const char* config_json, const ca_registry* registry,
                 const ca_dataset* dataset, const ca_codebook* codebook,
                 char** summary_json) {
  return guarded([&] {
    require_arg(run_dir, "run directory");
    require_arg(registry, "registry");
    require_arg(dataset, "dataset");
    require_arg(codebook, "codebook");
    auto config = ca::runner::run_config_from_json(parse_json(config_json, "run config"));
    const auto& variable = codebook->value.require_variable(config.variable);
    if (config.codebook_hash.empty())
      config.codebook_hash = ca::model::codebook_hash(codebook->value);
    auto client = client_for(registry, config.model);
    ca::runner::Runner runner(client, run_dir);
    const auto result = runner.run(config, dataset->value, variable);
    write_provenance(run_dir, registry->value.require(config.model));
    set_out(summary_json, result.summary.to_json());
    return CA_OK;
  });
}

ca_status ca_run_resume(const char* run_dir, const ca_registry* registry,
                        const ca_dataset* dataset, const ca_codebook* codebook,
                        char** summary_json) {
  return guarded([&] {
    require_arg(run_dir, "run directory");
    require_arg(registry, "registry");
    require_arg(dataset, "dataset");
    require_arg(codebook, "codebook");
    const auto config_path = std::filesystem::path(run_dir) / "config.json";
    const auto config =
        ca::runner::run_config_from_json(ca::jsonio::load_file(config_path));
    const auto& variable = codebook->value.require_variable(config.variable);
    auto client = client_for(registry, config.model);
    ca::runner::Runner runner(client, run_dir);
    const auto result = runner.resume(dataset->value, variable);
    write_provenance(run_dir, registry->value.require(config.model));
    set_out(summary_json, result.summary.to_json());
    return CA_OK;
  });
}

int ca_run_can_resume(const char* run_dir) {
  if (run_dir == nullptr) return 0;
  try {
    return ca::runner::Runner::can_resume(run_dir) ? 1 : 0;
  } catch (...) {
    return 0;
  }
}

/* ---- hybrid routing ---- */

ca_status ca_hybrid_route_confidence(const ca_annotations* annotations,
                                     const ca_dataset* dataset, const ca_codebook* codebook,
                                     const char* variable, double confidence_threshold,
                                     const char* queue_csv_path,
                                     ca_annotations** accepted_out, char** summary_json) {
  return guarded([&] {
    require_arg(annotations, "annotations");
    require_arg(dataset, "dataset");
    require_arg(codebook, "codebook");
    require_arg(variable, "variable");
    const auto& var = codebook->value.require_variable(variable);
    ca::hybrid::RoutingPolicy policy;
    policy.confidence_threshold = confidence_threshold;
    const auto result =
        ca::hybrid::route_by_confidence(annotations->value, dataset->value, var, policy);
    if (queue_csv_path != nullptr) ca::hybrid::save_queue_file(queue_csv_path, result.queue);
    if (accepted_out != nullptr) *accepted_out = new ca_annotations{result.accepted};
    set_out(summary_json, result.to_json());
    return CA_OK;
  });
}

ca_status ca_hybrid_route_divergence(const ca_matrix* matrix, const ca_dataset* dataset,
                                     const char* queue_csv_path,
                                     ca_annotations** accepted_out, char** summary_json) {
  return guarded([&] {
    require_arg(matrix, "matrix");
    require_arg(dataset, "dataset");
    const auto result =
        ca::hybrid::route_by_divergence(matrix->value, dataset->value, matrix->variable);
    if (queue_csv_path != nullptr) ca::hybrid::save_queue_file(queue_csv_path, result.queue);
    if (accepted_out != nullptr) *accepted_out = new ca_annotations{result.accepted};
    set_out(summary_json, result.to_json());
    return CA_OK;
  });
}

ca_status ca_hybrid_import(const char* queue_csv_path, const ca_codebook* codebook,
                           const char* variable, ca_annotations** resolved_out,
                           char** report_json) {
  return guarded([&] {
    require_arg(queue_csv_path, "queue path");
    require_arg(codebook, "codebook");
    require_arg(variable, "variable");
    const auto& var = codebook->value.require_variable(variable);
    const auto queue = ca::hybrid::load_queue_file(queue_csv_path, var.name);
    const auto result = ca::hybrid::import_resolutions(queue, var);
    if (resolved_out != nullptr) *resolved_out = new ca_annotations{result.annotations};
    set_out(report_json, result.to_json());
    return CA_OK;
  });
}

ca_status ca_hybrid_judge(const char* queue_csv_path, const ca_annotations* judge_codes,
                          const ca_codebook* codebook, const char* variable,
                          const char* remaining_csv_path, ca_annotations** resolved_out,
                          char** summary_json) {
  return guarded([&] {
    require_arg(queue_csv_path, "queue path");
    require_arg(judge_codes, "judge codes");
    require_arg(codebook, "codebook");
    require_arg(variable, "variable");
    const auto& var = codebook->value.require_variable(variable);
    const auto queue = ca::hybrid::load_queue_file(queue_csv_path, var.name);
    const auto result = ca::hybrid::judge_escalation(queue, judge_codes->value, var);
    if (remaining_csv_path != nullptr)
      ca::hybrid::save_queue_file(remaining_csv_path, result.remaining);
    if (resolved_out != nullptr) *resolved_out = new ca_annotations{result.resolved};
    set_out(summary_json, result.to_json());
    return CA_OK;
  });
}

/* ---- benchmark, manifest, report ---- */

ca_status ca_benchmark(const char* plan_json, const ca_registry* registry,
                       const ca_dataset* dataset, const ca_codebook* codebook,
                       const char* variable, const char* gold_json, char** result_json) {
  return guarded([&] {
    require_arg(registry, "registry");
    require_arg(dataset, "dataset");
    require_arg(codebook, "codebook");
    require_arg(variable, "variable");
    const auto& var = codebook->value.require_variable(variable);
    const json j = parse_json(plan_json, "benchmark plan");
    if (!j.is_object())
      throw ca::Error(ca::ErrorCode::parse, "benchmark plan must be a JSON object");
    ca::report::BenchmarkPlan plan;
    plan.models = j.at("models").get<std::vector<std::string>>();
    plan.requirements = requirements_from_json(
        j.contains("requirements") ? j.at("requirements") : json());
    plan.base_config = ca::runner::run_config_from_json(j.at("base_config"));
    if (j.contains("intracoder_repetitions"))
      plan.intracoder_repetitions = j.at("intracoder_repetitions").get<std::size_t>();
    if (j.contains("max_candidates"))
      plan.max_candidates = j.at("max_candidates").get<std::size_t>();
    plan.work_dir = j.at("work_dir").get<std::string>();
    if (plan.base_config.codebook_hash.empty())
      plan.base_config.codebook_hash = ca::model::codebook_hash(codebook->value);
    const auto gold = ca::sampling::gold_from_json(parse_json(gold_json, "gold standard"));
    const auto result =
        ca::report::run_benchmark(plan, registry->value, dataset->value, var, gold);
    for (const auto& entry : result.entries) {
      if (entry.screened_out) continue;
      const auto& spec = registry->value.require(entry.model);
      write_provenance(plan.work_dir / entry.model, spec);
      if (entry.has_intracoder)
        write_provenance(plan.work_dir / (entry.model + "-consistency"), spec);
    }
    set_out(result_json, result.to_json());
    return CA_OK;
  });
}

ca_status ca_manifest_build(const char* run_dir, const ca_dataset* dataset,
                            const ca_codebook* codebook, const ca_registry* registry,
                            const char* sample_strategy, const char* created,
                            const char* validation_json, char** manifest_json) {
  return guarded([&] {
    require_arg(run_dir, "run directory");
    ca::report::ManifestValidation validation;
    const ca::report::ManifestValidation* validation_pointer = nullptr;
    if (validation_json != nullptr) {
      const json j = parse_json(validation_json, "validation results");
      if (!j.is_object())
        throw ca::Error(ca::ErrorCode::parse, "validation results must be a JSON object");
      if (j.contains("human_coder_count"))
        validation.human_coder_count = j.at("human_coder_count").get<std::size_t>();
      if (j.contains("intercoder")) validation.intercoder = j.at("intercoder");
      if (j.contains("metrics")) validation.metrics = j.at("metrics");
      if (j.contains("intracoder")) validation.intracoder = j.at("intracoder");
      validation_pointer = &validation;
    }
    const auto manifest = ca::report::build_manifest(
        run_dir, dataset == nullptr ? nullptr : &dataset->value,
        codebook == nullptr ? nullptr : &codebook->value,
        registry == nullptr ? nullptr : &registry->value,
        sample_strategy == nullptr ? "full" : sample_strategy,
        created == nullptr ? "" : created, validation_pointer);
    set_out(manifest_json, manifest.to_json());
    return CA_OK;
  });
}

ca_status ca_manifest_verify(const char* manifest_json, const char* run_dir,
                             const ca_dataset* dataset, const ca_codebook* codebook,
                             char** mismatches_json) {
  return guarded([&] {
    require_arg(run_dir, "run directory");
    const auto manifest =
        ca::report::manifest_from_json(parse_json(manifest_json, "manifest"));
    const auto mismatches = ca::report::verify_manifest(
        manifest, run_dir, dataset == nullptr ? nullptr : &dataset->value,
        codebook == nullptr ? nullptr : &codebook->value);
    set_out(mismatches_json, json(mismatches));
    return CA_OK;
  });
}

ca_status ca_report_render(const char* inputs_json, const char* format, char** report) {
  return guarded([&] {
    const json j = parse_json(inputs_json, "report inputs");
    if (!j.is_object())
      throw ca::Error(ca::ErrorCode::parse, "report inputs must be a JSON object");
    const std::string chosen = format == nullptr ? "text" : format;
    if (chosen != "text" && chosen != "json")
      throw ca::Error(ca::ErrorCode::invalid_argument,
                      "report format must be \"text\" or \"json\"");

    ca::report::ReportInputs inputs;
    if (j.contains("title")) inputs.title = j.at("title").get<std::string>();

    std::optional<ca::metrics::ReliabilityResult> reliability;
    if (j.contains("reliability")) {
      reliability = ca::metrics::reliability_from_json(j.at("reliability"));
      inputs.reliability = &*reliability;
    }
    std::optional<ca::sampling::GateResult> gate;
    if (j.contains("gate")) {
      gate = ca::sampling::gate_from_json(j.at("gate"));
      inputs.gate = &*gate;
    }
    std::optional<ca::metrics::ClassificationReport> classification;
    if (j.contains("classification")) {
      classification = ca::metrics::classification_from_json(j.at("classification"));
      inputs.classification = &*classification;
    }
    std::optional<ca::metrics::IntracoderResult> intracoder;
    if (j.contains("intracoder")) {
      intracoder = ca::metrics::intracoder_from_json(j.at("intracoder"));
      inputs.intracoder = &*intracoder;
    }
    std::optional<ca::sampling::SampleResult> sample;
    if (j.contains("sample")) {
      sample = ca::sampling::sample_result_from_json(j.at("sample"));
      inputs.sample = &*sample;
    }
    std::optional<ca::report::WorkloadSummary> workload;
    if (j.contains("workload")) {
      workload.emplace();
      workload->total = j.at("workload").at("total").get<std::size_t>();
      workload->routed = j.at("workload").at("routed").get<std::size_t>();
      inputs.workload = &*workload;
    }
    std::optional<ca::report::BenchmarkResult> benchmark;
    if (j.contains("benchmark")) {
      benchmark = ca::report::benchmark_from_json(j.at("benchmark"));
      inputs.benchmark = &*benchmark;
    }
    std::optional<ca::report::RunManifest> manifest;
    if (j.contains("manifest")) {
      manifest = ca::report::manifest_from_json(j.at("manifest"));
      inputs.manifest = &*manifest;
    }

    if (chosen == "text")
      set_out(report, ca::report::render_text_report(inputs));
    else
      set_out(report, ca::report::render_json_report(inputs));
    return CA_OK;
  });
}

}  // extern "C"
