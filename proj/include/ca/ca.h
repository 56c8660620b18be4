#ifndef CA_CA_H
#define CA_CA_H

/* C interface to the content-analysis core library.
 *
 * Conventions:
 *   - Every fallible function returns ca_status; CA_OK means success.
 *   - On failure, ca_last_error() returns a thread-local message that
 *     stays valid until the next library call on the same thread.
 *   - Output strings (char**) are heap-allocated UTF-8; release them
 *     with ca_string_free. Structured results are JSON documents.
 *   - Opaque handles own their object; release with the matching
 *     *_free function. NULL is always safe to free.
 *   - API keys are read from CA_<PROVIDER>_KEY environment variables
 *     only; no function accepts a credential argument.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ca_status {
  CA_OK = 0,
  CA_ERR_INVALID_ARGUMENT = 1,
  CA_ERR_PARSE = 2,
  CA_ERR_VALIDATION = 3,
  CA_ERR_IO = 4,
  CA_ERR_TRANSPORT = 5,
  CA_ERR_CREDENTIALS = 6,
  CA_ERR_STATE = 7,
  CA_ERR_UNSUPPORTED = 8,
  CA_ERR_INTERNAL = 9
} ca_status;

typedef struct ca_codebook ca_codebook;
typedef struct ca_dataset ca_dataset;
typedef struct ca_annotations ca_annotations;
typedef struct ca_matrix ca_matrix;
typedef struct ca_template ca_template;
typedef struct ca_registry ca_registry;

/* ---- library ---- */

const char* ca_version(void);
const char* ca_status_name(ca_status status);
const char* ca_last_error(void);
void ca_string_free(char* text);

/* ---- codebook ---- */

ca_status ca_codebook_load(const char* path, ca_codebook** out);
ca_status ca_codebook_parse(const char* json_text, ca_codebook** out);
void ca_codebook_free(ca_codebook* codebook);
/* {"findings": [{severity, code, message, where}...], "errors": n, "warnings": n} */
ca_status ca_codebook_validate(const ca_codebook* codebook, char** findings_json);
ca_status ca_codebook_hash(const ca_codebook* codebook, char** hex);
/* {"version": ..., "variables": [{name, scale, categories: n}...]} */
ca_status ca_codebook_info(const ca_codebook* codebook, char** info_json);

/* ---- dataset ---- */

ca_status ca_dataset_load(const char* path, ca_dataset** out);
ca_status ca_dataset_parse(const char* jsonl_text, ca_dataset** out);
void ca_dataset_free(ca_dataset* dataset);
ca_status ca_dataset_write(const ca_dataset* dataset, const char* path);
/* {"units": n, "fingerprint": hex, "max_word_count": n, "warnings": [...]} */
ca_status ca_dataset_info(const ca_dataset* dataset, char** info_json);

/* ---- annotations ---- */

ca_status ca_annotations_load(const char* path, ca_annotations** out);
ca_status ca_annotations_parse(const char* csv_text, ca_annotations** out);
void ca_annotations_free(ca_annotations* annotations);
ca_status ca_annotations_save(const ca_annotations* annotations, const char* path);
ca_status ca_annotations_concat(const ca_annotations* first, const ca_annotations* second,
                                ca_annotations** out);
/* {"rows": n, "units": n, "coders": [{id, run_id}...], "variables": [...]} */
ca_status ca_annotations_info(const ca_annotations* annotations, char** info_json);

/* coders_json / units_json: JSON string arrays, or NULL for all observed. */
ca_status ca_matrix_build(const ca_annotations* annotations, const ca_codebook* codebook,
                          const char* variable, const char* coders_json,
                          const char* units_json, ca_matrix** out);
void ca_matrix_free(ca_matrix* matrix);
/* {"variable": ..., "coders": [...], "units": [...]} */
ca_status ca_matrix_info(const ca_matrix* matrix, char** info_json);

/* ---- reliability & validity ---- */

/* scale: "nominal" | "ordinal" | "interval" | "ratio" | NULL for the
 * variable's declared scale. rank_order_json: JSON number array fixing
 * the ordinal rank order, or NULL for ascending values. */
ca_status ca_krippendorff_alpha(const ca_matrix* matrix, const char* scale,
                                const char* rank_order_json, char** result_json);
/* Gate a reliability result (as produced above) against the alpha bands. */
ca_status ca_gate(const char* reliability_json, char** gate_json);
/* Predictions come from `coder`'s column (NULL allowed when the matrix
 * has exactly one coder); gold_json is a gold-standard document. */
ca_status ca_classification(const ca_matrix* matrix, const char* coder,
                            const char* gold_json, char** report_json);
/* Repeated-run consistency: each distinct (coder, run_id) pair in the
 * annotations is one run; all runs must cover the same units. */
ca_status ca_intracoder(const ca_annotations* annotations, const ca_codebook* codebook,
                        const char* variable, char** result_json);

/* ---- sampling & gold standard ---- */

/* config_json (all fields optional): {"initial_fraction", "step",
 * "floor", "minority_minimum", "heuristic_cap", "seed"}.
 * labels_json: {"unit_id": code, ...} provisional labels, or NULL. */
ca_status ca_sample_draw(const ca_dataset* dataset, const char* config_json,
                         const char* labels_json, char** sample_json);
ca_status ca_sample_fixed(const ca_dataset* dataset, size_t n, uint64_t seed,
                          char** sample_json);
ca_status ca_sample_heuristic(size_t population, char** size_json);
ca_status ca_sample_rich_range(const ca_dataset* dataset, const ca_codebook* codebook,
                               const char* variable, const char* labels_json,
                               size_t per_category_minimum, uint64_t seed,
                               char** sample_json);

ca_status ca_gold_majority(const ca_matrix* matrix, char** gold_json);
/* resolutions_json: {"unit_id": code, ...} discussion outcomes. */
ca_status ca_gold_consensus(const ca_matrix* matrix, const char* resolutions_json,
                            char** gold_json);
ca_status ca_gold_agreement_only(const ca_matrix* matrix, char** gold_json);

/* ---- prompts ---- */

ca_status ca_template_load(const char* path, ca_template** out);
ca_status ca_template_parse(const char* json_text, ca_template** out);
void ca_template_free(ca_template* tmpl);
ca_status ca_template_json(const ca_template* tmpl, char** json_text);
/* examples_json: [{"text", "code", "rationale"}...] or NULL.
 * Result: {"template", "system", "user", "content_hash"}. */
ca_status ca_render_prompt(const ca_template* tmpl, const ca_codebook* codebook,
                           const char* variable, const ca_dataset* dataset,
                           const char* unit_id, const char* examples_json,
                           char** rendered_json);
/* The five standard templates (zero/one/few-shot, zero/few-shot CoT). */
ca_status ca_prompt_variants(size_t few_shot_k, int ask_justification, char** variants_json);
/* {"ok": bool, "code"?: number, "confidence"?: number, "reason"?: text} */
ca_status ca_parse_response(const ca_template* tmpl, const ca_codebook* codebook,
                            const char* variable, const char* response_text,
                            char** parsed_json);

/* ---- models & screening ---- */

ca_status ca_registry_load(const char* path, ca_registry** out);
ca_status ca_registry_parse(const char* json_text, ca_registry** out);
void ca_registry_free(ca_registry* registry);
ca_status ca_registry_json(const ca_registry* registry, char** json_text);
/* requirements_json (all optional): {"min_context_tokens",
 * "require_open_weights", "max_price_per_mtok", "max_vram_gb",
 * "quantization": "none"|"four_bit"}. */
ca_status ca_screen_model(const ca_registry* registry, const char* model,
                          const char* requirements_json, char** result_json);
ca_status ca_credential_env(const char* provider, char** env_name);

ca_status ca_estimate_tokens(uint64_t word_count, uint64_t* tokens);
ca_status ca_estimate_tokens_for_text(const char* text, uint64_t* tokens);
ca_status ca_estimate_cost(uint64_t tokens, double price_per_mtok, double* usd);
ca_status ca_estimate_vram(double size_billion, const char* quantization, double* gb);
ca_status ca_project_runtime(double per_item_seconds, uint64_t item_count, double* seconds);

/* ---- annotation runs ---- */

/* A complete run-config document with default values, for callers to
 * fill in model/variable/prompt before ca_run. */
ca_status ca_run_defaults(char** config_json);
/* Executes a run into run_dir (config.json, exchanges.jsonl,
 * annotations.csv, summary.json); returns the summary. */
ca_status ca_run(const char* run_dir, const char* config_json, const ca_registry* registry,
                 const ca_dataset* dataset, const ca_codebook* codebook,
                 char** summary_json);
ca_status ca_run_resume(const char* run_dir, const ca_registry* registry,
                        const ca_dataset* dataset, const ca_codebook* codebook,
                        char** summary_json);
/* 1 when run_dir holds an interrupted run, else 0. */
int ca_run_can_resume(const char* run_dir);

/* ---- hybrid routing ---- */

/* Routes one machine coder's annotations by confidence. Writes the
 * review queue to queue_csv_path (unless NULL); accepted_out (unless
 * NULL) receives the auto-retained annotations. */
ca_status ca_hybrid_route_confidence(const ca_annotations* annotations,
                                     const ca_dataset* dataset, const ca_codebook* codebook,
                                     const char* variable, double confidence_threshold,
                                     const char* queue_csv_path,
                                     ca_annotations** accepted_out, char** summary_json);
/* Routes a multi-coder matrix by divergence. */
ca_status ca_hybrid_route_divergence(const ca_matrix* matrix, const ca_dataset* dataset,
                                     const char* queue_csv_path,
                                     ca_annotations** accepted_out, char** summary_json);
/* Validates filled-in resolutions row by row; invalid rows stay pending
 * and are listed in the report. */
ca_status ca_hybrid_import(const char* queue_csv_path, const ca_codebook* codebook,
                           const char* variable, ca_annotations** resolved_out,
                           char** report_json);
/* Judge codes settle queued items only when they match a candidate;
 * the rest is written back to remaining_csv_path (unless NULL). */
ca_status ca_hybrid_judge(const char* queue_csv_path, const ca_annotations* judge_codes,
                          const ca_codebook* codebook, const char* variable,
                          const char* remaining_csv_path, ca_annotations** resolved_out,
                          char** summary_json);

/* ---- benchmark, manifest, report ---- */

/* plan_json: {"models": [...], "requirements": {...}, "base_config":
 * {...}, "intracoder_repetitions"?: n, "max_candidates"?: n,
 * "work_dir": path}. gold_json as produced by the gold functions. */
ca_status ca_benchmark(const char* plan_json, const ca_registry* registry,
                       const ca_dataset* dataset, const ca_codebook* codebook,
                       const char* variable, const char* gold_json, char** result_json);

/* validation_json: {"human_coder_count": n, "intercoder": {...},
 * "metrics": {...}, "intracoder": {...}} — the reliability,
 * classification and repeated-run documents produced by this library.
 * Absent validation results or model provenance fail with an error
 * naming every missing field. */
ca_status ca_manifest_build(const char* run_dir, const ca_dataset* dataset,
                            const ca_codebook* codebook, const ca_registry* registry,
                            const char* sample_strategy, const char* created,
                            const char* validation_json, char** manifest_json);
/* mismatches_json: JSON string array; empty array means the run verifies. */
ca_status ca_manifest_verify(const char* manifest_json, const char* run_dir,
                             const ca_dataset* dataset, const ca_codebook* codebook,
                             char** mismatches_json);

/* inputs_json: {"title"?: text, "reliability"?: {...}, "gate"?: {...},
 * "classification"?: {...}, "intracoder"?: {...}, "sample"?: {...},
 * "workload"?: {"total", "routed"}, "benchmark"?: {...},
 * "manifest"?: {...}} — every section as emitted by this library.
 * format: "text" | "json". */
ca_status ca_report_render(const char* inputs_json, const char* format, char** report);

#ifdef __cplusplus
}
#endif

#endif /* CA_CA_H */
