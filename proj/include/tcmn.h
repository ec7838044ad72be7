/* C API for the TCMN temporal moment localization library.
 *
 * All functions return a tcmn_status: TCMN_OK on success, otherwise an
 * error class mirroring the CLI exit codes. tcmn_last_error() returns a
 * thread-local description of the most recent failure. Strings returned
 * through char** out-parameters are heap-allocated; release them with
 * tcmn_string_free().
 */

#ifndef TCMN_H
#define TCMN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TCMN_API __declspec(dllexport)
#else
#define TCMN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tcmn_status {
  TCMN_OK = 0,
  TCMN_E_USAGE = 1,
  TCMN_E_DATA = 2,
  TCMN_E_NUMERIC = 3,
} tcmn_status;

/* Opaque handles. */
typedef struct tcmn_model tcmn_model;     /* a trained stream checkpoint */
typedef struct tcmn_dataset tcmn_dataset; /* one split of a manifest */

TCMN_API const char* tcmn_version(void);
TCMN_API const char* tcmn_last_error(void);
TCMN_API void tcmn_string_free(char* s);

/* Synthetic corpus generation: spec JSON in, dataset directory out. */
TCMN_API tcmn_status tcmn_generate_synth(const char* spec_json_path,
                                         const char* out_dir);

/* Trains one stream on the manifest's train split.
 * stream: "<main>,<context>" with each part "rgb" or "flow".
 * options_json (optional, may be NULL): {"hidden": n, "label_dim": n,
 *   "epochs": n, "seed": n, "lr": x, "weight_decay": x, "margin_main": x,
 *   "margin_context": x, "lambda": x}.
 * Writes model.tcmn, model.json, labels.tsv, loss_log.csv into out_dir. */
TCMN_API tcmn_status tcmn_train(const char* manifest_path, const char* stream,
                                const char* options_json, const char* out_dir);

/* Checkpoint and dataset handles. */
TCMN_API tcmn_status tcmn_model_open(const char* checkpoint_dir,
                                     tcmn_model** out);
TCMN_API void tcmn_model_close(tcmn_model* model);
TCMN_API tcmn_status tcmn_dataset_open(const char* manifest_path,
                                       const char* split, tcmn_dataset** out);
TCMN_API void tcmn_dataset_close(tcmn_dataset* dataset);

/* Scores every query of the dataset split; writes a "TCMNSCORE1" dump. */
TCMN_API tcmn_status tcmn_score(const tcmn_model* model,
                                const tcmn_dataset* dataset,
                                const char* out_path);

/* Grid-searches fusion weights on a validation split. score_paths holds
 * n_scores paths in stream order (RGB,RGB), (RGB,Flow), (Flow,RGB),
 * (Flow,Flow); step must divide 1. Writes the weights JSON. */
TCMN_API tcmn_status tcmn_fuse(const char* const* score_paths, int n_scores,
                               const char* val_manifest_path,
                               const char* split, double step,
                               const char* out_path);

/* Applies a weights JSON to four aligned score dumps. */
TCMN_API tcmn_status tcmn_apply_fusion(const char* const* score_paths,
                                       int n_scores, const char* weights_path,
                                       const char* out_path);

/* Evaluates a score dump against a split. Either out-parameter may be
 * NULL; on success the other receives the aligned-text table / JSON. */
TCMN_API tcmn_status tcmn_evaluate(const char* scores_path,
                                   const char* manifest_path,
                                   const char* split, int per_category,
                                   int with_frequency_prior,
                                   char** table_out, char** json_out);

/* Scores one bracketed query against one manifest video; JSON with the
 * top_k best (main, context) segment pairs. */
TCMN_API tcmn_status tcmn_predict(const tcmn_model* model,
                                  const char* manifest_path,
                                  const char* query_tree, const char* video,
                                  int top_k, char** json_out);

/* Node attentions, segment attentions, and top pairs for one annotated
 * query of the dataset split. */
TCMN_API tcmn_status tcmn_inspect_attention(const tcmn_model* model,
                                            const char* manifest_path,
                                            const char* split,
                                            int64_t query_id, char** json_out);

/* Finite-difference verification of the gradient stack. On success,
 * *max_rel_error_out holds the worst relative error and *report_out (if
 * not NULL) a per-section text report. Returns TCMN_E_NUMERIC when the
 * error is not below 1e-4. */
TCMN_API tcmn_status tcmn_grad_check(uint64_t seed, double* max_rel_error_out,
                                     char** report_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TCMN_H */
