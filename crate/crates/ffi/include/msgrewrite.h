#ifndef MSGREWRITE_H
#define MSGREWRITE_H

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

typedef enum MrStatus {
  MR_STATUS_OK = 0,
  MR_STATUS_INVALID_ARGUMENT = 1,
  MR_STATUS_DEGENERATE_INPUT = 2,
  MR_STATUS_BACKEND_UNAVAILABLE = 3,
  MR_STATUS_BACKEND_REJECTED = 4,
  MR_STATUS_PROTOCOL = 5,
  MR_STATUS_SCORER_UNAVAILABLE = 6,
  MR_STATUS_VALIDATION = 7,
  MR_STATUS_CLASSIFICATION = 8,
  MR_STATUS_INFEASIBLE_BUDGET = 9,
  MR_STATUS_TEMPLATE = 10,
  MR_STATUS_CONFIG = 11,
  MR_STATUS_IO = 12,
  MR_STATUS_NULL_POINTER = 13,
  MR_STATUS_INVALID_UTF8 = 14,
  MR_STATUS_PANIC = 15,
} MrStatus;

typedef enum MrTask {
  MR_TASK_FORMALIZE = 0,
  MR_TASK_SHORTEN = 1,
  MR_TASK_ELABORATE = 2,
  MR_TASK_PARAPHRASE = 3,
  MR_TASK_PROOFREAD = 4,
} MrTask;

typedef enum MrOrigin {
  MR_ORIGIN_ON_DEVICE = 0,
  MR_ORIGIN_SERVER = 1,
} MrOrigin;

typedef enum MrScoreKey {
  MR_SCORE_KEY_SUFFIX = 0,
  MR_SCORE_KEY_LM = 1,
} MrScoreKey;

typedef enum MrVerdict {
  MR_VERDICT_GOOD = 0,
  MR_VERDICT_BAD = 1,
  MR_VERDICT_UNPARSEABLE = 2,
} MrVerdict;

// Opaque model backend.
typedef struct MrBackend MrBackend;

// Opaque parsed cascade log.
typedef struct MrCascadeLog MrCascadeLog;

typedef struct MrRewardWeights {
  double sigma_nli;
  double sigma_rnli;
  double sigma_length;
  double sigma_edit;
  double sigma_ngram;
} MrRewardWeights;

typedef struct MrRewardBreakdown {
  double nli;
  double rnli;
  double length_ratio;
  double edit_ratio;
  double ngram_reward;
  struct MrRewardWeights weights;
  double total;
} MrRewardBreakdown;

typedef struct MrCascadeConfig {
  double gamma;
  size_t num_samples;
  double temperature;
  size_t max_tokens;
} MrCascadeConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy of the calling thread's last error message, or NULL when the last
// call succeeded. Free with `mr_string_free`.
char *mr_last_error(void);

// # Safety
// `s` must be NULL or a string returned by this library, not yet freed.
void mr_string_free(char *s);

// Token-level Levenshtein distance between two whitespace-tokenized texts.
//
// # Safety
// String arguments must be NUL-terminated; `out` must be writable.
enum MrStatus mr_edit_distance(const char *source, const char *prediction, size_t *out_distance);

// # Safety
// See [`mr_edit_distance`].
enum MrStatus mr_edit_ratio(const char *source, const char *prediction, double *out_ratio);

// # Safety
// See [`mr_edit_distance`].
enum MrStatus mr_length_ratio(const char *source, const char *prediction, double *out_ratio);

// # Safety
// `references` must point to `num_references` NUL-terminated strings.
enum MrStatus mr_sari(const char *source,
                      const char *prediction,
                      const char *const *references,
                      size_t num_references,
                      double *out_score);

// Sentence BLEU of `prediction` against the references.
//
// # Safety
// See [`mr_sari`].
enum MrStatus mr_bleu(const char *prediction,
                      const char *const *references,
                      size_t num_references,
                      double *out_score);

// # Safety
// See [`mr_sari`].
enum MrStatus mr_update_rouge(const char *source,
                              const char *prediction,
                              const char *const *references,
                              size_t num_references,
                              double *out_score);

// Loop penalty: `-penalty` if any n-gram order reaches its threshold.
// With `num_orders == 0` the default thresholds and penalty are used.
//
// # Safety
// `orders` and `thresholds` must each hold `num_orders` values.
enum MrStatus mr_loop_reward(const char *text,
                             const size_t *orders,
                             const size_t *thresholds,
                             size_t num_orders,
                             double penalty,
                             double *out_reward);

// # Safety
// `out_weights` must be writable.
enum MrStatus mr_default_weights(enum MrTask task, struct MrRewardWeights *out_weights);

// Heuristic reward with the built-in overlap entailment stand-in and the
// default loop penalty. `weights` may be NULL for the task defaults.
//
// # Safety
// String arguments must be NUL-terminated; `weights` NULL or readable.
enum MrStatus mr_reward(enum MrTask task,
                        const char *source,
                        const char *prediction,
                        const struct MrRewardWeights *weights,
                        struct MrRewardBreakdown *out_breakdown);

// Scripted backend from a JSON mock script.
//
// # Safety
// `script_json` must be NUL-terminated; `out_backend` writable.
enum MrStatus mr_backend_mock_new(const char *script_json, struct MrBackend **out_backend);

// HTTP backend. `auth_token` may be NULL; `timeout_ms == 0` keeps the
// default timeout.
//
// # Safety
// `endpoint` must be NUL-terminated; `out_backend` writable.
enum MrStatus mr_backend_remote_new(const char *endpoint,
                                    const char *auth_token,
                                    uint64_t timeout_ms,
                                    struct MrBackend **out_backend);

// # Safety
// `backend` must be NULL or a live handle from `mr_backend_*_new`.
void mr_backend_free(struct MrBackend *backend);

// Normalized self-critique suffix score of `response` to `prompt`.
//
// # Safety
// `backend` must be a live handle; strings NUL-terminated.
enum MrStatus mr_suffix_score(const struct MrBackend *backend,
                              const char *prompt,
                              const char *response,
                              double *out_score);

// # Safety
// `out_config` must be writable.
enum MrStatus mr_cascade_config_default(struct MrCascadeConfig *out_config);

// Routes one prompt through the cascade. The chosen text is written to
// `out_text` (free with `mr_string_free`).
//
// # Safety
// Handles must be live; `config` readable; out pointers writable.
enum MrStatus mr_route(const struct MrBackend *on_device,
                       const struct MrBackend *server,
                       const char *prompt,
                       const struct MrCascadeConfig *config,
                       char **out_text,
                       enum MrOrigin *out_origin,
                       double *out_score);

// Parses a JSONL cascade log.
//
// # Safety
// `jsonl` must be NUL-terminated; `out_log` writable.
enum MrStatus mr_cascade_log_parse(const char *jsonl, struct MrCascadeLog **out_log);

// Number of records in the log, 0 for NULL.
//
// # Safety
// `log` must be NULL or a live handle.
size_t mr_cascade_log_len(const struct MrCascadeLog *log);

// # Safety
// `log` must be NULL or a live handle from `mr_cascade_log_parse`.
void mr_cascade_log_free(struct MrCascadeLog *log);

// Replays the log at each of `num_gammas` thresholds, filling the two
// caller-allocated arrays of the same length.
//
// # Safety
// `gammas`, `out_on_device_ratio` and `out_success_rate` must each hold
// `num_gammas` values.
enum MrStatus mr_sweep(const struct MrCascadeLog *log,
                       const double *gammas,
                       size_t num_gammas,
                       enum MrScoreKey key,
                       double *out_on_device_ratio,
                       double *out_success_rate);

// Largest threshold whose on-device ratio still meets `target`.
//
// # Safety
// `log` must be a live handle; `out_gamma` writable.
enum MrStatus mr_pick_gamma(const struct MrCascadeLog *log,
                            double target,
                            enum MrScoreKey key,
                            double *out_gamma);

// Critique prompt for one (instruction, source, response). Free the result
// with `mr_string_free`.
//
// # Safety
// Strings must be NUL-terminated; `out_prompt` writable.
enum MrStatus mr_critique_prompt(const char *instruction,
                                 const char *source,
                                 const char *response,
                                 char **out_prompt);

// # Safety
// `judge_output` must be NUL-terminated; `out_verdict` writable.
enum MrStatus mr_parse_verdict(const char *judge_output, enum MrVerdict *out_verdict);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MSGREWRITE_H */
