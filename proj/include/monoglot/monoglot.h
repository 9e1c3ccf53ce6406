#ifndef MONOGLOT_MONOGLOT_H
#define MONOGLOT_MONOGLOT_H

/*
 * C interface to the monoglot toolkit.
 *
 * Every function returns an mg_status. On failure, mg_last_error() gives a
 * message for the calling thread until its next call into the library.
 * Strings returned through `char**` are NUL-terminated UTF-8 owned by the
 * caller and released with mg_string_free(). Reports are JSON objects.
 * Handles are opaque; bundle and classifier handles are immutable after
 * loading and may be shared between threads.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MG_API __declspec(dllexport)
#else
#define MG_API __attribute__((visibility("default")))
#endif

typedef enum mg_status {
  MG_OK = 0,
  MG_ERR_INVALID_ARGUMENT = 1,
  MG_ERR_DIMENSION = 2,
  MG_ERR_CONTRACT = 3,
  MG_ERR_NUMERIC = 4,
  MG_ERR_CONFIG = 5,
  MG_ERR_PARSE = 6,
  MG_ERR_IO = 7,
  MG_ERR_UNKNOWN_TAG = 8,
  MG_ERR_INTERNAL = 9
} mg_status;

typedef struct mg_config mg_config;
typedef struct mg_bundle mg_bundle;
typedef struct mg_classifier mg_classifier;

/* Receives progress lines (training logs, config echoes, warnings). */
typedef void (*mg_log_fn)(const char* line, void* user);

MG_API const char* mg_version(void);
MG_API const char* mg_status_name(mg_status status);
MG_API const char* mg_last_error(void);
MG_API void mg_string_free(char* s);
/* Process-wide; NULL disables logging. */
MG_API void mg_set_log(mg_log_fn fn, void* user);

/* Run configuration: flat `key = value` settings with validated defaults. */
MG_API mg_status mg_config_new(mg_config** out);
MG_API mg_status mg_config_load(const char* path, mg_config** out);
MG_API mg_status mg_config_set(mg_config* cfg, const char* key, const char* value);
MG_API mg_status mg_config_get(const mg_config* cfg, const char* key, char** value);
/* Effective configuration in the file format. */
MG_API mg_status mg_config_echo(const mg_config* cfg, char** text);
/* Parse warnings, one per line (empty when none). */
MG_API mg_status mg_config_warnings(const mg_config* cfg, char** text);
/* Recognized keys with defaults and descriptions, one per line. */
MG_API mg_status mg_config_keys(char** text);
MG_API void mg_config_free(mg_config* cfg);

/* Writes a toy-language corpus tree (see README) to out_dir. Uses `seed`. */
MG_API mg_status mg_toylang(const mg_config* cfg, int langs, size_t sentences, const char* out_dir, char** report);

/* Cleans, balances and encodes in_dir/{train,valid,test}.tsv into out_dir. */
MG_API mg_status mg_prepare(const mg_config* cfg, const char* in_dir, const char* out_dir, char** report);

/* Learns a subword model from tokenized words of a text file; writes
 * out_dir/subwords.bpe and out_dir/vocab.txt. */
MG_API mg_status mg_subwords_learn(const mg_config* cfg, const char* input_path, const char* lang, const char* out_dir,
                                   char** report);
/* Space-separated tokens to space-separated units, and back. */
MG_API mg_status mg_subwords_apply(const char* model_dir, const char* tokens, char** units);
MG_API mg_status mg_subwords_revert(const char* units, char** tokens);

/* Trains a truecaser on a text file (one sentence per line). */
MG_API mg_status mg_truecase_train(const char* input_path, const char* lang, const char* model_path, char** report);
/* Raw sentence to space-separated truecased tokens. */
MG_API mg_status mg_truecase_apply(const char* model_path, const char* lang, const char* sentence, char** tokens);
/* Space-separated truecased tokens to a detokenized sentence. */
MG_API mg_status mg_truecase_restore(const char* lang, const char* tokens, char** sentence);

/* Trains on a prepared directory, writing best.ckpt, last.ckpt, train.log
 * and the pipeline files into model_dir. With resume != 0, continues from
 * model_dir/last.ckpt. */
MG_API mg_status mg_train(const mg_config* cfg, const char* data_dir, const char* model_dir, int resume, char** report);

MG_API mg_status mg_bundle_load(const char* path, mg_bundle** out);
MG_API void mg_bundle_free(mg_bundle* bundle);
/* {"languages": [...], "styles": [...]} */
MG_API mg_status mg_bundle_tags(const mg_bundle* bundle, char** json);
/* Request {"text", "source_lang", "target_lang", "target_style", "beam"?,
 * "length_alpha"?} to {"output", "score", "tokens_in", "tokens_out"}.
 * Unknown tags fail with MG_ERR_UNKNOWN_TAG. */
MG_API mg_status mg_bundle_rewrite(const mg_bundle* bundle, const char* request_json, char** response_json);

/* Request {"metric": "bleu"|"gleu"|"m2", "hyp": path, "src": path,
 * "refs": [paths], "gold": path, "lang": tag}. BLEU needs hyp and refs,
 * GLEU hyp, src and refs, M2 hyp and gold. Files hold one sentence per line. */
MG_API mg_status mg_evaluate(const char* request_json, char** report);

/* Trains on a TSV `sentence<TAB>label` file and saves the classifier. */
MG_API mg_status mg_classifier_train(const mg_config* cfg, const char* data_path, const char* model_path, char** report);
MG_API mg_status mg_classifier_load(const char* path, mg_classifier** out);
MG_API void mg_classifier_free(mg_classifier* clf);
/* {"label", "probabilities": {label: p}} */
MG_API mg_status mg_classifier_predict(const mg_classifier* clf, const char* sentence, char** json);
/* Percentage of newline-separated sentences predicted as target_label. */
MG_API mg_status mg_classifier_transfer_rate(const mg_classifier* clf, const char* sentences, const char* target_label,
                                             double* rate);

#ifdef __cplusplus
}
#endif

#endif
