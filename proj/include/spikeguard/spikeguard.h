#ifndef SPIKEGUARD_H
#define SPIKEGUARD_H

#include <stddef.h>
#include <stdint.h>

#if defined(__GNUC__)
#define SPKGRD_API __attribute__((visibility("default")))
#else
#define SPKGRD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spkgrd_status {
  SPKGRD_OK = 0,
  SPKGRD_INVALID_ARGUMENT = 1,
  SPKGRD_SHAPE_MISMATCH = 2,
  SPKGRD_FORMAT = 3,
  SPKGRD_IO = 4,
  SPKGRD_NUMERIC = 5,
  SPKGRD_LENGTH = 6,
  SPKGRD_INTERNAL = 99
} spkgrd_status;

typedef struct spkgrd_config spkgrd_config;
typedef struct spkgrd_model spkgrd_model;

/* Message of the last failed call on this thread ("" after a success). */
SPKGRD_API const char* spkgrd_last_error(void);
SPKGRD_API const char* spkgrd_version(void);

/* Strings returned through char** out parameters are owned by the caller. */
SPKGRD_API void spkgrd_string_free(char* s);

SPKGRD_API spkgrd_status spkgrd_config_default(spkgrd_config** out);
SPKGRD_API spkgrd_status spkgrd_config_load(const char* path, spkgrd_config** out);
/* Dotted key ("train.eta"); the value is parsed as JSON, else kept as a string. */
SPKGRD_API spkgrd_status spkgrd_config_set(spkgrd_config* cfg, const char* key, const char* value);
/* Validates and returns the fully resolved configuration. */
SPKGRD_API spkgrd_status spkgrd_config_json(const spkgrd_config* cfg, char** json_out);
SPKGRD_API void spkgrd_config_free(spkgrd_config* cfg);

/* Every run entry point validates the config and returns a JSON report.
   An empty or NULL checkpoint path means "<out_dir>/checkpoint.bin". */
SPKGRD_API spkgrd_status spkgrd_train(const spkgrd_config* cfg, const char* checkpoint_path, char** json_out);
SPKGRD_API spkgrd_status spkgrd_evaluate(const spkgrd_config* cfg, const char* checkpoint_path, char** json_out);
SPKGRD_API spkgrd_status spkgrd_attack(const spkgrd_config* cfg, const char* checkpoint_path, char** json_out);
/* what: theorem1 | theorem2 | gradients | obfuscation. A non-zero
   erf_offset shifts the error function used by the gradients check. The
   report's "pass" field carries the verdict; the status only reports errors. */
SPKGRD_API spkgrd_status spkgrd_verify(const spkgrd_config* cfg, const char* what, const char* checkpoint_path,
                            double erf_offset, char** json_out);
/* substitute_path may be NULL, in which case a substitute is trained. */
SPKGRD_API spkgrd_status spkgrd_checklist(const spkgrd_config* cfg, const char* checkpoint_path, const char* substitute_path,
                               char** json_out);
SPKGRD_API spkgrd_status spkgrd_sweep_eta(const spkgrd_config* cfg, char** json_out);

SPKGRD_API spkgrd_status spkgrd_model_load(const char* checkpoint_path, spkgrd_model** out);
SPKGRD_API size_t spkgrd_model_input_size(const spkgrd_model* m);
SPKGRD_API size_t spkgrd_model_classes(const spkgrd_model* m);
/* x holds n rows of input_size values in [0, 1]; labels receives n classes. */
SPKGRD_API spkgrd_status spkgrd_model_predict(const spkgrd_model* m, const double* x, size_t n, uint64_t seed, int* labels);
SPKGRD_API void spkgrd_model_free(spkgrd_model* m);

#ifdef __cplusplus
}
#endif

#endif
