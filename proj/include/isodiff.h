/*
 * isodiff — isometric-regularizer diffusion toolkit, C API.
 *
 * The library is driven through an opaque configuration handle. Keys are
 * flat strings (see the README for the full schema); values set through
 * isodiff_config_set override values loaded from a config file, which in
 * turn override the built-in defaults.
 *
 * Every command returns an isodiff_status. The numeric values double as
 * process exit codes: 0 success, 2 configuration error, 3 divergence or
 * degenerate numerics, 4 I/O error or corruption.
 */

#ifndef ISODIFF_H
#define ISODIFF_H

#include <stddef.h>

#if defined(_WIN32)
#define ISODIFF_API __declspec(dllexport)
#else
#define ISODIFF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct isodiff_config isodiff_config;

typedef enum isodiff_status {
  ISODIFF_OK = 0,
  ISODIFF_ERR_CONFIG = 2,
  ISODIFF_ERR_DIVERGED = 3,
  ISODIFF_ERR_IO = 4,
  ISODIFF_ERR_INVALID = 5 /* null handle or API misuse; never a process exit code */
} isodiff_status;

ISODIFF_API isodiff_config* isodiff_config_new(void);
ISODIFF_API void isodiff_config_free(isodiff_config* cfg);

/* Plain-text key=value file; '#' starts a comment. */
ISODIFF_API isodiff_status isodiff_config_load(isodiff_config* cfg, const char* path);
ISODIFF_API isodiff_status isodiff_config_set(isodiff_config* cfg, const char* key,
                                              const char* value);
/* Returns the current value, or NULL for unknown keys. The pointer stays
 * valid until the next call on the same handle. */
ISODIFF_API const char* isodiff_config_get(isodiff_config* cfg, const char* key);

/* Commands. Outputs are written under the configured out_dir. */
ISODIFF_API isodiff_status isodiff_cmd_train(const isodiff_config* cfg);
ISODIFF_API isodiff_status isodiff_cmd_metrics(const isodiff_config* cfg);
ISODIFF_API isodiff_status isodiff_cmd_interpolate(const isodiff_config* cfg);
ISODIFF_API isodiff_status isodiff_cmd_invert(const isodiff_config* cfg);
ISODIFF_API isodiff_status isodiff_cmd_toy_s2(const isodiff_config* cfg);
ISODIFF_API isodiff_status isodiff_cmd_trace_study(const isodiff_config* cfg);
ISODIFF_API isodiff_status isodiff_cmd_sweep(const isodiff_config* cfg);

/* Message for the most recent failure on this thread ("" when none). */
ISODIFF_API const char* isodiff_last_error(void);

ISODIFF_API const char* isodiff_version(void);

#ifdef __cplusplus
}
#endif

#endif /* ISODIFF_H */
