/* C interface to the weight-fixing compression library.
 *
 * All functions return wfn_status; on failure wfn_last_error() holds a
 * human-readable message for the calling thread. Handles are opaque and
 * must be released with their matching _free function.
 */
#ifndef WFN_H
#define WFN_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define WFN_API __declspec(dllexport)
#else
#define WFN_API __attribute__((visibility("default")))
#endif

typedef enum wfn_status {
  WFN_OK = 0,
  WFN_ERR_CONFIG = 2,
  WFN_ERR_DATA = 3,
  WFN_ERR_PIPELINE = 4
} wfn_status;

typedef struct wfn_config wfn_config;

WFN_API const char* wfn_version(void);
WFN_API const char* wfn_last_error(void);

WFN_API wfn_config* wfn_config_new(void);
WFN_API void wfn_config_free(wfn_config* cfg);
WFN_API wfn_status wfn_config_load_file(wfn_config* cfg, const char* path);
WFN_API wfn_status wfn_config_apply_env(wfn_config* cfg);
WFN_API wfn_status wfn_config_set(wfn_config* cfg, const char* key,
                                  const char* value);
/* Returned string is owned by the library; free with wfn_string_free. */
WFN_API wfn_status wfn_config_help(char** out_text);

WFN_API wfn_status wfn_cmd_train_baseline(const wfn_config* cfg);
WFN_API wfn_status wfn_cmd_compress(const wfn_config* cfg);
WFN_API wfn_status wfn_cmd_analyze(const char* model_path,
                                   const char* baseline_path,
                                   const char* report_out);
WFN_API wfn_status wfn_cmd_gen_clusters(double delta, double delta0,
                                        double w_max, size_t omega,
                                        char** out_text);
WFN_API wfn_status wfn_cmd_noise_exp(const wfn_config* cfg);
WFN_API wfn_status wfn_cmd_prune_exp(const wfn_config* cfg);
WFN_API wfn_status wfn_cmd_delta_sweep(const wfn_config* cfg);

WFN_API void wfn_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* WFN_H */
