#ifndef HIDESEEK_HIDESEEK_H
#define HIDESEEK_HIDESEEK_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define HS_API __declspec(dllexport)
#else
#define HS_API __attribute__((visibility("default")))
#endif

/* Status codes. Every fallible call returns one; the message of the most
   recent failure on the calling thread is available from hs_last_error(). */
typedef enum hs_status {
  HS_OK = 0,
  HS_INVALID_ARGUMENT = 1,
  HS_INVALID_SCENARIO = 2,
  HS_IO_ERROR = 3,
  HS_FORMAT_VERSION_MISMATCH = 4,
  HS_NO_PATH = 5,
  HS_SHAPE_MISMATCH = 6,
  HS_NON_FINITE_VALUE = 7,
  HS_EMPTY_DATASET = 8,
  HS_MALFORMED_OBSERVATION = 9,
  HS_PLAN_TOO_SHORT = 10,
  HS_NO_VALID_GOAL = 11,
  HS_EMPTY_BANK = 12,
  HS_SESSION_ACTIVE = 13,
  HS_BIND_ERROR = 14,
  HS_LATTICE_MISMATCH = 15,
  HS_DOMAIN_ERROR = 16,
  HS_NO_CACHED_FORWARD = 17,
  HS_NON_SQUARE_RASTER = 18,
  HS_SINGLE_CLASS_DATASET = 19,
  HS_INTERNAL = 99
} hs_status;

HS_API const char* hs_version(void);
HS_API const char* hs_status_name(hs_status status);
/* Thread-local; valid until the next failing call on the same thread. */
HS_API const char* hs_last_error(void);

/* Strings returned through char** out-parameters are owned by the caller. */
HS_API void hs_string_free(char* s);

/* Per-epoch progress: one JSON object per call. */
typedef void (*hs_progress_fn)(const char* json_line, void* user);

/* ---- Simulator ---------------------------------------------------------- */

typedef struct hs_simulator hs_simulator;

/* NULL path loads the built-in default scenario. */
HS_API hs_status hs_simulator_load(const char* scenario_path, hs_simulator** out);
HS_API hs_status hs_simulator_from_json(const char* scenario_json, hs_simulator** out);
HS_API void hs_simulator_free(hs_simulator* sim);
/* Canonical scenario JSON and its SHA-256 hash. */
HS_API hs_status hs_simulator_scenario_json(const hs_simulator* sim, char** out_json);
HS_API hs_status hs_simulator_hash(const hs_simulator* sim, char** out_hex);

/* Runs one episode and writes it as JSON. steps < 0 keeps the scenario's
   max_steps. policy is "random", "scripted" or "human" (needs bank_path). */
HS_API hs_status hs_simulate(const hs_simulator* sim, uint64_t seed, int steps, const char* policy,
                             const char* bank_path, const char* out_path, char** out_summary_json);

/* ---- Data --------------------------------------------------------------- */

/* options_json: {"episodes", "policy", "seed", "jobs", "stride", "latch",
   "bank"}; missing keys take defaults. */
HS_API hs_status hs_collect(const hs_simulator* sim, const char* options_json, const char* out_dir,
                            char** out_summary_json);

/* Appends the hider primitives of each episode JSON file to the bank. */
HS_API hs_status hs_export_bank(const char* const* episode_paths, size_t count, const char* bank_path,
                                int* out_written);

/* ---- Models ------------------------------------------------------------- */

/* config_json overrides the training defaults (epochs, batch, micro_batch,
   lr, milestones, decay, seed, width, augment, keep_best, max_steps). */
HS_API hs_status hs_train_vpt(const char* data_dir, const char* config_json, const char* out_model,
                              hs_progress_fn progress, void* user, char** out_summary_json);
/* vpt_model may be NULL: the classifier then learns from true seeker views. */
HS_API hs_status hs_train_vpn(const char* data_dir, const char* vpt_model, const char* config_json,
                              const char* out_model, hs_progress_fn progress, void* user, char** out_summary_json);
HS_API hs_status hs_predict(const char* vpt_model, const char* record_path, const char* out_png,
                            char** out_summary_json);
HS_API hs_status hs_model_info(const char* model_path, char** out_json);

/* ---- Planning ----------------------------------------------------------- */

/* Value map for the episode start of `seed`. NULL model paths fall back to
   the simulator oracles. options_json: {"horizon", "interval", "side"}.
   out_json / out_png may be NULL. */
HS_API hs_status hs_plan(const hs_simulator* sim, uint64_t seed, const char* vpt_model, const char* vpn_model,
                         const char* options_json, const char* out_json, const char* out_png,
                         char** out_summary_json);

/* mode "ranking" or "horizon": {"scenarios", "seed", "horizons", "interval"};
   mode "vpn-accuracy": {"data", "split"} with vpn_model required. */
HS_API hs_status hs_evaluate(const hs_simulator* sim, const char* mode, const char* vpt_model,
                             const char* vpn_model, const char* options_json, char** out_result_json);

/* ---- Session service ---------------------------------------------------- */

typedef struct hs_server hs_server;

/* NULL bind_addr uses HIDESEEK_BIND or 127.0.0.1:8765. options_json:
   {"bank", "auto_step_ms", "mode": "hider"|"spectate"}. */
HS_API hs_status hs_server_start(const hs_simulator* sim, const char* bind_addr, const char* options_json,
                                 hs_server** out);
HS_API int hs_server_port(const hs_server* server);
/* Blocks until hs_server_stop is called from another thread. */
HS_API void hs_server_wait(hs_server* server);
HS_API void hs_server_stop(hs_server* server);
HS_API void hs_server_free(hs_server* server);

#ifdef __cplusplus
}
#endif

#endif
