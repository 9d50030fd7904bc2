/* C interface to the reach-avoid control library.
 *
 * Every function returns ra_status; RA_OK is 0. On failure the thread-local
 * message from ra_last_error() describes the problem and output parameters
 * are left untouched. Handles are created by ra_*_create/_load and must be
 * released with the matching ra_*_destroy (destroy accepts NULL).
 */
#ifndef REACHAVOID_H
#define REACHAVOID_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RA_API __declspec(dllexport)
#else
#define RA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
    RA_OK = 0,
    RA_ERR_SHAPE = 1,   /* mismatched dimensions */
    RA_ERR_STATE = 2,   /* call out of order */
    RA_ERR_DOMAIN = 3,  /* argument outside its domain */
    RA_ERR_NUMERIC = 4, /* non-finite values or divergence */
    RA_ERR_IO = 5,      /* file read/write/format failure */
    RA_ERR_CONFIG = 6,  /* invalid configuration */
    RA_ERR_NULL = 7,    /* required pointer was NULL */
    RA_ERR_UNKNOWN = 8
};
typedef int ra_status;

#define RA_NUM_JOINTS 7

/* Observation vector lengths: with the obstacle branch (20) and without (17). */
#define RA_OBS_WITH_OBSTACLE 20
#define RA_OBS_REACH_ONLY 17

/* Reward composition selector for ra_env_step. */
enum {
    RA_REWARD_MONOLITHIC = 0,
    RA_REWARD_HYBRID_AVOID = 1,
    RA_REWARD_HYBRID_REACH = 2
};

/* Episode outcome. */
enum {
    RA_OUTCOME_RUNNING = 0,
    RA_OUTCOME_COLLISION = 1,
    RA_OUTCOME_SUCCESS = 2,
    RA_OUTCOME_TIMEOUT = 3
};

/* Controller bundle kinds. */
enum { RA_CONTROLLER_MONOLITHIC = 0, RA_CONTROLLER_HYBRID = 1 };

/* ra_control_decision.halt_cause / .active_policy values. */
enum { RA_HALT_NONE = 0, RA_HALT_COLLISION = 1, RA_HALT_GOAL = 2 };
enum { RA_POLICY_NONE = 0, RA_POLICY_AVOID = 1, RA_POLICY_REACH = 2 };

typedef struct ra_env_config ra_env_config;
typedef struct ra_ddpg_config ra_ddpg_config;
typedef struct ra_env ra_env;
typedef struct ra_agent ra_agent;
typedef struct ra_controller ra_controller;

typedef struct ra_control_decision {
    int halt;          /* nonzero: stop the arm now; action is zeroed */
    int halt_cause;    /* RA_HALT_* */
    int active_policy; /* RA_POLICY_* (monolithic controllers report NONE) */
    double action[RA_NUM_JOINTS]; /* joint velocity command */
} ra_control_decision;

/* Message for the most recent failing call on this thread ("" if none). */
RA_API const char* ra_last_error(void);
RA_API const char* ra_version(void);

/* --- configuration handles (keys match the key=value config files) --- */

RA_API ra_status ra_env_config_create(ra_env_config** out);
RA_API ra_status ra_env_config_load(const char* path, ra_env_config** out);
RA_API ra_status ra_env_config_save(const ra_env_config* cfg,
                                    const char* path);
RA_API ra_status ra_env_config_set(ra_env_config* cfg, const char* key,
                                   const char* value);
/* Writes the value string (NUL-terminated) into buf; fails with
 * RA_ERR_SHAPE if buf_len is too small. needed (optional) receives the
 * required buffer length including the NUL; a NULL buf with non-NULL
 * needed is a pure size query. */
RA_API ra_status ra_env_config_get(const ra_env_config* cfg, const char* key,
                                   char* buf, size_t buf_len, size_t* needed);
RA_API void ra_env_config_destroy(ra_env_config* cfg);

RA_API ra_status ra_ddpg_config_create(ra_ddpg_config** out);
RA_API ra_status ra_ddpg_config_load(const char* path, ra_ddpg_config** out);
RA_API ra_status ra_ddpg_config_save(const ra_ddpg_config* cfg,
                                     const char* path);
RA_API ra_status ra_ddpg_config_set(ra_ddpg_config* cfg, const char* key,
                                    const char* value);
RA_API ra_status ra_ddpg_config_get(const ra_ddpg_config* cfg,
                                    const char* key, char* buf,
                                    size_t buf_len, size_t* needed);
RA_API void ra_ddpg_config_destroy(ra_ddpg_config* cfg);

/* --- simulator --- */

RA_API ra_status ra_env_create(const ra_env_config* cfg, ra_env** out);
/* Random obstacle trajectory and random target drawn from the seed. */
RA_API ra_status ra_env_reset(ra_env* env, uint64_t seed);
/* Fixed scenario path (id 1..5) at the given obstacle speed (m/s), target
 * at the scenario's fixed point. */
RA_API ra_status ra_env_reset_scenario(ra_env* env, int scenario_id,
                                       double speed, uint64_t seed);
/* with_obstacle nonzero -> 20 values, else 17. */
RA_API ra_status ra_env_observe(const ra_env* env, int with_obstacle,
                                double* values, size_t values_len);
RA_API ra_status ra_env_step(ra_env* env, const double* action,
                             size_t action_len, int reward_mode,
                             double* reward, int* outcome);
RA_API ra_status ra_env_distances(const ra_env* env, double* d_t,
                                  double* d_o);
RA_API ra_status ra_env_joints(const ra_env* env, double* joints,
                               size_t joints_len);
RA_API ra_status ra_env_outcome(const ra_env* env, int* outcome);
RA_API void ra_env_destroy(ra_env* env);

/* --- trained agents (checkpoints produced by the train command) --- */

RA_API ra_status ra_agent_create(size_t state_dim, size_t action_dim,
                                 const ra_ddpg_config* cfg, uint64_t seed,
                                 ra_agent** out);
RA_API ra_status ra_agent_load(const char* checkpoint_path, ra_agent** out);
RA_API ra_status ra_agent_save(const ra_agent* agent,
                               const char* checkpoint_path);
/* Deterministic policy output scaled to the training bound; explore
 * nonzero adds exploration noise. */
RA_API ra_status ra_agent_act(ra_agent* agent, const double* state,
                              size_t state_len, int explore, double* action,
                              size_t action_len);
/* Saves just the actor network (loadable as a controller policy). */
RA_API ra_status ra_agent_save_policy(const ra_agent* agent,
                                      const char* path);
RA_API void ra_agent_destroy(ra_agent* agent);

/* --- controllers (bundles produced by the train command) --- */

RA_API ra_status ra_controller_load(const char* bundle_json_path,
                                    ra_controller** out);
RA_API ra_status ra_controller_kind(const ra_controller* ctrl, int* kind);
/* obs_reach may be NULL for monolithic controllers. Lengths must match
 * RA_OBS_WITH_OBSTACLE / RA_OBS_REACH_ONLY. */
RA_API ra_status ra_controller_decide(const ra_controller* ctrl, double d_t,
                                      double d_o, const double* obs_full,
                                      size_t obs_full_len,
                                      const double* obs_reach,
                                      size_t obs_reach_len,
                                      ra_control_decision* out);
RA_API void ra_controller_destroy(ra_controller* ctrl);

/* --- run manifests (the CLI's engine) --- */

/* Executes one JSON run manifest (train/eval/sweep/scenarios/ablate/trace)
 * and writes its reports plus the effective manifest into out_dir.
 * out_files (optional) receives a newline-joined list of the written file
 * names; free it with ra_string_free. */
RA_API ra_status ra_run_command(const char* manifest_json,
                                const char* out_dir, char** out_files);
RA_API void ra_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* REACHAVOID_H */
