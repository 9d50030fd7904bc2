#include "reachavoid.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <variant>

#include "reachavoid/controllers.hpp"
#include "reachavoid/ddpg.hpp"
#include "reachavoid/env.hpp"
#include "reachavoid/error.hpp"
#include "reachavoid/harness.hpp"
#include "reachavoid/kv.hpp"

namespace ra = reachavoid;

struct ra_env_config {
    ra::EnvConfig cfg;
};

struct ra_ddpg_config {
    ra::DdpgConfig cfg;
};

struct ra_env {
    ra::Env env;
};

struct ra_agent {
    ra::Agent agent;
};

struct ra_controller {
    std::variant<ra::MonolithicController, ra::HybridController> ctrl;
};

namespace {

thread_local std::string tl_error;

ra_status fail(ra_status code, const std::string& message) {
    tl_error = message;
    return code;
}

// Runs fn, mapping the library's exception taxonomy onto status codes.
template <class Fn>
ra_status guarded(Fn&& fn) {
    try {
        fn();
        tl_error.clear();
        return RA_OK;
    } catch (const ra::ShapeError& e) {
        return fail(RA_ERR_SHAPE, e.what());
    } catch (const ra::StateError& e) {
        return fail(RA_ERR_STATE, e.what());
    } catch (const ra::DomainError& e) {
        return fail(RA_ERR_DOMAIN, e.what());
    } catch (const ra::NumericError& e) {
        return fail(RA_ERR_NUMERIC, e.what());
    } catch (const ra::IoError& e) {
        return fail(RA_ERR_IO, e.what());
    } catch (const ra::ConfigError& e) {
        return fail(RA_ERR_CONFIG, e.what());
    } catch (const std::bad_alloc&) {
        return fail(RA_ERR_UNKNOWN, "out of memory");
    } catch (const std::exception& e) {
        return fail(RA_ERR_UNKNOWN, e.what());
    } catch (...) {
        return fail(RA_ERR_UNKNOWN, "unknown error");
    }
}

ra_status require(bool ok, const char* what) {
    return ok ? RA_OK : fail(RA_ERR_NULL, std::string(what) + " is NULL");
}

// Copies `value` into buf (buf_len includes the NUL). A NULL buf with a
// non-NULL `needed` is a pure size query.
void copy_out(const std::string& value, char* buf, size_t buf_len,
              size_t* needed) {
    if (needed != nullptr) *needed = value.size() + 1;
    if (buf == nullptr) {
        if (needed == nullptr) {
            throw ra::ShapeError("buf and needed are both NULL");
        }
        return;
    }
    if (buf_len < value.size() + 1) {
        throw ra::ShapeError("buffer of " + std::to_string(buf_len) +
                             " bytes cannot hold " +
                             std::to_string(value.size() + 1));
    }
    std::memcpy(buf, value.c_str(), value.size() + 1);
}

template <class Config>
void config_set(Config& cfg, const char* key, const char* value) {
    ra::KvFile kv = cfg.to_kv();
    if (!kv.has(key)) {
        throw ra::ConfigError("unknown config key '" + std::string(key) + "'");
    }
    kv.set(key, value);
    cfg = Config::from_kv(kv);
}

template <class Config>
void config_get(const Config& cfg, const char* key, char* buf, size_t buf_len,
                size_t* needed) {
    const ra::KvFile kv = cfg.to_kv();
    if (!kv.has(key)) {
        throw ra::ConfigError("unknown config key '" + std::string(key) + "'");
    }
    copy_out(kv.raw(key), buf, buf_len, needed);
}

}  // namespace

extern "C" {

const char* ra_last_error(void) { return tl_error.c_str(); }

const char* ra_version(void) { return "1.0.0"; }

ra_status ra_env_config_create(ra_env_config** out) {
    if (ra_status rc = require(out != nullptr, "out")) return rc;
    return guarded([&] { *out = new ra_env_config{ra::EnvConfig{}}; });
}

ra_status ra_env_config_load(const char* path, ra_env_config** out) {
    if (ra_status rc = require(path != nullptr, "path")) return rc;
    if (ra_status rc = require(out != nullptr, "out")) return rc;
    return guarded(
        [&] { *out = new ra_env_config{ra::EnvConfig::load(path)}; });
}

ra_status ra_env_config_save(const ra_env_config* cfg, const char* path) {
    if (ra_status rc = require(cfg != nullptr, "cfg")) return rc;
    if (ra_status rc = require(path != nullptr, "path")) return rc;
    return guarded([&] { cfg->cfg.save(path); });
}

ra_status ra_env_config_set(ra_env_config* cfg, const char* key,
                            const char* value) {
    if (ra_status rc = require(cfg != nullptr, "cfg")) return rc;
    if (ra_status rc = require(key != nullptr, "key")) return rc;
    if (ra_status rc = require(value != nullptr, "value")) return rc;
    return guarded([&] { config_set(cfg->cfg, key, value); });
}

ra_status ra_env_config_get(const ra_env_config* cfg, const char* key,
                            char* buf, size_t buf_len, size_t* needed) {
    if (ra_status rc = require(cfg != nullptr, "cfg")) return rc;
    if (ra_status rc = require(key != nullptr, "key")) return rc;
    return guarded([&] { config_get(cfg->cfg, key, buf, buf_len, needed); });
}

void ra_env_config_destroy(ra_env_config* cfg) { delete cfg; }

ra_status ra_ddpg_config_create(ra_ddpg_config** out) {
    if (ra_status rc = require(out != nullptr, "out")) return rc;
    return guarded([&] { *out = new ra_ddpg_config{ra::DdpgConfig{}}; });
}

ra_status ra_ddpg_config_load(const char* path, ra_ddpg_config** out) {
    if (ra_status rc = require(path != nullptr, "path")) return rc;
    if (ra_status rc = require(out != nullptr, "out")) return rc;
    return guarded(
        [&] { *out = new ra_ddpg_config{ra::DdpgConfig::load(path)}; });
}

ra_status ra_ddpg_config_save(const ra_ddpg_config* cfg, const char* path) {
    if (ra_status rc = require(cfg != nullptr, "cfg")) return rc;
    if (ra_status rc = require(path != nullptr, "path")) return rc;
    return guarded([&] { cfg->cfg.save(path); });
}

ra_status ra_ddpg_config_set(ra_ddpg_config* cfg, const char* key,
                             const char* value) {
    if (ra_status rc = require(cfg != nullptr, "cfg")) return rc;
    if (ra_status rc = require(key != nullptr, "key")) return rc;
    if (ra_status rc = require(value != nullptr, "value")) return rc;
    return guarded([&] { config_set(cfg->cfg, key, value); });
}

ra_status ra_ddpg_config_get(const ra_ddpg_config* cfg, const char* key,
                             char* buf, size_t buf_len, size_t* needed) {
    if (ra_status rc = require(cfg != nullptr, "cfg")) return rc;
    if (ra_status rc = require(key != nullptr, "key")) return rc;
    return guarded([&] { config_get(cfg->cfg, key, buf, buf_len, needed); });
}

void ra_ddpg_config_destroy(ra_ddpg_config* cfg) { delete cfg; }

ra_status ra_env_create(const ra_env_config* cfg, ra_env** out) {
    if (ra_status rc = require(cfg != nullptr, "cfg")) return rc;
    if (ra_status rc = require(out != nullptr, "out")) return rc;
    return guarded([&] {
        *out = new ra_env{ra::Env(ra::ArmModel::panda(), cfg->cfg)};
    });
}

ra_status ra_env_reset(ra_env* env, uint64_t seed) {
    if (ra_status rc = require(env != nullptr, "env")) return rc;
    return guarded([&] {
        env->env.reset(seed, ra::ObstacleTrajectory::random_waypoints());
    });
}

ra_status ra_env_reset_scenario(ra_env* env, int scenario_id, double speed,
                                uint64_t seed) {
    if (ra_status rc = require(env != nullptr, "env")) return rc;
    return guarded([&] {
        env->env.reset(seed, ra::scenario_trajectory(scenario_id, speed),
                       ra::scenario_target());
    });
}

ra_status ra_env_observe(const ra_env* env, int with_obstacle, double* values,
                         size_t values_len) {
    if (ra_status rc = require(env != nullptr, "env")) return rc;
    if (ra_status rc = require(values != nullptr, "values")) return rc;
    return guarded([&] {
        const ra::Observation obs = env->env.observe(
            with_obstacle != 0 ? ra::Observation::Kind::WithObstacle
                               : ra::Observation::Kind::ReachOnly);
        if (values_len != obs.values.size()) {
            throw ra::ShapeError("values_len " + std::to_string(values_len) +
                                 " does not match observation size " +
                                 std::to_string(obs.values.size()));
        }
        std::memcpy(values, obs.values.data(),
                    obs.values.size() * sizeof(double));
    });
}

ra_status ra_env_step(ra_env* env, const double* action, size_t action_len,
                      int reward_mode, double* reward, int* outcome) {
    if (ra_status rc = require(env != nullptr, "env")) return rc;
    if (ra_status rc = require(action != nullptr, "action")) return rc;
    return guarded([&] {
        if (reward_mode < RA_REWARD_MONOLITHIC ||
            reward_mode > RA_REWARD_HYBRID_REACH) {
            throw ra::DomainError("unknown reward mode " +
                                  std::to_string(reward_mode));
        }
        const ra::StepResult r =
            env->env.step(std::span<const double>(action, action_len),
                          static_cast<ra::RewardMode>(reward_mode));
        if (reward != nullptr) *reward = r.reward;
        if (outcome != nullptr) *outcome = static_cast<int>(r.outcome);
    });
}

ra_status ra_env_distances(const ra_env* env, double* d_t, double* d_o) {
    if (ra_status rc = require(env != nullptr, "env")) return rc;
    return guarded([&] {
        if (d_t != nullptr) *d_t = env->env.d_t();
        if (d_o != nullptr) *d_o = env->env.d_o();
    });
}

ra_status ra_env_joints(const ra_env* env, double* joints, size_t joints_len) {
    if (ra_status rc = require(env != nullptr, "env")) return rc;
    if (ra_status rc = require(joints != nullptr, "joints")) return rc;
    return guarded([&] {
        if (joints_len != ra::kNumJoints) {
            throw ra::ShapeError("joints_len " + std::to_string(joints_len) +
                                 " does not match joint count " +
                                 std::to_string(ra::kNumJoints));
        }
        const ra::Joints& q = env->env.joints();
        std::memcpy(joints, q.data(), q.size() * sizeof(double));
    });
}

ra_status ra_env_outcome(const ra_env* env, int* outcome) {
    if (ra_status rc = require(env != nullptr, "env")) return rc;
    if (ra_status rc = require(outcome != nullptr, "outcome")) return rc;
    return guarded([&] { *outcome = static_cast<int>(env->env.outcome()); });
}

void ra_env_destroy(ra_env* env) { delete env; }

ra_status ra_agent_create(size_t state_dim, size_t action_dim,
                          const ra_ddpg_config* cfg, uint64_t seed,
                          ra_agent** out) {
    if (ra_status rc = require(cfg != nullptr, "cfg")) return rc;
    if (ra_status rc = require(out != nullptr, "out")) return rc;
    return guarded([&] {
        *out = new ra_agent{ra::Agent(state_dim, action_dim, cfg->cfg, seed)};
    });
}

ra_status ra_agent_load(const char* checkpoint_path, ra_agent** out) {
    if (ra_status rc = require(checkpoint_path != nullptr, "checkpoint_path"))
        return rc;
    if (ra_status rc = require(out != nullptr, "out")) return rc;
    return guarded([&] {
        *out = new ra_agent{ra::Agent::load_checkpoint(checkpoint_path)};
    });
}

ra_status ra_agent_save(const ra_agent* agent, const char* checkpoint_path) {
    if (ra_status rc = require(agent != nullptr, "agent")) return rc;
    if (ra_status rc = require(checkpoint_path != nullptr, "checkpoint_path"))
        return rc;
    return guarded([&] { agent->agent.save_checkpoint(checkpoint_path); });
}

ra_status ra_agent_act(ra_agent* agent, const double* state, size_t state_len,
                       int explore, double* action, size_t action_len) {
    if (ra_status rc = require(agent != nullptr, "agent")) return rc;
    if (ra_status rc = require(state != nullptr, "state")) return rc;
    if (ra_status rc = require(action != nullptr, "action")) return rc;
    return guarded([&] {
        const std::vector<double> a = agent->agent.act(
            std::span<const double>(state, state_len), explore != 0);
        if (action_len != a.size()) {
            throw ra::ShapeError("action_len " + std::to_string(action_len) +
                                 " does not match action size " +
                                 std::to_string(a.size()));
        }
        std::memcpy(action, a.data(), a.size() * sizeof(double));
    });
}

ra_status ra_agent_save_policy(const ra_agent* agent, const char* path) {
    if (ra_status rc = require(agent != nullptr, "agent")) return rc;
    if (ra_status rc = require(path != nullptr, "path")) return rc;
    return guarded([&] { agent->agent.actor().save(path); });
}

void ra_agent_destroy(ra_agent* agent) { delete agent; }

ra_status ra_controller_load(const char* bundle_json_path,
                             ra_controller** out) {
    if (ra_status rc = require(bundle_json_path != nullptr, "bundle_json_path"))
        return rc;
    if (ra_status rc = require(out != nullptr, "out")) return rc;
    return guarded([&] {
        if (ra::peek_bundle_kind(bundle_json_path) ==
            ra::BundleKind::Monolithic) {
            *out = new ra_controller{
                ra::load_monolithic_bundle(bundle_json_path)};
        } else {
            *out = new ra_controller{ra::load_hybrid_bundle(bundle_json_path)};
        }
    });
}

ra_status ra_controller_kind(const ra_controller* ctrl, int* kind) {
    if (ra_status rc = require(ctrl != nullptr, "ctrl")) return rc;
    if (ra_status rc = require(kind != nullptr, "kind")) return rc;
    return guarded([&] {
        *kind = std::holds_alternative<ra::MonolithicController>(ctrl->ctrl)
                    ? RA_CONTROLLER_MONOLITHIC
                    : RA_CONTROLLER_HYBRID;
    });
}

ra_status ra_controller_decide(const ra_controller* ctrl, double d_t,
                               double d_o, const double* obs_full,
                               size_t obs_full_len, const double* obs_reach,
                               size_t obs_reach_len,
                               ra_control_decision* out) {
    if (ra_status rc = require(ctrl != nullptr, "ctrl")) return rc;
    if (ra_status rc = require(obs_full != nullptr, "obs_full")) return rc;
    if (ra_status rc = require(out != nullptr, "out")) return rc;
    return guarded([&] {
        ra::ControlDecision d;
        if (const auto* mono =
                std::get_if<ra::MonolithicController>(&ctrl->ctrl)) {
            d = ra::monolithic_step(
                *mono, d_t, d_o,
                std::span<const double>(obs_full, obs_full_len));
        } else {
            if (obs_reach == nullptr) {
                throw ra::ShapeError(
                    "obs_reach is required for a hybrid controller");
            }
            d = ra::hybrid_step(
                std::get<ra::HybridController>(ctrl->ctrl), d_t, d_o,
                std::span<const double>(obs_full, obs_full_len),
                std::span<const double>(obs_reach, obs_reach_len));
        }
        out->halt = d.halt ? 1 : 0;
        out->halt_cause = static_cast<int>(d.halt_cause);
        out->active_policy = static_cast<int>(d.active_policy);
        std::memset(out->action, 0, sizeof(out->action));
        if (!d.halt) {
            if (d.action.size() != RA_NUM_JOINTS) {
                throw ra::ShapeError("controller action size " +
                                     std::to_string(d.action.size()) +
                                     " does not match joint count");
            }
            std::memcpy(out->action, d.action.data(),
                        d.action.size() * sizeof(double));
        }
    });
}

void ra_controller_destroy(ra_controller* ctrl) { delete ctrl; }

ra_status ra_run_command(const char* manifest_json, const char* out_dir,
                         char** out_files) {
    if (ra_status rc = require(manifest_json != nullptr, "manifest_json"))
        return rc;
    if (ra_status rc = require(out_dir != nullptr, "out_dir")) return rc;
    return guarded([&] {
        const std::vector<std::string> files =
            ra::run_command_json(manifest_json, out_dir);
        if (out_files == nullptr) return;
        std::string joined;
        for (std::size_t i = 0; i < files.size(); ++i) {
            if (i > 0) joined += '\n';
            joined += files[i];
        }
        char* text = new char[joined.size() + 1];
        std::memcpy(text, joined.c_str(), joined.size() + 1);
        *out_files = text;
    });
}

void ra_string_free(char* text) { delete[] text; }

}  // extern "C"
