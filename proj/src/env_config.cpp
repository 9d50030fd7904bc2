#include "reachavoid/env_config.hpp"

#include "reachavoid/error.hpp"

namespace reachavoid {

void EnvConfig::validate() const {
    std::string problems;
    auto bad = [&](const std::string& msg) {
        if (!problems.empty()) problems += "; ";
        problems += msg;
    };
    if (!(tau_o > 0.0)) bad("tau_o must be positive");
    if (!(tau_s > 0.0)) bad("tau_s must be positive");
    if (!(p_o >= 0.0)) bad("p_o must be non-negative");
    if (!(p_s >= 0.0)) bad("p_s must be non-negative");
    if (!(target_x_min < target_x_max)) bad("target x range empty");
    if (!(target_y_min < target_y_max)) bad("target y range empty");
    if (!(obstacle_x_min < obstacle_x_max)) bad("obstacle x range empty");
    if (!(obstacle_y_min < obstacle_y_max)) bad("obstacle y range empty");
    if (target_x_min < obstacle_x_min || target_x_max > obstacle_x_max ||
        target_y_min < obstacle_y_min || target_y_max > obstacle_y_max) {
        bad("target region must lie inside obstacle region");
    }
    if (!(obstacle_radius >= 0.0)) bad("obstacle_radius must be non-negative");
    if (!(obstacle_speed_min > 0.0)) bad("obstacle_speed_min must be positive");
    if (!(obstacle_speed_min <= obstacle_speed_max)) {
        bad("obstacle speed range empty");
    }
    if (!(dt > 0.0)) bad("dt must be positive");
    if (max_steps == 0) bad("max_steps must be positive");
    if (!(action_scale > 0.0)) bad("action_scale must be positive");
    if (!problems.empty()) throw ConfigError("env config: " + problems);
}

KvFile EnvConfig::to_kv() const {
    KvFile kv;
    kv.set("tau_o", format_double(tau_o));
    kv.set("tau_s", format_double(tau_s));
    kv.set("p_o", format_double(p_o));
    kv.set("p_s", format_double(p_s));
    kv.set("target_x_min", format_double(target_x_min));
    kv.set("target_x_max", format_double(target_x_max));
    kv.set("target_y_min", format_double(target_y_min));
    kv.set("target_y_max", format_double(target_y_max));
    kv.set("obstacle_x_min", format_double(obstacle_x_min));
    kv.set("obstacle_x_max", format_double(obstacle_x_max));
    kv.set("obstacle_y_min", format_double(obstacle_y_min));
    kv.set("obstacle_y_max", format_double(obstacle_y_max));
    kv.set("region_z", format_double(region_z));
    kv.set("obstacle_radius", format_double(obstacle_radius));
    kv.set("obstacle_speed_min", format_double(obstacle_speed_min));
    kv.set("obstacle_speed_max", format_double(obstacle_speed_max));
    kv.set("dt", format_double(dt));
    kv.set("max_steps", std::to_string(max_steps));
    kv.set("action_scale", format_double(action_scale));
    return kv;
}

EnvConfig EnvConfig::from_kv(const KvFile& kv) {
    EnvConfig c;
    auto d = [&](const char* key, double& out) {
        if (kv.has(key)) out = kv.get_double(key);
    };
    d("tau_o", c.tau_o);
    d("tau_s", c.tau_s);
    d("p_o", c.p_o);
    d("p_s", c.p_s);
    d("target_x_min", c.target_x_min);
    d("target_x_max", c.target_x_max);
    d("target_y_min", c.target_y_min);
    d("target_y_max", c.target_y_max);
    d("obstacle_x_min", c.obstacle_x_min);
    d("obstacle_x_max", c.obstacle_x_max);
    d("obstacle_y_min", c.obstacle_y_min);
    d("obstacle_y_max", c.obstacle_y_max);
    d("region_z", c.region_z);
    d("obstacle_radius", c.obstacle_radius);
    d("obstacle_speed_min", c.obstacle_speed_min);
    d("obstacle_speed_max", c.obstacle_speed_max);
    d("dt", c.dt);
    if (kv.has("max_steps")) c.max_steps = kv.get_count("max_steps");
    d("action_scale", c.action_scale);
    c.validate();
    return c;
}

EnvConfig EnvConfig::load(const std::string& path) {
    return from_kv(KvFile::parse_file(path));
}

void EnvConfig::save(const std::string& path) const {
    to_kv().save(path);
}

}  // namespace reachavoid
