#pragma once

#include <cstddef>
#include <string>

#include "reachavoid/kv.hpp"

namespace reachavoid {

// Task parameters: thresholds, reward magnitudes, workspace regions and
// episode mechanics. Distances in meters, angles in radians, time in
// seconds. Both workspace rectangles live on the horizontal plane z =
// region_z in front of the base; the target rectangle must be contained in
// the obstacle rectangle.
struct EnvConfig {
    double tau_o = 0.100;  // collision threshold
    double tau_s = 0.050;  // success threshold
    double p_o = 4.0;      // collision penalty magnitude
    double p_s = 4.0;      // success reward magnitude

    double target_x_min = 0.30, target_x_max = 0.70;
    double target_y_min = -0.15, target_y_max = 0.15;
    double obstacle_x_min = 0.10, obstacle_x_max = 0.90;
    double obstacle_y_min = -0.30, obstacle_y_max = 0.30;
    double region_z = 0.15;

    double obstacle_radius = 0.05;
    double obstacle_speed_min = 0.018, obstacle_speed_max = 0.040;

    // 20 s episodes: the obstacle needs 10-30 s to cross the workspace at
    // its 0.018-0.040 m/s speeds, so shorter horizons would never let a
    // sweep reach the arm.
    double dt = 0.1;
    std::size_t max_steps = 200;
    double action_scale = 1.0;  // rad/s commanded per unit of action

    void validate() const;  // throws ConfigError listing every violation

    KvFile to_kv() const;
    static EnvConfig from_kv(const KvFile& kv);
    static EnvConfig load(const std::string& path);
    void save(const std::string& path) const;
};

}  // namespace reachavoid
