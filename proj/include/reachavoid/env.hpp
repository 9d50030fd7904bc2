#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "reachavoid/arm_model.hpp"
#include "reachavoid/env_config.hpp"
#include "reachavoid/rng.hpp"

namespace reachavoid {

// Which composite reward an episode is trained on. Monolithic and
// HybridAvoid sum all three terms (with their own penalty magnitudes in the
// config); HybridReach drops the obstacle penalty.
enum class RewardMode : std::uint8_t { Monolithic, HybridAvoid, HybridReach };

enum class Outcome : std::uint8_t { Running, Collision, Success, Timeout };

const char* to_string(RewardMode mode);
const char* to_string(Outcome outcome);

struct RewardTerms {
    double r_target = 0.0;    // -d_t
    double r_obstacle = 0.0;  // -p_o when d_o < tau_o
    double r_success = 0.0;   // +p_s when d_t < tau_s and d_o >= tau_o
};

// Term definitions: R_t = -d_t; R_o = -p_o iff d_o < tau_o; R_s = +p_s iff
// d_t < tau_s and d_o >= tau_o (success pays nothing on a colliding step).
RewardTerms reward_terms(double d_t, double d_o, const EnvConfig& cfg);

// Monolithic/HybridAvoid: R_t + R_o + R_s. HybridReach: R_t + R_s.
double compose_reward(const RewardTerms& terms, RewardMode mode);

// State vector handed to the policies. WithObstacle (20): joint positions,
// joint velocities, end-effector-to-target, end-effector-to-obstacle.
// ReachOnly (17) drops the obstacle component and is the WithObstacle
// vector's first 17 entries.
struct Observation {
    enum class Kind : std::uint8_t { WithObstacle, ReachOnly };
    Kind kind = Kind::WithObstacle;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    double d_t = 0.0;
    double d_o = 0.0;
    Outcome outcome = Outcome::Running;
};

// Obstacle motion: constant-speed travel along a waypoint polyline, holding
// the final waypoint once the path is exhausted. RandomWaypoints draws a
// fresh polyline and speed at every reset; scenario paths are fixed.
struct ObstacleTrajectory {
    enum class Kind : std::uint8_t { RandomWaypoints, Scenario };
    Kind kind = Kind::RandomWaypoints;
    int scenario_id = 0;          // 1..5 when kind == Scenario
    std::vector<Vec3> waypoints;  // empty for RandomWaypoints
    double speed = 0.0;           // m/s; 0 for RandomWaypoints = draw at reset

    static ObstacleTrajectory random_waypoints();
};

// Fixed obstacle paths 1..5 used by the scenario comparison. All use the
// fixed target at scenario_target(). Throws DomainError on unknown id or
// speed outside [0.018, 0.040] m/s.
ObstacleTrajectory scenario_trajectory(int id, double speed);
Vec3 scenario_target();

double polyline_length(std::span<const Vec3> waypoints);

// Point at the given arc length from the start of the polyline, clamped to
// its ends.
Vec3 polyline_point(std::span<const Vec3> waypoints, double arc_length);

// Episode simulator: integrates joint-velocity commands on the arm model,
// moves the obstacle along its trajectory, and scores each step. Terminal
// outcomes (Collision, Success, Timeout) stop the episode; stepping past
// them throws StateError.
class Env {
public:
    Env(ArmModel model, EnvConfig config);

    // Starts an episode: home pose, zero velocities, target sampled
    // uniformly in the target region unless fixed_target is given, obstacle
    // at its trajectory start. Deterministic in (seed, trajectory).
    // Returns the WithObstacle observation.
    Observation reset(std::uint64_t seed, const ObstacleTrajectory& trajectory,
                      std::optional<Vec3> fixed_target = std::nullopt);

    // Advances one control period: velocities = clip(action, +-1) *
    // action_scale (then clipped to the model's velocity limit), positions
    // integrated over dt and clipped to position limits, obstacle advanced
    // by speed*dt. The result carries the mode's observation variant and
    // composite reward. Outcome checks run in fixed order: collision before
    // success before timeout.
    StepResult step(std::span<const double> action, RewardMode mode);

    const ArmModel& model() const { return model_; }
    const EnvConfig& config() const { return config_; }

    const Joints& joints() const { return joints_; }
    const Joints& joint_velocities() const { return joint_velocities_; }
    Vec3 target() const { return target_; }
    Vec3 obstacle_position() const { return obstacle_pos_; }
    Vec3 obstacle_velocity() const { return obstacle_vel_; }
    double obstacle_speed() const { return speed_; }
    std::size_t step_index() const { return step_index_; }
    Outcome outcome() const { return outcome_; }

    const FramePositions& frames() const { return frames_; }
    Vec3 tooltip_position() const { return tooltip(frames_); }
    double d_t() const { return d_t_; }
    double d_o() const { return d_o_; }

    Observation observe(Observation::Kind kind) const;

private:
    void refresh_distances();
    void advance_obstacle();

    ArmModel model_;
    EnvConfig config_;

    Joints joints_{};
    Joints joint_velocities_{};
    Vec3 target_{};
    Vec3 obstacle_pos_{};
    Vec3 obstacle_vel_{};
    std::vector<Vec3> waypoints_;
    double speed_ = 0.0;
    double traveled_ = 0.0;
    std::size_t step_index_ = 0;
    Outcome outcome_ = Outcome::Running;
    bool started_ = false;
    Rng rng_{0};

    FramePositions frames_{};
    double d_t_ = 0.0;
    double d_o_ = 0.0;
};

}  // namespace reachavoid
