#include "reachavoid/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reachavoid/error.hpp"

namespace reachavoid {

const char* to_string(RewardMode mode) {
    switch (mode) {
        case RewardMode::Monolithic: return "monolithic";
        case RewardMode::HybridAvoid: return "hybrid_avoid";
        case RewardMode::HybridReach: return "hybrid_reach";
    }
    return "unknown";
}

const char* to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::Running: return "running";
        case Outcome::Collision: return "collision";
        case Outcome::Success: return "success";
        case Outcome::Timeout: return "timeout";
    }
    return "unknown";
}

RewardTerms reward_terms(double d_t, double d_o, const EnvConfig& cfg) {
    if (d_t < 0.0 || d_o < 0.0) {
        throw DomainError("reward_terms: distances must be non-negative");
    }
    RewardTerms t;
    t.r_target = -d_t;
    const bool collision = d_o < cfg.tau_o;
    if (collision) t.r_obstacle = -cfg.p_o;
    if (d_t < cfg.tau_s && !collision) t.r_success = cfg.p_s;
    return t;
}

double compose_reward(const RewardTerms& terms, RewardMode mode) {
    switch (mode) {
        case RewardMode::Monolithic:
        case RewardMode::HybridAvoid:
            return terms.r_target + terms.r_obstacle + terms.r_success;
        case RewardMode::HybridReach:
            return terms.r_target + terms.r_success;
    }
    throw DomainError("compose_reward: unknown mode");
}

ObstacleTrajectory ObstacleTrajectory::random_waypoints() {
    ObstacleTrajectory t;
    t.kind = Kind::RandomWaypoints;
    return t;
}

Vec3 scenario_target() { return {0.5, 0.0, 0.15}; }

ObstacleTrajectory scenario_trajectory(int id, double speed) {
    if (!(speed >= 0.018 && speed <= 0.040)) {
        throw DomainError("scenario speed must be in [0.018, 0.040] m/s");
    }
    ObstacleTrajectory t;
    t.kind = ObstacleTrajectory::Kind::Scenario;
    t.scenario_id = id;
    t.speed = speed;
    const double z = 0.15;
    switch (id) {
        case 1:
            // Far lateral sweep behind the target.
            t.waypoints = {{0.75, -0.28, z}, {0.75, 0.28, z}};
            break;
        case 2:
            // Crossing directly over the target.
            t.waypoints = {{0.52, 0.28, z}, {0.52, -0.28, z}};
            break;
        case 3:
            // Near-field sweep between the base and the target.
            t.waypoints = {{0.30, 0.25, z}, {0.30, -0.25, z}};
            break;
        case 4:
            // Diagonal approach passing the target toward the arm.
            t.waypoints = {{0.75, 0.22, z}, {0.25, -0.18, z}};
            break;
        case 5:
            // Two laps around the target at close range.
            t.waypoints = {{0.62, 0.0, z},  {0.50, 0.12, z}, {0.38, 0.0, z},
                           {0.50, -0.12, z}, {0.62, 0.0, z},  {0.50, 0.12, z},
                           {0.38, 0.0, z},  {0.50, -0.12, z}, {0.62, 0.0, z}};
            break;
        default:
            throw DomainError("unknown scenario id " + std::to_string(id));
    }
    return t;
}

double polyline_length(std::span<const Vec3> waypoints) {
    double len = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        len += distance(waypoints[i - 1], waypoints[i]);
    }
    return len;
}

Vec3 polyline_point(std::span<const Vec3> waypoints, double arc_length) {
    if (waypoints.empty()) {
        throw DomainError("polyline_point: empty waypoint list");
    }
    if (arc_length <= 0.0) return waypoints.front();
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const double seg = distance(waypoints[i - 1], waypoints[i]);
        if (arc_length <= seg && seg > 0.0) {
            const double u = arc_length / seg;
            return waypoints[i - 1] + u * (waypoints[i] - waypoints[i - 1]);
        }
        arc_length -= seg;
    }
    return waypoints.back();
}

Env::Env(ArmModel model, EnvConfig config)
    : model_(std::move(model)), config_(std::move(config)) {
    config_.validate();
}

Observation Env::reset(std::uint64_t seed,
                       const ObstacleTrajectory& trajectory,
                       std::optional<Vec3> fixed_target) {
    rng_ = Rng(seed);
    joints_ = ArmModel::home_pose();
    joint_velocities_ = {};
    frames_ = forward_kinematics(model_, joints_);

    if (fixed_target.has_value()) {
        target_ = *fixed_target;
    } else {
        target_ = {rng_.uniform(config_.target_x_min, config_.target_x_max),
                   rng_.uniform(config_.target_y_min, config_.target_y_max),
                   config_.region_z};
    }

    if (trajectory.kind == ObstacleTrajectory::Kind::Scenario) {
        if (trajectory.waypoints.empty()) {
            throw DomainError("scenario trajectory has no waypoints");
        }
        waypoints_ = trajectory.waypoints;
        speed_ = trajectory.speed;
    } else {
        speed_ = rng_.uniform(config_.obstacle_speed_min,
                              config_.obstacle_speed_max);
        auto sample_point = [&]() -> Vec3 {
            return {rng_.uniform(config_.obstacle_x_min, config_.obstacle_x_max),
                    rng_.uniform(config_.obstacle_y_min, config_.obstacle_y_max),
                    config_.region_z};
        };
        // Spawn clear of the arm (no instant collision) and of the target's
        // final-approach ball; later waypoints roam freely.
        const double arm_clearance = config_.tau_o + 0.05;
        const double target_clearance = 0.15;
        Vec3 start = sample_point();
        double best_clear = distance_to_obstacle(frames_, start,
                                                 config_.obstacle_radius);
        for (int attempt = 0; attempt < 200; ++attempt) {
            const Vec3 p = sample_point();
            const double clear =
                distance_to_obstacle(frames_, p, config_.obstacle_radius);
            if (clear > best_clear) {
                best_clear = clear;
                start = p;
            }
            if (clear >= arm_clearance &&
                distance(p, target_) >= target_clearance) {
                start = p;
                break;
            }
        }
        waypoints_.assign(1, start);
        for (int i = 0; i < 8; ++i) waypoints_.push_back(sample_point());
    }

    traveled_ = 0.0;
    obstacle_pos_ = waypoints_.front();
    obstacle_vel_ = {0.0, 0.0, 0.0};
    if (waypoints_.size() > 1) {
        const Vec3 dir = waypoints_[1] - waypoints_[0];
        const double len = norm(dir);
        if (len > 0.0) obstacle_vel_ = (speed_ / len) * dir;
    }

    step_index_ = 0;
    outcome_ = Outcome::Running;
    started_ = true;
    refresh_distances();
    return observe(Observation::Kind::WithObstacle);
}

void Env::refresh_distances() {
    d_t_ = distance_to_target(tooltip(frames_), target_);
    d_o_ = distance_to_obstacle(frames_, obstacle_pos_, config_.obstacle_radius);
}

void Env::advance_obstacle() {
    const Vec3 before = obstacle_pos_;
    traveled_ += speed_ * config_.dt;
    obstacle_pos_ = polyline_point(waypoints_, traveled_);
    const Vec3 delta = obstacle_pos_ - before;
    const double moved = norm(delta);
    obstacle_vel_ = moved > 0.0 ? (speed_ / moved) * delta
                                : Vec3{0.0, 0.0, 0.0};
}

StepResult Env::step(std::span<const double> action, RewardMode mode) {
    if (!started_) throw StateError("step before reset");
    if (outcome_ != Outcome::Running) {
        throw StateError("step after terminal outcome");
    }
    if (action.size() != kNumJoints) {
        throw ShapeError("step: expected 7 action components, got " +
                         std::to_string(action.size()));
    }

    for (std::size_t i = 0; i < kNumJoints; ++i) {
        const double a = std::clamp(action[i], -1.0, 1.0);
        const double v = std::clamp(a * config_.action_scale,
                                    -model_.velocity_limit,
                                    model_.velocity_limit);
        joint_velocities_[i] = v;
        joints_[i] = std::clamp(joints_[i] + v * config_.dt,
                                -model_.position_limit[i],
                                model_.position_limit[i]);
    }
    advance_obstacle();
    ++step_index_;

    frames_ = forward_kinematics(model_, joints_);
    refresh_distances();

    const RewardTerms terms = reward_terms(d_t_, d_o_, config_);

    StepResult result;
    result.reward = compose_reward(terms, mode);
    result.d_t = d_t_;
    result.d_o = d_o_;
    if (d_o_ < config_.tau_o) {
        outcome_ = Outcome::Collision;
    } else if (d_t_ < config_.tau_s) {
        outcome_ = Outcome::Success;
    } else if (step_index_ >= config_.max_steps) {
        outcome_ = Outcome::Timeout;
    } else {
        outcome_ = Outcome::Running;
    }
    result.outcome = outcome_;
    result.observation = observe(mode == RewardMode::HybridReach
                                     ? Observation::Kind::ReachOnly
                                     : Observation::Kind::WithObstacle);
    return result;
}

Observation Env::observe(Observation::Kind kind) const {
    if (!started_) throw StateError("observe before reset");
    Observation obs;
    obs.kind = kind;
    const std::size_t n =
        kind == Observation::Kind::WithObstacle ? 20 : 17;
    obs.values.reserve(n);
    for (double q : joints_) obs.values.push_back(q);
    for (double v : joint_velocities_) obs.values.push_back(v);
    const Vec3 tip = tooltip(frames_);
    const Vec3 to_target = target_ - tip;
    obs.values.push_back(to_target.x);
    obs.values.push_back(to_target.y);
    obs.values.push_back(to_target.z);
    if (kind == Observation::Kind::WithObstacle) {
        const Vec3 to_obstacle = obstacle_pos_ - tip;
        obs.values.push_back(to_obstacle.x);
        obs.values.push_back(to_obstacle.y);
        obs.values.push_back(to_obstacle.z);
    }
    return obs;
}

}  // namespace reachavoid
