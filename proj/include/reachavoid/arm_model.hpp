#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>

namespace reachavoid {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
inline double norm(Vec3 v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }

inline constexpr std::size_t kNumJoints = 7;
// 7 joint-frame origins plus the tooltip.
inline constexpr std::size_t kNumFrames = 8;

using Joints = std::array<double, kNumJoints>;
using FramePositions = std::array<Vec3, kNumFrames>;

// Kinematic arm description in modified (Craig) DH convention. Row i holds
// (a_{i-1}, alpha_{i-1}, d_i); the joint angle is the variable. The last row
// is the fixed tooltip offset from the final joint frame.
struct ArmModel {
    struct DhRow {
        double a = 0.0;      // meters
        double alpha = 0.0;  // radians
        double d = 0.0;      // meters
    };

    std::array<DhRow, kNumFrames> dh;
    Joints position_limit;   // symmetric: joint i valid in +-position_limit[i]
    double velocity_limit = 0.0;  // rad/s, same for all joints

    // 7-DOF arm with the published Panda link table. Position limits are
    // symmetrized (the +- of the larger published magnitude) so the zero
    // configuration sits mid-range.
    static ArmModel panda();

    // Standard ready pose: elbow up, tooltip in front of and above the base.
    static Joints home_pose();

    bool within_limits(std::span<const double> joints) const;
};

// Frame origins in the base frame for the given joint angles: entries 0..6
// are the joint frames, entry 7 the tooltip. Throws DomainError when a joint
// is outside its position limit.
FramePositions forward_kinematics(const ArmModel& model,
                                  std::span<const double> joints);

inline Vec3 tooltip(const FramePositions& frames) { return frames.back(); }

// Smallest distance from any frame origin to the obstacle surface
// (center distance minus radius), floored at zero.
double distance_to_obstacle(std::span<const Vec3> frames, Vec3 obstacle_center,
                            double obstacle_radius);

inline double distance_to_target(Vec3 tooltip_pos, Vec3 target) {
    return distance(tooltip_pos, target);
}

}  // namespace reachavoid
