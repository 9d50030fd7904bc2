#include "reachavoid/arm_model.hpp"

#include <algorithm>
#include <string>

#include "reachavoid/error.hpp"

namespace reachavoid {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Row-major 4x4 homogeneous transform.
struct Mat4 {
    double m[16];

    static Mat4 identity() {
        Mat4 r{};
        r.m[0] = r.m[5] = r.m[10] = r.m[15] = 1.0;
        return r;
    }
};

Mat4 operator*(const Mat4& a, const Mat4& b) {
    Mat4 r{};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += a.m[4 * i + k] * b.m[4 * k + j];
            r.m[4 * i + j] = s;
        }
    }
    return r;
}

Mat4 rot_x(double t) {
    Mat4 r = Mat4::identity();
    r.m[5] = std::cos(t);
    r.m[6] = -std::sin(t);
    r.m[9] = std::sin(t);
    r.m[10] = std::cos(t);
    return r;
}

Mat4 rot_z(double t) {
    Mat4 r = Mat4::identity();
    r.m[0] = std::cos(t);
    r.m[1] = -std::sin(t);
    r.m[4] = std::sin(t);
    r.m[5] = std::cos(t);
    return r;
}

Mat4 trans(double x, double y, double z) {
    Mat4 r = Mat4::identity();
    r.m[3] = x;
    r.m[7] = y;
    r.m[11] = z;
    return r;
}

}  // namespace

ArmModel ArmModel::panda() {
    ArmModel m;
    // (a_{i-1}, alpha_{i-1}, d_i), meters/radians.
    m.dh = {{{0.0, 0.0, 0.333},
             {0.0, -kPi / 2, 0.0},
             {0.0, kPi / 2, 0.316},
             {0.0825, kPi / 2, 0.0},
             {-0.0825, -kPi / 2, 0.384},
             {0.0, kPi / 2, 0.0},
             {0.088, kPi / 2, 0.0},
             {0.0, 0.0, 0.107}}};
    m.position_limit = {2.8973, 1.7628, 2.8973, 3.0718, 2.8973, 3.7525, 2.8973};
    m.velocity_limit = 2.175;
    return m;
}

Joints ArmModel::home_pose() {
    return {0.0, -kPi / 4, 0.0, -3 * kPi / 4, 0.0, kPi / 2, kPi / 4};
}

bool ArmModel::within_limits(std::span<const double> joints) const {
    if (joints.size() != kNumJoints) return false;
    for (std::size_t i = 0; i < kNumJoints; ++i) {
        if (!(std::abs(joints[i]) <= position_limit[i])) return false;
    }
    return true;
}

FramePositions forward_kinematics(const ArmModel& model,
                                  std::span<const double> joints) {
    if (joints.size() != kNumJoints) {
        throw DomainError("forward_kinematics: expected 7 joint angles, got " +
                          std::to_string(joints.size()));
    }
    if (!model.within_limits(joints)) {
        throw DomainError("forward_kinematics: joints outside position limits");
    }
    FramePositions frames;
    Mat4 t = Mat4::identity();
    for (std::size_t i = 0; i < kNumFrames; ++i) {
        const ArmModel::DhRow& row = model.dh[i];
        const double theta = i < kNumJoints ? joints[i] : 0.0;
        t = t * rot_x(row.alpha) * trans(row.a, 0.0, 0.0) * rot_z(theta) *
            trans(0.0, 0.0, row.d);
        frames[i] = {t.m[3], t.m[7], t.m[11]};
    }
    return frames;
}

double distance_to_obstacle(std::span<const Vec3> frames, Vec3 obstacle_center,
                            double obstacle_radius) {
    if (frames.empty()) {
        throw DomainError("distance_to_obstacle: no frames");
    }
    double best = distance(frames[0], obstacle_center);
    for (std::size_t i = 1; i < frames.size(); ++i) {
        best = std::min(best, distance(frames[i], obstacle_center));
    }
    return std::max(0.0, best - obstacle_radius);
}

}  // namespace reachavoid
