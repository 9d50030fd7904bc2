#include <cmath>
#include <vector>

#include "doctest.h"
#include "reachavoid/arm_model.hpp"
#include "reachavoid/error.hpp"
#include "reachavoid/rng.hpp"

namespace {

using reachavoid::ArmModel;
using reachavoid::FramePositions;
using reachavoid::Joints;
using reachavoid::Vec3;
using reachavoid::forward_kinematics;
using reachavoid::kNumFrames;
using reachavoid::kNumJoints;

void check_vec(Vec3 got, double x, double y, double z, double tol) {
    CHECK(std::abs(got.x - x) < tol);
    CHECK(std::abs(got.y - y) < tol);
    CHECK(std::abs(got.z - z) < tol);
}

}  // namespace

TEST_CASE("zero configuration puts the tooltip at the published flange point") {
    const ArmModel arm = ArmModel::panda();
    const Joints q = {0, 0, 0, 0, 0, 0, 0};
    const FramePositions f = forward_kinematics(arm, q);
    // Link-length bookkeeping at q = 0: x = 0.0825 - 0.0825 + 0.088,
    // z = 0.333 + 0.316 + 0.384 - 0.107.
    CHECK(std::abs(f.back().x - 0.088) < 1e-12);
    CHECK(std::abs(f.back().y - 0.0) < 1e-12);
    CHECK(std::abs(f.back().z - 0.926) < 1e-12);
    CHECK(std::abs(f[0].z - 0.333) < 1e-12);
}

TEST_CASE("home pose matches the frozen chain values") {
    const ArmModel arm = ArmModel::panda();
    const FramePositions f = forward_kinematics(arm, ArmModel::home_pose());
    check_vec(f.back(), 0.306890566593, 0.0, 0.590282052303, 1e-9);
    check_vec(f[2], -0.223445742855, 0.0, 0.556445742855, 1e-9);
    check_vec(f[3], -0.165109433407, 0.0, 0.614782052303, 1e-9);
    check_vec(f[6], 0.306890566593, 0.0, 0.697282052303, 1e-9);
}

TEST_CASE("random configurations match an externally computed chain") {
    // Expected positions computed with an independent matrix implementation
    // of the same (a, alpha, d) table and frozen here.
    struct Case {
        Joints q;
        Vec3 tip;
        Vec3 frame3;
    };
    const Case cases[] = {
        {{-1.6743998958, 0.4439500713, -0.1706998705, -0.7160336655,
          -0.7566264131, 1.9623054916, 2.1128818284},
         {-0.176619251923, -0.633461276523, 0.822857669056},
         {-0.035568723212, -0.206574165248, 0.583448058849}},
        {{-1.6826482752, 0.4847922903, -1.0518793059, 2.5819460756,
          2.1895773662, 0.9177393466, 1.3180332688},
         {0.038326540576, -0.050802806965, 0.195656236343},
         {-0.091669838224, -0.174321489767, 0.593520457863}},
        {{0.0790286478, 1.0340786906, -0.2692026825, -0.8912446306,
          -1.1582866853, -1.8484833676, 0.1346384524},
         {0.673835994564, 0.098038100312, 0.415970255542},
         {0.312989883240, 0.002776151748, 0.426230230993}},
        {{-0.3603032758, 0.5177786360, -2.5406050868, -0.2891687379,
          -0.7031009968, -2.0574369117, 0.4947387985},
         {0.338901765857, -0.208519125213, 0.928174587391},
         {0.074586352054, -0.077951515038, 0.641257501759}},
    };
    const ArmModel arm = ArmModel::panda();
    for (const Case& c : cases) {
        const FramePositions f = forward_kinematics(arm, c.q);
        check_vec(f.back(), c.tip.x, c.tip.y, c.tip.z, 1e-9);
        check_vec(f[3], c.frame3.x, c.frame3.y, c.frame3.z, 1e-9);
    }
}

TEST_CASE("base joint rotation preserves radius and height") {
    const ArmModel arm = ArmModel::panda();
    Joints q = ArmModel::home_pose();
    const FramePositions f0 = forward_kinematics(arm, q);
    const double r0 = std::hypot(f0.back().x, f0.back().y);
    for (const double delta : {-1.2, -0.3, 0.4, 1.7}) {
        Joints rotated = q;
        rotated[0] += delta;
        const FramePositions f = forward_kinematics(arm, rotated);
        CHECK(std::hypot(f.back().x, f.back().y) ==
              doctest::Approx(r0).epsilon(1e-12));
        CHECK(f.back().z == doctest::Approx(f0.back().z).epsilon(1e-12));
    }
}

TEST_CASE("wrist roll leaves the tooltip fixed") {
    // The tooltip offset is purely along the joint-7 axis, so q7 cannot
    // move it.
    const ArmModel arm = ArmModel::panda();
    Joints q = ArmModel::home_pose();
    const Vec3 tip0 = forward_kinematics(arm, q).back();
    for (const double q7 : {-2.0, -0.5, 0.8, 2.5}) {
        q[6] = q7;
        const Vec3 tip = forward_kinematics(arm, q).back();
        CHECK(reachavoid::distance(tip, tip0) < 1e-12);
    }
}

TEST_CASE("rigid link lengths are configuration invariants") {
    const ArmModel arm = ArmModel::panda();
    reachavoid::Rng rng(2026);
    for (int trial = 0; trial < 20; ++trial) {
        Joints q;
        for (std::size_t i = 0; i < kNumJoints; ++i) {
            q[i] = rng.uniform(-0.9, 0.9) * arm.position_limit[i];
        }
        const FramePositions f = forward_kinematics(arm, q);
        CHECK(reachavoid::norm(f[0]) == doctest::Approx(0.333).epsilon(1e-12));
        CHECK(reachavoid::distance(f[7], f[6]) ==
              doctest::Approx(0.107).epsilon(1e-12));
        CHECK(reachavoid::distance(f[1], f[0]) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("joint limits are symmetric and enforced") {
    const ArmModel arm = ArmModel::panda();
    Joints q = {0, 0, 0, 0, 0, 0, 0};

    q[1] = arm.position_limit[1];
    CHECK(arm.within_limits(q));
    CHECK_NOTHROW(forward_kinematics(arm, q));

    q[1] = arm.position_limit[1] + 1e-9;
    CHECK_FALSE(arm.within_limits(q));
    CHECK_THROWS_AS(forward_kinematics(arm, q), reachavoid::DomainError);

    q[1] = -arm.position_limit[1] - 1e-9;
    CHECK_THROWS_AS(forward_kinematics(arm, q), reachavoid::DomainError);

    CHECK_THROWS_AS(forward_kinematics(arm, std::vector<double>(6, 0.0)),
                    reachavoid::DomainError);
    CHECK_FALSE(arm.within_limits(std::vector<double>(8, 0.0)));

    const Joints nan_q = {0, std::nan(""), 0, 0, 0, 0, 0};
    CHECK_FALSE(arm.within_limits(nan_q));
}

TEST_CASE("obstacle distance takes the closest frame and floors at zero") {
    const std::vector<Vec3> frames = {
        {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {2.0, 0.0, 0.0}};
    const Vec3 center{1.0, 0.3, 0.0};

    // Closest frame is the middle one at distance 0.3.
    CHECK(reachavoid::distance_to_obstacle(frames, center, 0.05) ==
          doctest::Approx(0.25).epsilon(1e-12));
    // Radius swallowing the gap floors the distance.
    CHECK(reachavoid::distance_to_obstacle(frames, center, 0.3) ==
          doctest::Approx(0.0));
    CHECK(reachavoid::distance_to_obstacle(frames, center, 0.9) ==
          doctest::Approx(0.0));
    CHECK_THROWS_AS(reachavoid::distance_to_obstacle({}, center, 0.1),
                    reachavoid::DomainError);
}

TEST_CASE("target distance is the tooltip Euclidean distance") {
    CHECK(reachavoid::distance_to_target({1.0, 2.0, 2.0}, {0.0, 0.0, 0.0}) ==
          doctest::Approx(3.0));
    CHECK(reachavoid::distance_to_target({0.5, 0.0, 0.15},
                                         {0.5, 0.0, 0.15}) ==
          doctest::Approx(0.0));
}
