#include <cmath>
#include <vector>

#include "doctest.h"
#include "reachavoid/error.hpp"
#include "reachavoid/ou_noise.hpp"
#include "reachavoid/rng.hpp"

namespace {

using reachavoid::OuNoise;
using reachavoid::Rng;

}  // namespace

TEST_CASE("process follows the discretized OU recurrence exactly") {
    const std::size_t dim = 3;
    const double theta = 0.15, sigma = 0.2, dt = 1.0;
    OuNoise noise(dim, theta, sigma, 0.02, dt, 1000);
    noise.begin_episode(0);

    Rng rng(77), shadow(77);
    std::vector<double> x(dim, 0.0);
    for (int step = 0; step < 25; ++step) {
        std::vector<double> action(dim, 0.5);
        noise.apply(action, rng);
        for (std::size_t i = 0; i < dim; ++i) {
            x[i] += theta * (0.0 - x[i]) * dt +
                    sigma * std::sqrt(dt) * shadow.normal();
            CHECK(action[i] == doctest::Approx(0.5 + x[i]).epsilon(1e-12));
            CHECK(noise.state()[i] == doctest::Approx(x[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("sigma decays linearly across episodes then clamps") {
    OuNoise noise(7, 0.15, 0.2, 0.02, 1.0, 1000);
    noise.begin_episode(0);
    CHECK(noise.current_sigma() == doctest::Approx(0.2));
    noise.begin_episode(250);
    CHECK(noise.current_sigma() == doctest::Approx(0.155));
    noise.begin_episode(500);
    CHECK(noise.current_sigma() == doctest::Approx(0.11));
    noise.begin_episode(1000);
    CHECK(noise.current_sigma() == doctest::Approx(0.02));
    noise.begin_episode(5000);
    CHECK(noise.current_sigma() == doctest::Approx(0.02));
}

TEST_CASE("zero decay horizon keeps sigma constant") {
    OuNoise noise(2, 0.15, 0.3, 0.02, 1.0, 0);
    noise.begin_episode(0);
    CHECK(noise.current_sigma() == doctest::Approx(0.3));
    noise.begin_episode(10000);
    CHECK(noise.current_sigma() == doctest::Approx(0.3));
}

TEST_CASE("reset and begin_episode zero the state") {
    OuNoise noise(4, 0.15, 0.2, 0.02, 1.0, 1000);
    noise.begin_episode(0);
    Rng rng(3);
    std::vector<double> action(4, 0.0);
    noise.apply(action, rng);
    bool any_nonzero = false;
    for (const double v : noise.state()) any_nonzero |= v != 0.0;
    CHECK(any_nonzero);

    noise.reset();
    for (const double v : noise.state()) CHECK(v == 0.0);

    noise.apply(action, rng);
    noise.begin_episode(7);
    for (const double v : noise.state()) CHECK(v == 0.0);
}

TEST_CASE("long-run samples stay zero-mean at fixed sigma") {
    OuNoise noise(1, 0.15, 0.2, 0.2, 1.0, 0);
    noise.begin_episode(0);
    Rng rng(11);
    double sum = 0.0;
    const int steps = 20000;
    for (int i = 0; i < steps; ++i) {
        std::vector<double> action(1, 0.0);
        noise.apply(action, rng);
        sum += action[0];
    }
    // Stationary sd is sigma*sqrt(dt/(1-(1-theta*dt)^2)) ~ 0.38; the mean of
    // 20k correlated draws stays well inside 0.05 for a healthy process.
    CHECK(std::abs(sum / steps) < 0.05);
}

TEST_CASE("dimension and argument validation") {
    CHECK_THROWS_AS(OuNoise(0, 0.15, 0.2, 0.02, 1.0, 10),
                    reachavoid::DomainError);
    CHECK_THROWS_AS(OuNoise(3, 0.15, 0.2, 0.02, 0.0, 10),
                    reachavoid::DomainError);
    OuNoise noise(3, 0.15, 0.2, 0.02, 1.0, 10);
    noise.begin_episode(0);
    Rng rng(1);
    std::vector<double> wrong(2, 0.0);
    CHECK_THROWS_AS(noise.apply(wrong, rng), reachavoid::ShapeError);
}
