#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "reachavoid/rng.hpp"

namespace reachavoid {

// Ornstein-Uhlenbeck exploration noise with a per-episode linear sigma
// schedule: sigma interpolates from `sigma` to `sigma_final` over
// `decay_episodes` episodes and stays at `sigma_final` afterwards.
class OuNoise {
public:
    OuNoise(std::size_t dim, double theta, double sigma, double sigma_final,
            double dt, std::size_t decay_episodes);

    // Zeroes the internal state. Called at episode boundaries.
    void reset();

    // Sets the episode index for the decay schedule and resets the state.
    void begin_episode(std::size_t episode);

    // Advances the process and adds it into `action` (in place).
    void apply(std::span<double> action, Rng& rng);

    double current_sigma() const { return sigma_now_; }
    const std::vector<double>& state() const { return x_; }

private:
    double theta_, sigma0_, sigma_final_, dt_;
    std::size_t decay_episodes_;
    double sigma_now_;
    std::vector<double> x_;
};

}  // namespace reachavoid
