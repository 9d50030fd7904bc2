#include "reachavoid/ou_noise.hpp"

#include <algorithm>
#include <cmath>

#include "reachavoid/error.hpp"

namespace reachavoid {

OuNoise::OuNoise(std::size_t dim, double theta, double sigma,
                 double sigma_final, double dt, std::size_t decay_episodes)
    : theta_(theta),
      sigma0_(sigma),
      sigma_final_(sigma_final),
      dt_(dt),
      decay_episodes_(decay_episodes),
      sigma_now_(sigma),
      x_(dim, 0.0) {
    if (dim == 0) throw DomainError("noise dimension must be positive");
    if (dt <= 0.0) throw DomainError("noise dt must be positive");
}

void OuNoise::reset() { std::fill(x_.begin(), x_.end(), 0.0); }

void OuNoise::begin_episode(std::size_t episode) {
    if (decay_episodes_ == 0) {
        sigma_now_ = sigma0_;
    } else {
        const double frac = std::min(
            1.0, static_cast<double>(episode) /
                     static_cast<double>(decay_episodes_));
        sigma_now_ = sigma0_ + (sigma_final_ - sigma0_) * frac;
    }
    reset();
}

void OuNoise::apply(std::span<double> action, Rng& rng) {
    if (action.size() != x_.size()) {
        throw ShapeError("noise dimension mismatch");
    }
    const double sq_dt = std::sqrt(dt_);
    for (std::size_t i = 0; i < x_.size(); ++i) {
        x_[i] += theta_ * (0.0 - x_[i]) * dt_ + sigma_now_ * sq_dt * rng.normal();
        action[i] += x_[i];
    }
}

}  // namespace reachavoid
