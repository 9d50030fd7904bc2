#pragma once

#include <cstddef>
#include <vector>

#include "reachavoid/rng.hpp"

namespace reachavoid {

// One experience tuple. state/next_state lengths must match; the action is
// the (unitless) joint-velocity command in [-1, 1]^n.
struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    double reward = 0.0;
    std::vector<double> next_state;
    bool terminal = false;
};

// Fixed-capacity ring of transitions with uniform sampling (with
// replacement). Storage grows lazily up to capacity, then the cursor wraps
// and the oldest entries are overwritten.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);

    std::size_t size() const { return store_.size(); }
    std::size_t capacity() const { return capacity_; }

    const Transition& at(std::size_t i) const { return store_[i]; }

    // Uniform indices into the current contents.
    std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

private:
    std::size_t capacity_;
    std::vector<Transition> store_;
    std::size_t cursor_ = 0;
};

}  // namespace reachavoid
