#include <vector>

#include "doctest.h"
#include "reachavoid/error.hpp"
#include "reachavoid/replay_buffer.hpp"
#include "reachavoid/rng.hpp"

namespace {

using reachavoid::ReplayBuffer;
using reachavoid::Rng;
using reachavoid::Transition;

Transition tagged(double tag) {
    Transition t;
    t.state = {tag, 0.0};
    t.action = {tag};
    t.reward = tag;
    t.next_state = {tag, 1.0};
    t.terminal = false;
    return t;
}

}  // namespace

TEST_CASE("buffer grows to capacity then overwrites the oldest entries") {
    ReplayBuffer buf(4);
    CHECK(buf.capacity() == 4);
    CHECK(buf.size() == 0);

    for (int i = 0; i < 3; ++i) buf.push(tagged(i));
    CHECK(buf.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(buf.at(i).reward == doctest::Approx(i));

    buf.push(tagged(3));
    buf.push(tagged(4));  // wraps, evicts tag 0
    buf.push(tagged(5));  // evicts tag 1
    CHECK(buf.size() == 4);
    CHECK(buf.at(0).reward == doctest::Approx(4));
    CHECK(buf.at(1).reward == doctest::Approx(5));
    CHECK(buf.at(2).reward == doctest::Approx(2));
    CHECK(buf.at(3).reward == doctest::Approx(3));
}

TEST_CASE("push preserves the full tuple") {
    ReplayBuffer buf(2);
    Transition t;
    t.state = {0.1, 0.2, 0.3};
    t.action = {-0.5, 0.5};
    t.reward = -4.04;
    t.next_state = {0.4, 0.5, 0.6};
    t.terminal = true;
    buf.push(t);
    const Transition& got = buf.at(0);
    CHECK(got.state == t.state);
    CHECK(got.action == t.action);
    CHECK(got.reward == doctest::Approx(t.reward));
    CHECK(got.next_state == t.next_state);
    CHECK(got.terminal == t.terminal);
}

TEST_CASE("sampling is uniform over current contents") {
    ReplayBuffer buf(64);
    for (int i = 0; i < 40; ++i) buf.push(tagged(i));

    Rng rng(99);
    const std::size_t draws_per_batch = 32;
    const std::size_t batches = 4000;
    std::vector<std::size_t> counts(40, 0);
    for (std::size_t b = 0; b < batches; ++b) {
        for (const std::size_t idx : buf.sample_indices(draws_per_batch, rng)) {
            REQUIRE(idx < 40);
            ++counts[idx];
        }
    }
    // Binomial counts: mean n*p, sd sqrt(n*p*(1-p)); accept within 4 sigma.
    const double n = double(draws_per_batch * batches);
    const double p = 1.0 / 40.0;
    const double mean = n * p;
    const double sd = std::sqrt(n * p * (1.0 - p));
    for (const std::size_t c : counts) {
        CHECK(std::abs(double(c) - mean) < 4.0 * sd);
    }
}

TEST_CASE("sampling more than stored still draws valid indices") {
    ReplayBuffer buf(8);
    buf.push(tagged(0));
    buf.push(tagged(1));
    Rng rng(5);
    const auto idx = buf.sample_indices(16, rng);
    CHECK(idx.size() == 16);
    for (const std::size_t i : idx) CHECK(i < 2);
}

TEST_CASE("sampling from an empty buffer is a state error") {
    ReplayBuffer buf(8);
    Rng rng(1);
    CHECK_THROWS_AS(buf.sample_indices(4, rng), reachavoid::StateError);
}

TEST_CASE("zero capacity is rejected") {
    CHECK_THROWS_AS(ReplayBuffer(0), reachavoid::DomainError);
}
