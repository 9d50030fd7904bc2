#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reachavoid/adam.hpp"
#include "reachavoid/dense_net.hpp"
#include "reachavoid/kv.hpp"
#include "reachavoid/ou_noise.hpp"
#include "reachavoid/replay_buffer.hpp"
#include "reachavoid/rng.hpp"

namespace reachavoid {

// Learner hyperparameters. Defaults follow the experiment setup: lr 1e-3,
// batch 64, actor 300-300-30 / critic 300-300-10 hidden stacks, tanh actor
// head, soft target tracking with tau << 1.
struct DdpgConfig {
    double gamma = 0.99;
    double tau = 0.001;
    std::size_t batch_size = 64;
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    std::size_t buffer_capacity = 1'000'000;
    double action_bound_train = 1.0;
    double action_bound_test = 0.2;
    double ou_theta = 0.15;
    double ou_sigma = 0.2;
    double ou_sigma_final = 0.02;
    double ou_dt = 1.0;
    std::size_t noise_decay_episodes = 1000;
    std::vector<std::size_t> actor_hidden = {300, 300, 30};
    std::vector<std::size_t> critic_hidden = {300, 300, 10};
    std::size_t train_every = 1;  // learner updates per environment step

    void validate() const;  // throws ConfigError listing every violation

    KvFile to_kv() const;
    static DdpgConfig from_kv(const KvFile& kv);
    static DdpgConfig load(const std::string& path);
    void save(const std::string& path) const;
};

struct TrainStepResult {
    bool updated = false;  // false when the buffer is still below one batch
    double critic_loss = 0.0;
    double actor_objective = 0.0;  // mean Q(s, mu(s)) over the batch
};

// DDPG learner: actor/critic, time-delayed target copies, replay buffer and
// exploration noise. Construction copies the online nets into the targets.
class Agent {
public:
    Agent(std::size_t state_dim, std::size_t action_dim, DdpgConfig config,
          std::uint64_t seed);

    // Policy action for `state`; adds exploration noise when `explore` and
    // clips to the training action bound.
    std::vector<double> act(std::span<const double> state, bool explore);

    // Stores one transition, overwriting the oldest at capacity.
    void remember(Transition t);

    // Bootstrap targets y_i = r_i + gamma * Q'(s', mu'(s')) for a batch;
    // the bootstrap term is dropped on terminal transitions.
    std::vector<double> critic_targets(
        std::span<const Transition* const> batch) const;

    // One learner update: uniform minibatch, critic regression to the
    // bootstrap targets, deterministic policy-gradient ascent on the actor,
    // then soft target updates. No-op while the buffer holds < batch_size.
    TrainStepResult train_step();

    // Resets exploration noise and applies its decay schedule.
    void begin_episode(std::size_t episode);

    const DenseNet& actor() const { return actor_; }
    const DenseNet& critic() const { return critic_; }
    const DenseNet& target_actor() const { return target_actor_; }
    const DenseNet& target_critic() const { return target_critic_; }
    DenseNet& mutable_actor() { return actor_; }
    DenseNet& mutable_critic() { return critic_; }

    const ReplayBuffer& buffer() const { return buffer_; }
    const DdpgConfig& config() const { return config_; }
    std::size_t state_dim() const { return state_dim_; }
    std::size_t action_dim() const { return action_dim_; }
    std::uint64_t seed() const { return seed_; }

    std::size_t episodes_seen() const { return episodes_seen_; }
    std::uint64_t total_env_steps() const { return total_env_steps_; }
    void note_env_step() { ++total_env_steps_; }

    // Ascends mean Q along a caller-supplied d(mean Q)/d(action) batch.
    // The publicly used path in train_step; exposed for direct testing of
    // the update direction.
    void apply_actor_gradient(const Matrix& states, const Matrix& dq_daction);

    // --- checkpointing: the four networks + config + seed + counters ---
    void save_checkpoint(const std::string& path) const;
    static Agent load_checkpoint(const std::string& path);

private:
    std::size_t state_dim_, action_dim_;
    DdpgConfig config_;
    std::uint64_t seed_;
    Rng rng_;
    DenseNet actor_, critic_, target_actor_, target_critic_;
    AdamState actor_opt_, critic_opt_;
    ReplayBuffer buffer_;
    OuNoise noise_;
    std::size_t episodes_seen_ = 0;
    std::uint64_t total_env_steps_ = 0;
};

}  // namespace reachavoid
