#include "reachavoid/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "reachavoid/error.hpp"

namespace reachavoid {

namespace {

constexpr char kCheckpointMagic[8] = {'R', 'A', 'C', 'K', 'P', 'T', '\0', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

std::string sizes_to_text(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(v[i]);
    }
    return s;
}

DdpgConfig validated(DdpgConfig c) {
    c.validate();
    return c;
}

std::vector<std::size_t> net_sizes(std::size_t in,
                                   const std::vector<std::size_t>& hidden,
                                   std::size_t out) {
    std::vector<std::size_t> sizes;
    sizes.reserve(hidden.size() + 2);
    sizes.push_back(in);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(out);
    return sizes;
}

}  // namespace

void DdpgConfig::validate() const {
    std::string problems;
    auto bad = [&](const std::string& msg) {
        if (!problems.empty()) problems += "; ";
        problems += msg;
    };
    if (!(gamma >= 0.0 && gamma <= 1.0)) bad("gamma must be in [0, 1]");
    if (!(tau > 0.0 && tau <= 1.0)) bad("tau must be in (0, 1]");
    if (batch_size == 0) bad("batch_size must be positive");
    if (!(actor_lr > 0.0)) bad("actor_lr must be positive");
    if (!(critic_lr > 0.0)) bad("critic_lr must be positive");
    if (buffer_capacity < batch_size)
        bad("buffer_capacity must be >= batch_size");
    if (!(action_bound_train > 0.0)) bad("action_bound_train must be positive");
    if (!(action_bound_test > 0.0)) bad("action_bound_test must be positive");
    if (!(ou_theta >= 0.0)) bad("ou_theta must be non-negative");
    if (!(ou_sigma >= 0.0)) bad("ou_sigma must be non-negative");
    if (!(ou_sigma_final >= 0.0)) bad("ou_sigma_final must be non-negative");
    if (!(ou_dt > 0.0)) bad("ou_dt must be positive");
    if (actor_hidden.empty()) bad("actor_hidden must not be empty");
    if (critic_hidden.empty()) bad("critic_hidden must not be empty");
    for (std::size_t h : actor_hidden) {
        if (h == 0) bad("actor_hidden sizes must be positive");
    }
    for (std::size_t h : critic_hidden) {
        if (h == 0) bad("critic_hidden sizes must be positive");
    }
    if (train_every == 0) bad("train_every must be positive");
    if (!problems.empty()) throw ConfigError("ddpg config: " + problems);
}

KvFile DdpgConfig::to_kv() const {
    KvFile kv;
    kv.set("gamma", format_double(gamma));
    kv.set("tau", format_double(tau));
    kv.set("batch_size", std::to_string(batch_size));
    kv.set("actor_lr", format_double(actor_lr));
    kv.set("critic_lr", format_double(critic_lr));
    kv.set("buffer_capacity", std::to_string(buffer_capacity));
    kv.set("action_bound_train", format_double(action_bound_train));
    kv.set("action_bound_test", format_double(action_bound_test));
    kv.set("ou_theta", format_double(ou_theta));
    kv.set("ou_sigma", format_double(ou_sigma));
    kv.set("ou_sigma_final", format_double(ou_sigma_final));
    kv.set("ou_dt", format_double(ou_dt));
    kv.set("noise_decay_episodes", std::to_string(noise_decay_episodes));
    kv.set("actor_hidden", sizes_to_text(actor_hidden));
    kv.set("critic_hidden", sizes_to_text(critic_hidden));
    kv.set("train_every", std::to_string(train_every));
    return kv;
}

DdpgConfig DdpgConfig::from_kv(const KvFile& kv) {
    DdpgConfig c;
    if (kv.has("gamma")) c.gamma = kv.get_double("gamma");
    if (kv.has("tau")) c.tau = kv.get_double("tau");
    if (kv.has("batch_size")) c.batch_size = kv.get_count("batch_size");
    if (kv.has("actor_lr")) c.actor_lr = kv.get_double("actor_lr");
    if (kv.has("critic_lr")) c.critic_lr = kv.get_double("critic_lr");
    if (kv.has("buffer_capacity"))
        c.buffer_capacity = kv.get_count("buffer_capacity");
    if (kv.has("action_bound_train"))
        c.action_bound_train = kv.get_double("action_bound_train");
    if (kv.has("action_bound_test"))
        c.action_bound_test = kv.get_double("action_bound_test");
    if (kv.has("ou_theta")) c.ou_theta = kv.get_double("ou_theta");
    if (kv.has("ou_sigma")) c.ou_sigma = kv.get_double("ou_sigma");
    if (kv.has("ou_sigma_final"))
        c.ou_sigma_final = kv.get_double("ou_sigma_final");
    if (kv.has("ou_dt")) c.ou_dt = kv.get_double("ou_dt");
    if (kv.has("noise_decay_episodes"))
        c.noise_decay_episodes = kv.get_count("noise_decay_episodes");
    if (kv.has("actor_hidden")) c.actor_hidden = kv.get_counts("actor_hidden");
    if (kv.has("critic_hidden"))
        c.critic_hidden = kv.get_counts("critic_hidden");
    if (kv.has("train_every")) c.train_every = kv.get_count("train_every");
    c.validate();
    return c;
}

DdpgConfig DdpgConfig::load(const std::string& path) {
    return from_kv(KvFile::parse_file(path));
}

void DdpgConfig::save(const std::string& path) const {
    to_kv().save(path);
}

Agent::Agent(std::size_t state_dim, std::size_t action_dim, DdpgConfig config,
             std::uint64_t seed)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      config_(validated(std::move(config))),
      seed_(seed),
      rng_(Rng::derive(seed, 0x61676e74)),
      actor_(net_sizes(state_dim, config_.actor_hidden, action_dim),
             Activation::Tanh, rng_),
      critic_(net_sizes(state_dim + action_dim, config_.critic_hidden, 1),
              Activation::Identity, rng_),
      target_actor_(actor_),
      target_critic_(critic_),
      actor_opt_(AdamState::for_net(actor_, config_.actor_lr)),
      critic_opt_(AdamState::for_net(critic_, config_.critic_lr)),
      buffer_(config_.buffer_capacity),
      noise_(action_dim, config_.ou_theta, config_.ou_sigma,
             config_.ou_sigma_final, config_.ou_dt,
             config_.noise_decay_episodes) {
    if (state_dim_ == 0 || action_dim_ == 0) {
        throw ShapeError("agent needs positive state and action dimensions");
    }
}

std::vector<double> Agent::act(std::span<const double> state, bool explore) {
    if (state.size() != state_dim_) {
        throw ShapeError("act: state length " + std::to_string(state.size()) +
                         " != " + std::to_string(state_dim_));
    }
    std::vector<double> a = actor_.infer(state);
    const double b = config_.action_bound_train;
    for (double& v : a) v *= b;
    if (explore) {
        noise_.apply(a, rng_);
        for (double& v : a) v = std::clamp(v, -b, b);
    }
    return a;
}

void Agent::remember(Transition t) {
    if (t.state.size() != state_dim_ || t.next_state.size() != state_dim_) {
        throw ShapeError("remember: transition state length mismatch");
    }
    if (t.action.size() != action_dim_) {
        throw ShapeError("remember: transition action length mismatch");
    }
    buffer_.push(std::move(t));
}

void Agent::begin_episode(std::size_t episode) {
    noise_.begin_episode(episode);
    episodes_seen_ = std::max(episodes_seen_, episode + 1);
}

std::vector<double> Agent::critic_targets(
    std::span<const Transition* const> batch) const {
    const std::size_t n = batch.size();
    if (n == 0) return {};
    Matrix next_states(n, state_dim_);
    for (std::size_t i = 0; i < n; ++i) {
        std::memcpy(next_states.row(i), batch[i]->next_state.data(),
                    state_dim_ * sizeof(double));
    }
    const Matrix next_actions = target_actor_.infer_batch(next_states);

    Matrix critic_in(n, state_dim_ + action_dim_);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = critic_in.row(i);
        std::memcpy(row, next_states.row(i), state_dim_ * sizeof(double));
        std::memcpy(row + state_dim_, next_actions.row(i),
                    action_dim_ * sizeof(double));
    }
    const Matrix next_q = target_critic_.infer_batch(critic_in);

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double bootstrap =
            batch[i]->terminal ? 0.0 : config_.gamma * next_q.data[i];
        y[i] = batch[i]->reward + bootstrap;
    }
    return y;
}

void Agent::apply_actor_gradient(const Matrix& states,
                                 const Matrix& dq_daction) {
    ForwardTrace trace;
    actor_.forward_batch(states, trace);
    if (dq_daction.rows != states.rows || dq_daction.cols != action_dim_) {
        throw ShapeError("apply_actor_gradient: gradient shape mismatch");
    }
    // Adam descends, so feeding -dQ/da ascends the critic estimate (the
    // deterministic policy-gradient step).
    Matrix upstream(dq_daction.rows, dq_daction.cols);
    for (std::size_t i = 0; i < dq_daction.size(); ++i) {
        upstream.data[i] = -dq_daction.data[i];
    }
    const Gradients g = actor_.backward_batch(trace, upstream);
    adam_step(actor_, g, actor_opt_);
}

TrainStepResult Agent::train_step() {
    TrainStepResult result;
    const std::size_t n = config_.batch_size;
    if (buffer_.size() < n) return result;

    const std::vector<std::size_t> idx = buffer_.sample_indices(n, rng_);
    std::vector<const Transition*> batch(n);
    for (std::size_t i = 0; i < n; ++i) batch[i] = &buffer_.at(idx[i]);

    const std::vector<double> y = critic_targets(batch);

    Matrix states(n, state_dim_);
    Matrix critic_in(n, state_dim_ + action_dim_);
    for (std::size_t i = 0; i < n; ++i) {
        std::memcpy(states.row(i), batch[i]->state.data(),
                    state_dim_ * sizeof(double));
        double* row = critic_in.row(i);
        std::memcpy(row, batch[i]->state.data(), state_dim_ * sizeof(double));
        std::memcpy(row + state_dim_, batch[i]->action.data(),
                    action_dim_ * sizeof(double));
    }

    // Critic regression toward the bootstrap targets (squared-error mean).
    ForwardTrace critic_trace;
    const Matrix q = critic_.forward_batch(critic_in, critic_trace);
    result.critic_loss = mse(std::span(q.data), std::span(y));
    Matrix dloss_dq(n, 1);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        dloss_dq.data[i] = 2.0 * (q.data[i] - y[i]) * inv_n;
    }
    const Gradients critic_grads =
        critic_.backward_batch(critic_trace, dloss_dq);
    adam_step(critic_, critic_grads, critic_opt_);

    // Actor ascent on mean Q(s, mu(s)) with the updated critic.
    ForwardTrace actor_trace;
    const Matrix policy_actions = actor_.forward_batch(states, actor_trace);
    Matrix policy_in(n, state_dim_ + action_dim_);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = policy_in.row(i);
        std::memcpy(row, states.row(i), state_dim_ * sizeof(double));
        std::memcpy(row + state_dim_, policy_actions.row(i),
                    action_dim_ * sizeof(double));
    }
    ForwardTrace q_trace;
    const Matrix q_policy = critic_.forward_batch(policy_in, q_trace);
    double mean_q = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_q += q_policy.data[i];
    result.actor_objective = mean_q * inv_n;

    Matrix dmean_dq(n, 1);
    std::fill(dmean_dq.data.begin(), dmean_dq.data.end(), inv_n);
    const Gradients critic_input_grads =
        critic_.backward_batch(q_trace, dmean_dq, /*want_input_grad=*/true);
    Matrix dq_daction(n, action_dim_);
    for (std::size_t i = 0; i < n; ++i) {
        std::memcpy(dq_daction.row(i),
                    critic_input_grads.input.row(i) + state_dim_,
                    action_dim_ * sizeof(double));
    }
    Matrix upstream(n, action_dim_);
    for (std::size_t i = 0; i < upstream.size(); ++i) {
        upstream.data[i] = -dq_daction.data[i];
    }
    const Gradients actor_grads =
        actor_.backward_batch(actor_trace, upstream);
    adam_step(actor_, actor_grads, actor_opt_);

    soft_update(actor_, target_actor_, config_.tau);
    soft_update(critic_, target_critic_, config_.tau);

    result.updated = true;
    return result;
}

void Agent::save_checkpoint(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_u32(os, kCheckpointVersion);
    write_u64(os, seed_);
    write_u64(os, state_dim_);
    write_u64(os, action_dim_);
    write_u64(os, episodes_seen_);
    write_u64(os, total_env_steps_);
    const std::string cfg = config_.to_kv().to_text();
    write_u64(os, cfg.size());
    os.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
    actor_.save(os);
    critic_.save(os);
    target_actor_.save(os);
    target_critic_.save(os);
    if (!os) throw IoError("write failed: " + path);
}

Agent Agent::load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw IoError("not a checkpoint file: " + path);
    }
    const std::uint32_t version = read_u32(is);
    if (version != kCheckpointVersion) {
        throw IoError("unsupported checkpoint version " +
                      std::to_string(version));
    }
    const std::uint64_t seed = read_u64(is);
    const std::uint64_t state_dim = read_u64(is);
    const std::uint64_t action_dim = read_u64(is);
    const std::uint64_t episodes = read_u64(is);
    const std::uint64_t steps = read_u64(is);
    const std::uint64_t cfg_len = read_u64(is);
    if (!is || state_dim == 0 || action_dim == 0 || cfg_len > (1u << 20)) {
        throw IoError("corrupt checkpoint header: " + path);
    }
    std::string cfg_text(cfg_len, '\0');
    is.read(cfg_text.data(), static_cast<std::streamsize>(cfg_len));
    if (!is) throw IoError("truncated checkpoint: " + path);
    const DdpgConfig cfg =
        DdpgConfig::from_kv(KvFile::parse_text(cfg_text, path + "#config"));

    Agent agent(state_dim, action_dim, cfg, seed);
    agent.actor_ = DenseNet::load(is);
    agent.critic_ = DenseNet::load(is);
    agent.target_actor_ = DenseNet::load(is);
    agent.target_critic_ = DenseNet::load(is);
    if (!agent.actor_.same_shape(agent.target_actor_) ||
        !agent.critic_.same_shape(agent.target_critic_) ||
        agent.actor_.input_size() != state_dim ||
        agent.actor_.output_size() != action_dim ||
        agent.critic_.input_size() != state_dim + action_dim) {
        throw IoError("checkpoint networks do not match header dims: " + path);
    }
    agent.actor_opt_ = AdamState::for_net(agent.actor_, cfg.actor_lr);
    agent.critic_opt_ = AdamState::for_net(agent.critic_, cfg.critic_lr);
    agent.episodes_seen_ = episodes;
    agent.total_env_steps_ = steps;
    return agent;
}

}  // namespace reachavoid
