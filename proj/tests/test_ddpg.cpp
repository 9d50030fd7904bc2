#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "reachavoid/ddpg.hpp"
#include "reachavoid/error.hpp"
#include "reachavoid/rng.hpp"

namespace {

using reachavoid::Agent;
using reachavoid::DdpgConfig;
using reachavoid::Matrix;
using reachavoid::Rng;
using reachavoid::Transition;

constexpr std::size_t kStateDim = 4;
constexpr std::size_t kActionDim = 2;

DdpgConfig tiny_config() {
    DdpgConfig c;
    c.batch_size = 8;
    c.buffer_capacity = 256;
    c.actor_hidden = {16, 16};
    c.critic_hidden = {16, 16};
    return c;
}

Transition random_transition(Rng& rng, bool terminal) {
    Transition t;
    t.state.resize(kStateDim);
    t.next_state.resize(kStateDim);
    t.action.resize(kActionDim);
    for (double& v : t.state) v = rng.uniform(-1.0, 1.0);
    for (double& v : t.next_state) v = rng.uniform(-1.0, 1.0);
    for (double& v : t.action) v = rng.uniform(-1.0, 1.0);
    t.reward = rng.uniform(-1.0, 1.0);
    t.terminal = terminal;
    return t;
}

double mean_actor_output(Agent& agent, const Matrix& states) {
    double sum = 0.0;
    for (std::size_t r = 0; r < states.rows; ++r) {
        const auto out = agent.actor().infer(
            std::span<const double>(states.row(r), states.cols));
        for (const double v : out) sum += v;
    }
    return sum / double(states.rows * kActionDim);
}

}  // namespace

TEST_CASE("targets start as exact copies of the online networks") {
    Agent agent(kStateDim, kActionDim, tiny_config(), 5);
    CHECK(agent.actor().equal_parameters(agent.target_actor()));
    CHECK(agent.critic().equal_parameters(agent.target_critic()));
    CHECK_FALSE(agent.actor().equal_parameters(
        Agent(kStateDim, kActionDim, tiny_config(), 6).actor()));
}

TEST_CASE("critic targets match a composed target-network forward pass") {
    Agent agent(kStateDim, kActionDim, tiny_config(), 17);
    Rng rng(18);
    std::vector<Transition> batch;
    for (int i = 0; i < 6; ++i) {
        batch.push_back(random_transition(rng, i % 3 == 0));
    }
    std::vector<const Transition*> ptrs;
    for (const auto& t : batch) ptrs.push_back(&t);

    const std::vector<double> y = agent.critic_targets(ptrs);
    REQUIRE(y.size() == batch.size());

    for (std::size_t i = 0; i < batch.size(); ++i) {
        const std::vector<double> mu =
            agent.target_actor().infer(batch[i].next_state);
        std::vector<double> critic_in(batch[i].next_state);
        critic_in.insert(critic_in.end(), mu.begin(), mu.end());
        const double q = agent.target_critic().infer(critic_in)[0];
        const double want =
            batch[i].reward +
            (batch[i].terminal ? 0.0 : agent.config().gamma * q);
        CHECK(y[i] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("act scales by the training bound and clips exploration") {
    DdpgConfig cfg = tiny_config();
    cfg.action_bound_train = 0.7;
    Agent agent(kStateDim, kActionDim, cfg, 23);

    const std::vector<double> state = {0.3, -0.2, 0.9, -0.5};
    const std::vector<double> greedy = agent.act(state, false);
    const std::vector<double> raw = agent.actor().infer(state);
    REQUIRE(greedy.size() == kActionDim);
    for (std::size_t i = 0; i < kActionDim; ++i) {
        CHECK(greedy[i] == doctest::Approx(0.7 * raw[i]).epsilon(1e-12));
    }

    agent.begin_episode(0);
    for (int trial = 0; trial < 200; ++trial) {
        for (const double v : agent.act(state, true)) {
            CHECK(std::abs(v) <= 0.7 + 1e-12);
        }
    }

    CHECK_THROWS_AS(agent.act(std::vector<double>{1.0, 2.0}, false),
                    reachavoid::ShapeError);
}

TEST_CASE("train_step is a no-op until one batch is buffered") {
    Agent agent(kStateDim, kActionDim, tiny_config(), 29);
    const reachavoid::DenseNet actor_before = agent.actor();
    Rng rng(30);
    for (int i = 0; i < 7; ++i) {
        agent.remember(random_transition(rng, false));
        const auto result = agent.train_step();
        CHECK_FALSE(result.updated);
    }
    CHECK(agent.actor().equal_parameters(actor_before));

    agent.remember(random_transition(rng, false));
    const auto result = agent.train_step();
    CHECK(result.updated);
    CHECK_FALSE(agent.actor().equal_parameters(actor_before));
    CHECK(result.critic_loss >= 0.0);
    CHECK(std::isfinite(result.critic_loss));
    CHECK(std::isfinite(result.actor_objective));
}

TEST_CASE("one train_step soft-updates targets against the fresh online nets") {
    DdpgConfig cfg = tiny_config();
    cfg.tau = 0.25;
    Agent agent(kStateDim, kActionDim, cfg, 31);
    const reachavoid::DenseNet online_before = agent.actor();
    Rng rng(32);
    for (int i = 0; i < 8; ++i) agent.remember(random_transition(rng, false));
    REQUIRE(agent.train_step().updated);

    // Targets started equal to the pre-update online nets, so after one
    // update: target = tau * online_new + (1 - tau) * online_old.
    const auto& online_new = agent.actor();
    const auto& target = agent.target_actor();
    for (std::size_t l = 0; l < target.num_layers(); ++l) {
        for (std::size_t i = 0; i < target.weights()[l].size(); ++i) {
            const double want =
                0.25 * online_new.weights()[l].data[i] +
                0.75 * online_before.weights()[l].data[i];
            CHECK(target.weights()[l].data[i] ==
                  doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("critic regression drives the loss down on a fixed target") {
    Agent agent(kStateDim, kActionDim, tiny_config(), 37);
    Rng rng(38);
    // Terminal transitions make y = reward exactly; reward is a simple
    // function of the state so the critic has something learnable.
    for (int i = 0; i < 64; ++i) {
        Transition t = random_transition(rng, true);
        t.reward = t.state[0];
        agent.remember(t);
    }
    const double first = agent.train_step().critic_loss;
    double last = first;
    for (int i = 0; i < 400; ++i) last = agent.train_step().critic_loss;
    CHECK(last < 0.5 * first);
    CHECK(last < 0.05);
}

TEST_CASE("actor gradient application ascends the supplied direction") {
    Agent agent(kStateDim, kActionDim, tiny_config(), 41);
    Rng rng(42);
    Matrix states(8, kStateDim);
    for (double& v : states.data) v = rng.uniform(-1.0, 1.0);

    const double before = mean_actor_output(agent, states);
    Matrix dq_up(8, kActionDim);
    std::fill(dq_up.data.begin(), dq_up.data.end(), 1.0);
    for (int i = 0; i < 50; ++i) agent.apply_actor_gradient(states, dq_up);
    const double raised = mean_actor_output(agent, states);
    CHECK(raised > before);

    Matrix dq_down(8, kActionDim);
    std::fill(dq_down.data.begin(), dq_down.data.end(), -1.0);
    for (int i = 0; i < 120; ++i) agent.apply_actor_gradient(states, dq_down);
    const double lowered = mean_actor_output(agent, states);
    CHECK(lowered < raised);

    Matrix wrong(8, kActionDim + 1);
    CHECK_THROWS_AS(agent.apply_actor_gradient(states, wrong),
                    reachavoid::ShapeError);
}

TEST_CASE("same seed and data give bit-identical learners") {
    Agent a(kStateDim, kActionDim, tiny_config(), 43);
    Agent b(kStateDim, kActionDim, tiny_config(), 43);
    Rng rng(44);
    std::vector<Transition> stream;
    for (int i = 0; i < 32; ++i) stream.push_back(random_transition(rng, i % 5 == 0));
    for (const auto& t : stream) {
        a.remember(t);
        b.remember(t);
    }
    a.begin_episode(0);
    b.begin_episode(0);
    for (int i = 0; i < 25; ++i) {
        a.train_step();
        b.train_step();
    }
    CHECK(a.actor().equal_parameters(b.actor()));
    CHECK(a.critic().equal_parameters(b.critic()));
    CHECK(a.target_actor().equal_parameters(b.target_actor()));
    CHECK(a.target_critic().equal_parameters(b.target_critic()));

    const std::vector<double> state = {0.1, 0.2, 0.3, 0.4};
    CHECK(a.act(state, true) == b.act(state, true));
}

TEST_CASE("checkpoint round-trip preserves networks, config and counters") {
    DdpgConfig cfg = tiny_config();
    cfg.gamma = 0.95;
    cfg.action_bound_test = 0.33;
    Agent agent(kStateDim, kActionDim, cfg, 47);
    Rng rng(48);
    for (int i = 0; i < 16; ++i) agent.remember(random_transition(rng, false));
    agent.begin_episode(0);
    for (int i = 0; i < 10; ++i) {
        agent.note_env_step();
        agent.train_step();
    }
    agent.begin_episode(4);

    const std::filesystem::path path =
        std::filesystem::temp_directory_path() / "ra_test_agent.rackpt";
    agent.save_checkpoint(path.string());
    Agent back = Agent::load_checkpoint(path.string());
    std::filesystem::remove(path);

    CHECK(back.state_dim() == kStateDim);
    CHECK(back.action_dim() == kActionDim);
    CHECK(back.seed() == 47);
    CHECK(back.episodes_seen() == agent.episodes_seen());
    CHECK(back.total_env_steps() == 10);
    CHECK(back.config().to_kv().to_text() == agent.config().to_kv().to_text());
    CHECK(back.actor().equal_parameters(agent.actor()));
    CHECK(back.critic().equal_parameters(agent.critic()));
    CHECK(back.target_actor().equal_parameters(agent.target_actor()));
    CHECK(back.target_critic().equal_parameters(agent.target_critic()));

    const std::vector<double> state = {0.5, -0.5, 0.25, 0.0};
    CHECK(back.act(state, false) == agent.act(state, false));
}

TEST_CASE("checkpoint loader rejects foreign files") {
    const std::filesystem::path path =
        std::filesystem::temp_directory_path() / "ra_test_bogus.rackpt";
    std::ofstream(path) << "not a checkpoint";
    CHECK_THROWS_AS(Agent::load_checkpoint(path.string()), reachavoid::IoError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(Agent::load_checkpoint("/nonexistent/x.rackpt"),
                    reachavoid::IoError);
}

TEST_CASE("config validation lists every violation at once") {
    DdpgConfig cfg = tiny_config();
    cfg.gamma = 1.5;
    cfg.tau = 0.0;
    cfg.batch_size = 0;
    try {
        cfg.validate();
        FAIL("expected ConfigError");
    } catch (const reachavoid::ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("gamma") != std::string::npos);
        CHECK(msg.find("tau") != std::string::npos);
        CHECK(msg.find("batch_size") != std::string::npos);
    }

    DdpgConfig ok = tiny_config();
    CHECK_NOTHROW(ok.validate());
    CHECK_THROWS_AS(Agent(0, kActionDim, tiny_config(), 1),
                    reachavoid::ShapeError);
}

TEST_CASE("ddpg config kv round-trip") {
    DdpgConfig cfg = tiny_config();
    cfg.gamma = 0.97;
    cfg.noise_decay_episodes = 123;
    cfg.actor_hidden = {32, 8};
    const DdpgConfig back = DdpgConfig::from_kv(cfg.to_kv());
    CHECK(back.to_kv().to_text() == cfg.to_kv().to_text());
    CHECK(back.gamma == doctest::Approx(0.97));
    CHECK(back.actor_hidden == std::vector<std::size_t>{32, 8});
}
