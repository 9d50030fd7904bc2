#include "reachavoid/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "reachavoid/error.hpp"
#include "reachavoid/kv.hpp"
#include "reachavoid/rng.hpp"

namespace reachavoid {

namespace {

// Seed-stream tags keep the independent random streams (training episodes,
// selection evals, evaluation episodes, scenario draws) from colliding.
constexpr std::uint64_t kTrainEpisodeStream = 0x100000;
constexpr std::uint64_t kSelectionStream = 0x200000;
constexpr std::uint64_t kEvalEpisodeStream = 0x300000;
constexpr std::uint64_t kScenarioSpeedStream = 0x400000;
constexpr std::uint64_t kScenarioEnvStream = 0x500000;

// Runs one controller-driven episode to its terminal outcome. `decide` maps
// the live environment to a ControlDecision. A controller halt that fires
// before the environment's own terminal check is mapped to the matching
// outcome (possible only when the controller's thresholds are stricter than
// the environment's).
template <class DecideFn>
Outcome run_one_episode(DecideFn&& decide, Env& env, std::uint64_t env_seed,
                        const ObstacleTrajectory& trajectory,
                        std::optional<Vec3> fixed_target) {
    env.reset(env_seed, trajectory, fixed_target);
    while (env.outcome() == Outcome::Running) {
        const ControlDecision d = decide(env);
        if (d.halt) {
            return d.halt_cause == HaltCause::Collision ? Outcome::Collision
                                                        : Outcome::Success;
        }
        env.step(d.action, RewardMode::Monolithic);
    }
    return env.outcome();
}

template <class DecideFn>
EvalReport eval_random_episodes(DecideFn&& decide, const EnvConfig& cfg,
                                std::size_t episodes, std::uint64_t seed,
                                std::size_t workers,
                                const std::string& fingerprint_extra) {
    cfg.validate();
    if (episodes == 0) {
        throw DomainError("evaluate: episodes must be positive");
    }
    std::vector<Outcome> outcomes(episodes, Outcome::Running);
    const ObstacleTrajectory trajectory = ObstacleTrajectory::random_waypoints();

    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&](std::size_t first, std::size_t stride) {
        try {
            Env env(ArmModel::panda(), cfg);
            for (std::size_t ep = first; ep < episodes; ep += stride) {
                outcomes[ep] = run_one_episode(
                    decide, env, Rng::derive(seed, kEvalEpisodeStream + ep),
                    trajectory, std::nullopt);
            }
        } catch (...) {
            const std::scoped_lock lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };

    const std::size_t n_workers =
        std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, episodes));
    if (n_workers == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) {
            pool.emplace_back(worker, w, n_workers);
        }
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    EvalReport report;
    report.episodes = episodes;
    report.outcome_log = std::move(outcomes);
    for (Outcome o : report.outcome_log) {
        switch (o) {
            case Outcome::Success: ++report.successes; break;
            case Outcome::Collision: ++report.collisions; break;
            case Outcome::Timeout: ++report.timeouts; break;
            case Outcome::Running:
                throw StateError("evaluation episode ended while running");
        }
    }
    const double denom = static_cast<double>(episodes);
    report.success_rate = 100.0 * static_cast<double>(report.successes) / denom;
    report.collision_rate =
        100.0 * static_cast<double>(report.collisions) / denom;
    report.timeout_rate = 100.0 * static_cast<double>(report.timeouts) / denom;
    report.seed = seed;
    report.config_fingerprint = config_fingerprint(cfg, fingerprint_extra);
    return report;
}

std::string eval_tag(std::string_view kind, std::size_t episodes,
                     std::uint64_t seed, double action_bound,
                     const std::string& thresholds) {
    std::string tag(kind);
    tag += "|episodes=" + std::to_string(episodes);
    tag += "|seed=" + std::to_string(seed);
    tag += "|bound=" + format_double(action_bound);
    if (!thresholds.empty()) tag += "|" + thresholds;
    return tag;
}

}  // namespace

std::size_t TrainSpec::default_episodes(RewardMode mode) {
    switch (mode) {
        case RewardMode::Monolithic: return 1200;
        case RewardMode::HybridReach: return 700;
        case RewardMode::HybridAvoid: return 1000;
    }
    throw DomainError("unknown reward mode");
}

std::size_t TrainSpec::effective_episodes() const {
    return episodes == 0 ? default_episodes(mode) : episodes;
}

void TrainSpec::validate() const {
    env.validate();
    ddpg.validate();
    if (seeds.empty()) throw ConfigError("train spec: seed list is empty");
    if (curve_window == 0) throw ConfigError("train spec: window must be > 0");
    if (selection_episodes == 0) {
        throw ConfigError("train spec: selection_episodes must be > 0");
    }
    if (workers == 0) throw ConfigError("train spec: workers must be > 0");
}

Observation::Kind observation_kind(RewardMode mode) {
    return mode == RewardMode::HybridReach ? Observation::Kind::ReachOnly
                                           : Observation::Kind::WithObstacle;
}

std::size_t observation_dim(Observation::Kind kind) {
    return kind == Observation::Kind::WithObstacle ? 20 : 17;
}

SeedTrainOutcome train_seed(const TrainSpec& spec, std::uint64_t seed,
                            std::size_t* training_runs) {
    spec.validate();
    if (training_runs != nullptr) ++*training_runs;

    const Observation::Kind kind = observation_kind(spec.mode);
    const std::size_t episodes = spec.effective_episodes();

    SeedTrainOutcome out;
    out.seed = seed;
    LearningCurve& curve = out.curve;
    curve.seed = seed;
    curve.window = spec.curve_window;
    curve.episode_reward.reserve(episodes);

    Env env(ArmModel::panda(), spec.env);
    Agent agent(observation_dim(kind), kNumJoints, spec.ddpg, seed);
    const ObstacleTrajectory trajectory = ObstacleTrajectory::random_waypoints();

    // Trailing-window accumulators for the curve columns.
    double window_reward_sum = 0.0;
    std::size_t window_successes = 0, window_collisions = 0;

    for (std::size_t ep = 0; ep < episodes && !curve.diverged; ++ep) {
        agent.begin_episode(ep);
        env.reset(Rng::derive(seed, kTrainEpisodeStream + ep), trajectory);
        std::vector<double> obs = env.observe(kind).values;
        double total_reward = 0.0;

        try {
            while (env.outcome() == Outcome::Running) {
                std::vector<double> action = agent.act(obs, /*explore=*/true);
                StepResult sr = env.step(action, spec.mode);
                // Bootstrapping is cut at true terminals only; a timeout is
                // an artificial horizon, so its value estimate survives.
                const bool terminal = sr.outcome == Outcome::Collision ||
                                      sr.outcome == Outcome::Success;
                total_reward += sr.reward;
                Transition t;
                t.state = std::move(obs);
                t.action = std::move(action);
                t.reward = sr.reward;
                t.next_state = sr.observation.values;
                t.terminal = terminal;
                agent.remember(std::move(t));
                agent.note_env_step();
                if (agent.total_env_steps() % spec.ddpg.train_every == 0) {
                    const TrainStepResult r = agent.train_step();
                    if (r.updated && (!std::isfinite(r.critic_loss) ||
                                      !std::isfinite(r.actor_objective))) {
                        throw NumericError("non-finite training loss");
                    }
                }
                obs = std::move(sr.observation.values);
            }
        } catch (const NumericError& e) {
            curve.diverged = true;
            curve.divergence_note = "seed " + std::to_string(seed) +
                                    " episode " + std::to_string(ep) + ": " +
                                    e.what();
        }
        if (curve.diverged) break;

        const Outcome outcome = env.outcome();
        curve.episode_reward.push_back(total_reward);
        curve.outcomes.push_back(outcome);
        window_reward_sum += total_reward;
        if (outcome == Outcome::Success) ++window_successes;
        if (outcome == Outcome::Collision) ++window_collisions;
        if (curve.episode_reward.size() > curve.window) {
            const std::size_t drop =
                curve.episode_reward.size() - curve.window - 1;
            window_reward_sum -= curve.episode_reward[drop];
            if (curve.outcomes[drop] == Outcome::Success) --window_successes;
            if (curve.outcomes[drop] == Outcome::Collision) --window_collisions;
        }
        const double in_window = static_cast<double>(
            std::min(curve.episode_reward.size(), curve.window));
        curve.running_average.push_back(window_reward_sum / in_window);
        curve.success_rate.push_back(
            100.0 * static_cast<double>(window_successes) / in_window);
        curve.failure_rate.push_back(
            100.0 * static_cast<double>(window_collisions) / in_window);
    }

    if (!curve.diverged) out.agent.emplace(std::move(agent));
    return out;
}

TrainResult train(const TrainSpec& spec, std::size_t* training_runs) {
    spec.validate();
    TrainResult result;
    result.seeds = spec.seeds;
    for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
        const std::uint64_t seed = spec.seeds[i];
        SeedTrainOutcome sto = train_seed(spec, seed, training_runs);
        result.curves.push_back(std::move(sto.curve));
        if (!sto.agent.has_value()) {
            result.selection.emplace_back(std::nullopt);
            continue;
        }
        EvalReport sel = evaluate_policy(
            sto.agent->actor(), observation_kind(spec.mode), spec.env,
            spec.selection_episodes, Rng::derive(seed, kSelectionStream),
            spec.ddpg.action_bound_test, spec.workers);

        bool better = !result.best_agent.has_value();
        if (!better) {
            const EvalReport& best = *result.selection[result.best_index];
            if (sel.success_rate != best.success_rate) {
                better = sel.success_rate > best.success_rate;
            } else if (sel.collision_rate != best.collision_rate) {
                better = sel.collision_rate < best.collision_rate;
            } else {
                better = seed < result.seeds[result.best_index];
            }
        }
        result.selection.emplace_back(std::move(sel));
        if (better) {
            result.best_index = i;
            result.best_agent = std::move(sto.agent);
        }
    }
    return result;
}

EvalReport evaluate(const MonolithicController& ctrl, const EnvConfig& cfg,
                    std::size_t episodes, std::uint64_t seed,
                    std::size_t workers) {
    auto decide = [&](const Env& env) {
        return monolithic_step(ctrl, env.d_t(), env.d_o(),
                               env.observe(Observation::Kind::WithObstacle)
                                   .values);
    };
    const std::string tag = eval_tag(
        "monolithic", episodes, seed, ctrl.action_bound(),
        "tau_o=" + format_double(ctrl.tau_o()) +
            "|tau_s=" + format_double(ctrl.tau_s()));
    return eval_random_episodes(decide, cfg, episodes, seed, workers, tag);
}

EvalReport evaluate(const HybridController& ctrl, const EnvConfig& cfg,
                    std::size_t episodes, std::uint64_t seed,
                    std::size_t workers) {
    auto decide = [&](const Env& env) {
        return hybrid_step(
            ctrl, env.d_t(), env.d_o(),
            env.observe(Observation::Kind::WithObstacle).values,
            env.observe(Observation::Kind::ReachOnly).values);
    };
    const std::string tag = eval_tag(
        "hybrid", episodes, seed, ctrl.action_bound(),
        "tau_hyb=" + format_double(ctrl.tau_hyb()) +
            "|tau_o=" + format_double(ctrl.tau_o()) +
            "|tau_t=" + format_double(ctrl.tau_t()));
    return eval_random_episodes(decide, cfg, episodes, seed, workers, tag);
}

EvalReport evaluate_policy(const DenseNet& actor, Observation::Kind kind,
                           const EnvConfig& cfg, std::size_t episodes,
                           std::uint64_t seed, double action_bound,
                           std::size_t workers) {
    if (actor.input_size() != observation_dim(kind)) {
        throw ShapeError("evaluate_policy: actor input size " +
                         std::to_string(actor.input_size()) +
                         " does not match observation size " +
                         std::to_string(observation_dim(kind)));
    }
    auto decide = [&](const Env& env) {
        ControlDecision d;
        d.action = actor.infer(env.observe(kind).values);
        for (double& v : d.action) v *= action_bound;
        return d;
    };
    const std::string tag = eval_tag(
        "policy", episodes, seed, action_bound,
        "inputs=" + std::to_string(observation_dim(kind)));
    return eval_random_episodes(decide, cfg, episodes, seed, workers, tag);
}

HybridController make_hybrid(DenseNet avoid_policy, DenseNet reach_policy,
                             double tau_hyb, const EnvConfig& cfg,
                             double action_bound) {
    const double halt_tau_o = tau_hyb > cfg.tau_o ? cfg.tau_o : 0.0;
    return HybridController(std::move(avoid_policy), std::move(reach_policy),
                            tau_hyb, halt_tau_o, cfg.tau_s, action_bound);
}

SweepResult sweep_hybrid(const HybridController& trained, const EnvConfig& cfg,
                         std::span<const double> thresholds,
                         std::size_t eval_episodes, std::uint64_t eval_seed,
                         std::size_t workers) {
    SweepResult result;
    result.eval_episodes = eval_episodes;
    for (double tau_hyb : thresholds) {
        SweepPoint point;
        point.threshold = tau_hyb;
        try {
            const HybridController ctrl =
                make_hybrid(trained.avoid_policy(), trained.reach_policy(),
                            tau_hyb, cfg, trained.action_bound());
            point.report =
                evaluate(ctrl, cfg, eval_episodes, eval_seed, workers);
        } catch (const std::exception& e) {
            point.failed = true;
            point.error = e.what();
        }
        result.points.push_back(std::move(point));
    }
    return result;
}

SweepResult sweep_monolithic(const TrainSpec& base,
                             std::span<const double> thresholds,
                             std::size_t eval_episodes,
                             std::uint64_t eval_seed) {
    SweepResult result;
    result.eval_episodes = eval_episodes;
    for (double tau_o : thresholds) {
        SweepPoint point;
        point.threshold = tau_o;
        try {
            TrainSpec spec = base;
            spec.mode = RewardMode::Monolithic;
            spec.env.tau_o = tau_o;
            const TrainResult trained = train(spec, &result.training_runs);
            if (!trained.has_best()) {
                throw NumericError("all seeds diverged at tau_o = " +
                                   format_double(tau_o));
            }
            const MonolithicController ctrl(trained.best_agent->actor(),
                                            spec.env.tau_o, spec.env.tau_s,
                                            spec.ddpg.action_bound_test);
            point.report =
                evaluate(ctrl, spec.env, eval_episodes, eval_seed,
                         base.workers);
        } catch (const std::exception& e) {
            point.failed = true;
            point.error = e.what();
        }
        result.points.push_back(std::move(point));
    }
    return result;
}

ScenarioTable run_scenarios(std::span<const ControllerRef> controllers,
                            const EnvConfig& cfg, std::size_t repetitions,
                            std::uint64_t seed) {
    cfg.validate();
    for (const ControllerRef& ref : controllers) {
        if ((ref.mono == nullptr) == (ref.hybrid == nullptr)) {
            throw DomainError(
                "scenario controller '" + ref.name +
                "' must reference exactly one controller");
        }
    }
    ScenarioTable table;
    table.repetitions = repetitions;
    if (repetitions == 0 || controllers.empty()) return table;

    for (int scenario = 1; scenario <= 5; ++scenario) {
        // One speed and env seed per repetition, shared by every controller
        // so the comparison is paired.
        std::vector<double> speeds(repetitions);
        std::vector<std::uint64_t> env_seeds(repetitions);
        for (std::size_t rep = 0; rep < repetitions; ++rep) {
            Rng rng(Rng::derive(seed, kScenarioSpeedStream +
                                          static_cast<std::uint64_t>(scenario) *
                                              1000 +
                                          rep));
            speeds[rep] =
                rng.uniform(cfg.obstacle_speed_min, cfg.obstacle_speed_max);
            env_seeds[rep] = Rng::derive(
                seed, kScenarioEnvStream +
                          static_cast<std::uint64_t>(scenario) * 1000 + rep);
        }

        for (const ControllerRef& ref : controllers) {
            ScenarioCell cell;
            cell.scenario_id = scenario;
            cell.controller = ref.name;
            EvalReport& report = cell.report;
            report.episodes = repetitions;
            report.seed = seed;
            Env env(ArmModel::panda(), cfg);
            for (std::size_t rep = 0; rep < repetitions; ++rep) {
                const ObstacleTrajectory trajectory =
                    scenario_trajectory(scenario, speeds[rep]);
                auto decide = [&](const Env& e) {
                    if (ref.mono != nullptr) {
                        return monolithic_step(
                            *ref.mono, e.d_t(), e.d_o(),
                            e.observe(Observation::Kind::WithObstacle).values);
                    }
                    return hybrid_step(
                        *ref.hybrid, e.d_t(), e.d_o(),
                        e.observe(Observation::Kind::WithObstacle).values,
                        e.observe(Observation::Kind::ReachOnly).values);
                };
                const Outcome o = run_one_episode(decide, env, env_seeds[rep],
                                                  trajectory,
                                                  scenario_target());
                report.outcome_log.push_back(o);
                if (o == Outcome::Success) ++report.successes;
                if (o == Outcome::Collision) ++report.collisions;
                if (o == Outcome::Timeout) ++report.timeouts;
            }
            const double denom = static_cast<double>(repetitions);
            report.success_rate =
                100.0 * static_cast<double>(report.successes) / denom;
            report.collision_rate =
                100.0 * static_cast<double>(report.collisions) / denom;
            report.timeout_rate =
                100.0 * static_cast<double>(report.timeouts) / denom;
            report.config_fingerprint = config_fingerprint(
                cfg, "scenario=" + std::to_string(scenario) +
                         "|controller=" + ref.name +
                         "|repetitions=" + std::to_string(repetitions) +
                         "|seed=" + std::to_string(seed));
            table.cells.push_back(std::move(cell));
        }
    }
    return table;
}

AblationGrid ablation_grid(std::span<const double> p_o_values,
                           std::span<const double> p_s_values,
                           const TrainSpec& base, std::size_t eval_episodes,
                           std::uint64_t eval_seed,
                           std::size_t* training_runs) {
    AblationGrid grid;
    grid.p_o_values.assign(p_o_values.begin(), p_o_values.end());
    grid.p_s_values.assign(p_s_values.begin(), p_s_values.end());
    grid.train_episodes = base.effective_episodes();
    grid.eval_episodes = eval_episodes;
    for (double p_o : p_o_values) {
        for (double p_s : p_s_values) {
            AblationCell cell;
            cell.p_o = p_o;
            cell.p_s = p_s;
            try {
                TrainSpec spec = base;
                spec.mode = RewardMode::Monolithic;
                spec.env.p_o = p_o;
                spec.env.p_s = p_s;
                const TrainResult trained = train(spec, training_runs);
                if (!trained.has_best()) {
                    throw NumericError("all seeds diverged");
                }
                const MonolithicController ctrl(
                    trained.best_agent->actor(), spec.env.tau_o,
                    spec.env.tau_s, spec.ddpg.action_bound_test);
                cell.report = evaluate(ctrl, spec.env, eval_episodes,
                                       eval_seed, base.workers);
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
            }
            grid.cells.push_back(std::move(cell));
        }
    }
    return grid;
}

std::vector<TraceRow> trace_episode(const ControllerRef& controller,
                                    const EnvConfig& cfg,
                                    const ObstacleTrajectory& trajectory,
                                    std::optional<Vec3> fixed_target,
                                    std::uint64_t seed) {
    if ((controller.mono == nullptr) == (controller.hybrid == nullptr)) {
        throw DomainError("trace needs exactly one controller");
    }
    Env env(ArmModel::panda(), cfg);
    env.reset(seed, trajectory, fixed_target);

    std::vector<TraceRow> rows;
    auto snapshot = [&](double reward, ActivePolicy policy, Outcome outcome) {
        TraceRow row;
        row.step = env.step_index();
        row.joints = env.joints();
        row.tooltip_pos = env.tooltip_position();
        row.obstacle = env.obstacle_position();
        row.d_t = env.d_t();
        row.d_o = env.d_o();
        row.reward = reward;
        row.active_policy = policy;
        row.outcome = outcome;
        rows.push_back(row);
    };
    snapshot(0.0, ActivePolicy::None, env.outcome());

    while (env.outcome() == Outcome::Running) {
        ControlDecision d;
        if (controller.mono != nullptr) {
            d = monolithic_step(
                *controller.mono, env.d_t(), env.d_o(),
                env.observe(Observation::Kind::WithObstacle).values);
        } else {
            d = hybrid_step(
                *controller.hybrid, env.d_t(), env.d_o(),
                env.observe(Observation::Kind::WithObstacle).values,
                env.observe(Observation::Kind::ReachOnly).values);
        }
        if (d.halt) {
            snapshot(0.0, ActivePolicy::None,
                     d.halt_cause == HaltCause::Collision ? Outcome::Collision
                                                          : Outcome::Success);
            break;
        }
        const StepResult sr = env.step(d.action, RewardMode::Monolithic);
        snapshot(sr.reward, d.active_policy, sr.outcome);
    }
    return rows;
}

}  // namespace reachavoid
