#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reachavoid/controllers.hpp"
#include "reachavoid/ddpg.hpp"
#include "reachavoid/env.hpp"

namespace reachavoid {

// One training request: which policy to train, for how long, on which seeds.
// episodes == 0 selects the mode's default length (monolithic 1200,
// reaching 700, avoidance 1000).
struct TrainSpec {
    RewardMode mode = RewardMode::Monolithic;
    std::size_t episodes = 0;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    EnvConfig env;
    DdpgConfig ddpg;
    std::size_t curve_window = 50;        // running-average window
    std::size_t selection_episodes = 200; // eval length for best-of-seeds
    std::size_t workers = 1;              // evaluation threads

    static std::size_t default_episodes(RewardMode mode);
    std::size_t effective_episodes() const;
    void validate() const;
};

// Per-episode training log for one seed. Rates are percentages over the
// trailing window (which shrinks at the start of training).
struct LearningCurve {
    std::uint64_t seed = 0;
    std::size_t window = 50;
    std::vector<double> episode_reward;
    std::vector<double> running_average;
    std::vector<double> success_rate;
    std::vector<double> failure_rate;
    std::vector<Outcome> outcomes;
    bool diverged = false;
    std::string divergence_note;
};

// Outcome counts over a batch of evaluation episodes. Rates are percentages
// of episodes; timeouts are counted separately from successes and
// collisions.
struct EvalReport {
    std::size_t episodes = 0;
    std::size_t successes = 0;
    std::size_t collisions = 0;
    std::size_t timeouts = 0;
    double success_rate = 0.0;
    double collision_rate = 0.0;
    double timeout_rate = 0.0;
    std::vector<Outcome> outcome_log;  // one entry per episode, in order
    std::string config_fingerprint;
    std::uint64_t seed = 0;
};

struct SeedTrainOutcome {
    std::uint64_t seed = 0;
    LearningCurve curve;
    std::optional<Agent> agent;  // empty when the seed diverged
};

struct TrainResult {
    std::vector<std::uint64_t> seeds;
    std::vector<LearningCurve> curves;               // one per seed
    std::vector<std::optional<EvalReport>> selection;  // empty for diverged
    std::size_t best_index = static_cast<std::size_t>(-1);
    std::optional<Agent> best_agent;

    bool has_best() const { return best_agent.has_value(); }
};

// Trains one seed. Divergence (non-finite loss or gradients) aborts the
// seed and flags the curve instead of throwing. Increments *training_runs
// when provided (the sweep-economy instrumentation).
SeedTrainOutcome train_seed(const TrainSpec& spec, std::uint64_t seed,
                            std::size_t* training_runs = nullptr);

// Trains every seed in the spec and selects the best agent by evaluation
// success rate at the spec's operation point; ties break to lower
// collision rate, then lower seed value. Seeds that diverge are skipped.
TrainResult train(const TrainSpec& spec, std::size_t* training_runs = nullptr);

Observation::Kind observation_kind(RewardMode mode);
std::size_t observation_dim(Observation::Kind kind);

// A named reference to either controller type; exactly one pointer is set.
struct ControllerRef {
    std::string name;
    const MonolithicController* mono = nullptr;
    const HybridController* hybrid = nullptr;
};

// Evaluation over `episodes` random-target, random-obstacle episodes.
// Deterministic in seed (episode seeds are derived; the worker count does
// not change results).
EvalReport evaluate(const MonolithicController& ctrl, const EnvConfig& cfg,
                    std::size_t episodes, std::uint64_t seed,
                    std::size_t workers = 1);
EvalReport evaluate(const HybridController& ctrl, const EnvConfig& cfg,
                    std::size_t episodes, std::uint64_t seed,
                    std::size_t workers = 1);

// Runs a bare actor (no halt logic; the environment decides outcomes) on
// its observation variant. Used for best-of-seeds selection.
EvalReport evaluate_policy(const DenseNet& actor, Observation::Kind kind,
                           const EnvConfig& cfg, std::size_t episodes,
                           std::uint64_t seed, double action_bound,
                           std::size_t workers = 1);

// Builds a hybrid controller whose halt thresholds mirror the environment
// outcome rules. When tau_hyb <= cfg.tau_o (degenerate sweep points) the
// controller's collision halt is disabled (tau_o = 0) and the environment
// alone decides collisions.
HybridController make_hybrid(DenseNet avoid_policy, DenseNet reach_policy,
                             double tau_hyb, const EnvConfig& cfg,
                             double action_bound);

struct SweepPoint {
    double threshold = 0.0;  // meters
    EvalReport report;
    bool failed = false;
    std::string error;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::size_t training_runs = 0;  // actual policy trainings performed
    std::size_t eval_episodes = 0;
};

// Evaluates one trained pair at each switching threshold; never trains.
SweepResult sweep_hybrid(const HybridController& trained, const EnvConfig& cfg,
                         std::span<const double> thresholds,
                         std::size_t eval_episodes, std::uint64_t eval_seed,
                         std::size_t workers = 1);

// Retrains the monolithic controller at each collision threshold, then
// evaluates it there. Per-point failures are recorded and the sweep
// continues.
SweepResult sweep_monolithic(const TrainSpec& base,
                             std::span<const double> thresholds,
                             std::size_t eval_episodes, std::uint64_t eval_seed);

struct ScenarioCell {
    int scenario_id = 0;
    std::string controller;
    EvalReport report;
};

struct ScenarioTable {
    std::size_t repetitions = 0;
    std::vector<ScenarioCell> cells;  // scenario-major, controller-minor
};

// Fixed-target scenario comparison: every controller sees the same
// obstacle path and per-repetition speed (drawn uniformly from the config's
// speed range), so rows are directly comparable.
ScenarioTable run_scenarios(std::span<const ControllerRef> controllers,
                            const EnvConfig& cfg, std::size_t repetitions,
                            std::uint64_t seed);

struct AblationCell {
    double p_o = 0.0;
    double p_s = 0.0;
    EvalReport report;
    bool failed = false;
    std::string error;
};

struct AblationGrid {
    std::vector<double> p_o_values;
    std::vector<double> p_s_values;
    std::size_t train_episodes = 0;
    std::size_t eval_episodes = 0;
    std::vector<AblationCell> cells;  // p_o-major, p_s-minor
};

// Trains a monolithic controller per (p_o, p_s) cell and evaluates it.
// Per-cell failures are recorded and the grid completes.
AblationGrid ablation_grid(std::span<const double> p_o_values,
                           std::span<const double> p_s_values,
                           const TrainSpec& base, std::size_t eval_episodes,
                           std::uint64_t eval_seed,
                           std::size_t* training_runs = nullptr);

struct TraceRow {
    std::size_t step = 0;
    Joints joints{};
    Vec3 tooltip_pos{};
    Vec3 obstacle{};
    double d_t = 0.0;
    double d_o = 0.0;
    double reward = 0.0;
    ActivePolicy active_policy = ActivePolicy::None;
    Outcome outcome = Outcome::Running;
};

// Runs one episode under the controller and records every step (row 0 is
// the initial state). The final row's outcome is terminal.
std::vector<TraceRow> trace_episode(const ControllerRef& controller,
                                    const EnvConfig& cfg,
                                    const ObstacleTrajectory& trajectory,
                                    std::optional<Vec3> fixed_target,
                                    std::uint64_t seed);

// --- report files: fixed column order, dot decimal separator ---

void write_curve_csv(const std::string& path, const LearningCurve& curve);
void write_eval_csv(const std::string& path, const EvalReport& report);
void write_outcome_log_csv(const std::string& path, const EvalReport& report);
void write_sweep_csv(const std::string& path, const SweepResult& sweep);
void write_scenario_csv(const std::string& path, const ScenarioTable& table);
void write_ablation_csv(const std::string& path, const AblationGrid& grid);
void write_trace_csv(const std::string& path, std::span<const TraceRow> rows);

// Plot-data JSON bundles (convergence curves and sweep scatter).
void write_curves_plot_json(const std::string& path,
                            std::span<const LearningCurve> curves);
void write_sweep_plot_json(const std::string& path, const SweepResult& sweep);

std::uint64_t fnv1a64(std::string_view text);

// Hex digest of the env config plus a caller-supplied discriminator
// (controller kind, thresholds, episode count, ...).
std::string config_fingerprint(const EnvConfig& cfg, std::string_view extra);

// Executes one fully-specified run manifest (JSON text) and writes reports
// plus the effective manifest into out_dir. Re-running a written manifest
// reproduces the outputs byte for byte. Returns the written file names.
std::vector<std::string> run_command_json(const std::string& manifest_json,
                                          const std::string& out_dir);

}  // namespace reachavoid
