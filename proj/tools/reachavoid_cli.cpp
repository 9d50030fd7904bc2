// Command-line front end. All work happens behind the C API; this file only
// turns flags into a run manifest, executes it, and reports the results.
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "reachavoid.h"

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CliError {
    int exit_code;
    std::string message;
};

// Flags shared by every subcommand that builds a manifest.
struct CommonOpts {
    std::string out_dir;
    std::string env_config;
    std::string ddpg_config;
    std::vector<std::string> env_sets;
    std::vector<std::string> ddpg_sets;
    double tau_o_mm = -1.0;
    double tau_s_mm = -1.0;
    double p_o = -1.0;
    double p_s = -1.0;
    std::size_t workers = 0;
};

struct ControllerOpts {
    std::string bundle;
    std::string policy;
    std::string policy_avoid;
    std::string policy_reach;
    double tau_hyb_mm = -1.0;
    double action_bound = -1.0;
};

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    for (char& c : buf) {
        if (c == ',') c = '.';
    }
    return buf;
}

void split_key_value(const std::string& text, const char* flag,
                     std::string& key, std::string& value) {
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw CliError{kExitUsage, std::string(flag) +
                                       " expects KEY=VALUE, got '" + text +
                                       "'"};
    }
    key = text.substr(0, eq);
    value = text.substr(eq + 1);
}

// Env/ddpg config references plus flag overrides, in precedence order:
// config file, then --env/--ddpg KEY=VALUE, then the unit shorthands.
void emit_config_fields(const CommonOpts& opts, json& manifest) {
    if (!opts.env_config.empty()) manifest["env_file"] = opts.env_config;
    if (!opts.ddpg_config.empty()) manifest["ddpg_file"] = opts.ddpg_config;
    json env_obj = json::object();
    for (const std::string& kv : opts.env_sets) {
        std::string key, value;
        split_key_value(kv, "--env", key, value);
        env_obj[key] = value;
    }
    if (opts.tau_o_mm >= 0.0) {
        env_obj["tau_o"] = format_double(opts.tau_o_mm / 1000.0);
    }
    if (opts.tau_s_mm >= 0.0) {
        env_obj["tau_s"] = format_double(opts.tau_s_mm / 1000.0);
    }
    if (opts.p_o >= 0.0) env_obj["p_o"] = format_double(opts.p_o);
    if (opts.p_s >= 0.0) env_obj["p_s"] = format_double(opts.p_s);
    if (!env_obj.empty()) manifest["env"] = env_obj;
    json ddpg_obj = json::object();
    for (const std::string& kv : opts.ddpg_sets) {
        std::string key, value;
        split_key_value(kv, "--ddpg", key, value);
        ddpg_obj[key] = value;
    }
    if (!ddpg_obj.empty()) manifest["ddpg"] = ddpg_obj;
    if (opts.workers > 0) manifest["workers"] = opts.workers;
}

json controller_spec(const ControllerOpts& opts) {
    const bool inline_mono = !opts.policy.empty();
    const bool inline_hybrid =
        !opts.policy_avoid.empty() || !opts.policy_reach.empty();
    if (!opts.bundle.empty()) {
        if (inline_mono || inline_hybrid) {
            throw CliError{kExitUsage,
                           "--bundle excludes --policy/--policy-avoid/"
                           "--policy-reach"};
        }
        return json{{"bundle", opts.bundle}};
    }
    if (inline_mono && inline_hybrid) {
        throw CliError{kExitUsage,
                       "--policy excludes --policy-avoid/--policy-reach"};
    }
    json spec;
    if (inline_mono) {
        spec["kind"] = "monolithic";
        spec["policy"] = opts.policy;
    } else if (inline_hybrid) {
        if (opts.policy_avoid.empty() || opts.policy_reach.empty()) {
            throw CliError{kExitUsage,
                           "hybrid controllers need both --policy-avoid and "
                           "--policy-reach"};
        }
        spec["kind"] = "hybrid";
        spec["policy_avoid"] = opts.policy_avoid;
        spec["policy_reach"] = opts.policy_reach;
        if (opts.tau_hyb_mm >= 0.0) {
            spec["tau_hyb"] = opts.tau_hyb_mm / 1000.0;
        }
    } else {
        throw CliError{kExitUsage,
                       "a controller is required: --bundle, --policy, or "
                       "--policy-avoid/--policy-reach"};
    }
    if (opts.action_bound >= 0.0) spec["action_bound"] = opts.action_bound;
    return spec;
}

// Thresholds the controller spec inherits from the env shorthands: the
// controller halts exactly where the environment scores, unless the caller
// overrides them per controller.
void inherit_controller_thresholds(const CommonOpts& common, json& spec) {
    if (!spec.contains("kind")) return;
    if (common.tau_o_mm >= 0.0) spec["tau_o"] = common.tau_o_mm / 1000.0;
    if (common.tau_s_mm >= 0.0) {
        const double tau = common.tau_s_mm / 1000.0;
        if (spec["kind"] == "monolithic") {
            spec["tau_s"] = tau;
        } else {
            spec["tau_t"] = tau;
        }
    }
}

int run_manifest(const json& manifest, const std::string& out_dir) {
    const std::string text = manifest.dump();
    char* files = nullptr;
    const ra_status rc = ra_run_command(text.c_str(), out_dir.c_str(), &files);
    if (rc != RA_OK) {
        std::fprintf(stderr, "error: %s\n", ra_last_error());
        return kExitFailure;
    }
    std::istringstream lines(files != nullptr ? files : "");
    ra_string_free(files);
    std::string name;
    while (std::getline(lines, name)) {
        std::printf("wrote %s/%s\n", out_dir.c_str(), name.c_str());
    }
    return 0;
}

void add_common_flags(CLI::App* cmd, CommonOpts& opts, bool with_ddpg,
                      bool with_penalties = true) {
    cmd->add_option("--out", opts.out_dir, "Output directory")->required();
    cmd->add_option("--env-config", opts.env_config,
                    "Environment config file (key=value lines)");
    cmd->add_option("--env", opts.env_sets,
                    "Environment override KEY=VALUE (repeatable)");
    cmd->add_option("--tau-o", opts.tau_o_mm,
                    "Collision threshold in millimeters");
    cmd->add_option("--tau-s", opts.tau_s_mm,
                    "Success threshold in millimeters");
    if (with_penalties) {
        cmd->add_option("--p-o", opts.p_o, "Obstacle penalty magnitude");
        cmd->add_option("--p-s", opts.p_s, "Success bonus magnitude");
    }
    cmd->add_option("--workers", opts.workers, "Evaluation worker threads");
    if (with_ddpg) {
        cmd->add_option("--ddpg-config", opts.ddpg_config,
                        "Learner config file (key=value lines)");
        cmd->add_option("--ddpg", opts.ddpg_sets,
                        "Learner override KEY=VALUE (repeatable)");
    }
}

void add_controller_flags(CLI::App* cmd, ControllerOpts& opts) {
    cmd->add_option("--bundle", opts.bundle, "Controller bundle (.json)");
    cmd->add_option("--policy", opts.policy,
                    "Monolithic policy network (.ranet)");
    cmd->add_option("--policy-avoid", opts.policy_avoid,
                    "Hybrid avoidance policy network (.ranet)");
    cmd->add_option("--policy-reach", opts.policy_reach,
                    "Hybrid reaching policy network (.ranet)");
    cmd->add_option("--tau-hyb", opts.tau_hyb_mm,
                    "Hybrid switching threshold in millimeters");
    cmd->add_option("--action-bound", opts.action_bound,
                    "Action magnitude bound for deployment");
}

struct SeedOpts {
    std::vector<std::uint64_t> seeds;
    std::vector<std::uint64_t> extra;

    std::vector<std::uint64_t> merged() const {
        std::vector<std::uint64_t> all = seeds;
        all.insert(all.end(), extra.begin(), extra.end());
        return all;
    }
};

void add_seed_flags(CLI::App* cmd, SeedOpts& opts) {
    cmd->add_option("--seeds", opts.seeds,
                    "Training seeds (comma separated)")
        ->delimiter(',');
    cmd->add_option("--seed", opts.extra,
                    "Add one training seed (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reach-avoid arm controllers: training, evaluation, and "
                 "report generation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ra_version());

    // train
    auto* train = app.add_subcommand(
        "train", "Train a policy over one or more seeds and save the best");
    CommonOpts train_common;
    std::string train_mode;
    std::size_t train_episodes = 0;
    SeedOpts train_seeds;
    std::size_t curve_window = 0;
    std::size_t selection_episodes = 0;
    train->add_option("--mode", train_mode, "monolithic, hybrid_reach, or "
                                            "hybrid_avoid")
        ->required()
        ->check(CLI::IsMember({"monolithic", "hybrid_reach", "hybrid_avoid"}));
    train->add_option("--episodes", train_episodes,
                      "Training episodes (0 = mode default)");
    add_seed_flags(train, train_seeds);
    train->add_option("--curve-window", curve_window,
                      "Running-average window for the learning curve");
    train->add_option("--selection-episodes", selection_episodes,
                      "Evaluation episodes for best-of-seeds selection");
    add_common_flags(train, train_common, /*with_ddpg=*/true);
    train->callback([&] {
        json manifest;
        manifest["format_version"] = 1;
        manifest["command"] = "train";
        manifest["mode"] = train_mode;
        if (train_episodes > 0) manifest["episodes"] = train_episodes;
        const std::vector<std::uint64_t> seeds = train_seeds.merged();
        if (!seeds.empty()) manifest["seeds"] = seeds;
        if (curve_window > 0) manifest["curve_window"] = curve_window;
        if (selection_episodes > 0) {
            manifest["selection_episodes"] = selection_episodes;
        }
        emit_config_fields(train_common, manifest);
        std::exit(run_manifest(manifest, train_common.out_dir));
    });

    // eval
    auto* eval = app.add_subcommand(
        "eval", "Evaluate a controller over random episodes");
    CommonOpts eval_common;
    ControllerOpts eval_ctrl;
    std::size_t eval_episodes = 0;
    std::uint64_t eval_seed = 0;
    bool eval_seed_set = false;
    add_controller_flags(eval, eval_ctrl);
    eval->add_option("--episodes", eval_episodes, "Evaluation episodes");
    eval->add_option("--seed", eval_seed, "Evaluation seed")
        ->each([&](const std::string&) { eval_seed_set = true; });
    add_common_flags(eval, eval_common, /*with_ddpg=*/false);
    eval->callback([&] {
        json manifest;
        manifest["format_version"] = 1;
        manifest["command"] = "eval";
        json spec = controller_spec(eval_ctrl);
        inherit_controller_thresholds(eval_common, spec);
        manifest["controller"] = spec;
        if (eval_episodes > 0) manifest["episodes"] = eval_episodes;
        if (eval_seed_set) manifest["seed"] = eval_seed;
        emit_config_fields(eval_common, manifest);
        std::exit(run_manifest(manifest, eval_common.out_dir));
    });

    // sweep
    auto* sweep = app.add_subcommand(
        "sweep", "Evaluate across operation points (switching or collision "
                 "thresholds, in millimeters)");
    CommonOpts sweep_common;
    ControllerOpts sweep_ctrl;
    std::string sweep_variant;
    std::vector<double> sweep_thresholds;
    std::size_t sweep_eval_episodes = 0;
    std::uint64_t sweep_eval_seed = 0;
    bool sweep_eval_seed_set = false;
    std::size_t sweep_episodes = 0;
    SeedOpts sweep_seeds;
    sweep->add_option("--controller", sweep_variant,
                      "Which controller family to sweep")
        ->required()
        ->check(CLI::IsMember({"hybrid", "monolithic"}));
    sweep->add_option("--thresholds", sweep_thresholds,
                      "Thresholds in millimeters (comma separated)")
        ->required()
        ->delimiter(',');
    sweep->add_option("--eval-episodes", sweep_eval_episodes,
                      "Evaluation episodes per threshold");
    sweep->add_option("--eval-seed", sweep_eval_seed, "Evaluation seed")
        ->each([&](const std::string&) { sweep_eval_seed_set = true; });
    add_controller_flags(sweep, sweep_ctrl);
    sweep->add_option("--episodes", sweep_episodes,
                      "Training episodes per point (monolithic sweeps)");
    add_seed_flags(sweep, sweep_seeds);
    add_common_flags(sweep, sweep_common, /*with_ddpg=*/true);
    sweep->callback([&] {
        json manifest;
        manifest["format_version"] = 1;
        manifest["command"] = "sweep";
        manifest["variant"] = sweep_variant;
        manifest["thresholds_mm"] = sweep_thresholds;
        if (sweep_eval_episodes > 0) {
            manifest["eval_episodes"] = sweep_eval_episodes;
        }
        if (sweep_eval_seed_set) manifest["eval_seed"] = sweep_eval_seed;
        if (sweep_variant == "hybrid") {
            json spec = controller_spec(sweep_ctrl);
            inherit_controller_thresholds(sweep_common, spec);
            manifest["controller"] = spec;
        } else {
            if (sweep_episodes > 0) manifest["episodes"] = sweep_episodes;
            const std::vector<std::uint64_t> seeds = sweep_seeds.merged();
            if (!seeds.empty()) manifest["seeds"] = seeds;
        }
        emit_config_fields(sweep_common, manifest);
        std::exit(run_manifest(manifest, sweep_common.out_dir));
    });

    // scenarios
    auto* scenarios = app.add_subcommand(
        "scenarios", "Run the five fixed obstacle scenarios for each "
                     "controller");
    CommonOpts scen_common;
    std::vector<std::string> scen_controllers;
    std::size_t scen_repetitions = 0;
    std::uint64_t scen_seed = 0;
    bool scen_seed_set = false;
    scenarios->add_option("--controller", scen_controllers,
                          "NAME=BUNDLE.json (repeatable)")
        ->required();
    scenarios->add_option("--repetitions", scen_repetitions,
                          "Episodes per scenario per controller");
    scenarios->add_option("--seed", scen_seed, "Scenario seed")
        ->each([&](const std::string&) { scen_seed_set = true; });
    add_common_flags(scenarios, scen_common, /*with_ddpg=*/false);
    scenarios->callback([&] {
        json manifest;
        manifest["format_version"] = 1;
        manifest["command"] = "scenarios";
        json specs = json::array();
        for (const std::string& item : scen_controllers) {
            std::string name, bundle;
            split_key_value(item, "--controller", name, bundle);
            specs.push_back(json{{"name", name}, {"bundle", bundle}});
        }
        manifest["controllers"] = specs;
        if (scen_repetitions > 0) manifest["repetitions"] = scen_repetitions;
        if (scen_seed_set) manifest["seed"] = scen_seed;
        emit_config_fields(scen_common, manifest);
        std::exit(run_manifest(manifest, scen_common.out_dir));
    });

    // ablate
    auto* ablate = app.add_subcommand(
        "ablate", "Train and evaluate the monolithic reward across a "
                  "penalty grid");
    CommonOpts abl_common;
    std::vector<double> abl_p_o, abl_p_s;
    std::size_t abl_episodes = 0;
    SeedOpts abl_seeds;
    std::size_t abl_eval_episodes = 0;
    std::uint64_t abl_eval_seed = 0;
    bool abl_eval_seed_set = false;
    ablate->add_option("--p-o", abl_p_o,
                       "Obstacle penalty values (comma separated)")
        ->required()
        ->delimiter(',');
    ablate->add_option("--p-s", abl_p_s,
                       "Success bonus values (comma separated)")
        ->required()
        ->delimiter(',');
    ablate->add_option("--episodes", abl_episodes,
                       "Training episodes per cell (0 = mode default)");
    add_seed_flags(ablate, abl_seeds);
    ablate->add_option("--eval-episodes", abl_eval_episodes,
                       "Evaluation episodes per cell");
    ablate->add_option("--eval-seed", abl_eval_seed, "Evaluation seed")
        ->each([&](const std::string&) { abl_eval_seed_set = true; });
    add_common_flags(ablate, abl_common, /*with_ddpg=*/true,
                     /*with_penalties=*/false);
    ablate->callback([&] {
        json manifest;
        manifest["format_version"] = 1;
        manifest["command"] = "ablate";
        manifest["p_o_values"] = abl_p_o;
        manifest["p_s_values"] = abl_p_s;
        if (abl_episodes > 0) manifest["episodes"] = abl_episodes;
        const std::vector<std::uint64_t> seeds = abl_seeds.merged();
        if (!seeds.empty()) manifest["seeds"] = seeds;
        if (abl_eval_episodes > 0) {
            manifest["eval_episodes"] = abl_eval_episodes;
        }
        if (abl_eval_seed_set) manifest["eval_seed"] = abl_eval_seed;
        emit_config_fields(abl_common, manifest);
        std::exit(run_manifest(manifest, abl_common.out_dir));
    });

    // trace
    auto* trace = app.add_subcommand(
        "trace", "Record one episode step by step");
    CommonOpts trace_common;
    ControllerOpts trace_ctrl;
    int trace_scenario = 0;
    double trace_speed = -1.0;
    std::uint64_t trace_seed = 0;
    bool trace_seed_set = false;
    std::vector<double> trace_target;
    add_controller_flags(trace, trace_ctrl);
    trace->add_option("--scenario", trace_scenario,
                      "Scenario id 1..5 (omit for a random obstacle path)")
        ->check(CLI::Range(1, 5));
    trace->add_option("--speed", trace_speed,
                      "Obstacle speed in m/s for --scenario");
    trace->add_option("--seed", trace_seed, "Episode seed")
        ->each([&](const std::string&) { trace_seed_set = true; });
    trace->add_option("--target", trace_target,
                      "Fixed target x,y,z in meters (comma separated)")
        ->delimiter(',')
        ->expected(3);
    add_common_flags(trace, trace_common, /*with_ddpg=*/false);
    trace->callback([&] {
        json manifest;
        manifest["format_version"] = 1;
        manifest["command"] = "trace";
        json spec = controller_spec(trace_ctrl);
        inherit_controller_thresholds(trace_common, spec);
        manifest["controller"] = spec;
        if (trace_scenario > 0) {
            json traj;
            traj["kind"] = "scenario";
            traj["id"] = trace_scenario;
            if (trace_speed > 0.0) traj["speed"] = trace_speed;
            manifest["trajectory"] = traj;
        }
        if (trace_seed_set) manifest["seed"] = trace_seed;
        if (!trace_target.empty()) manifest["target"] = trace_target;
        emit_config_fields(trace_common, manifest);
        std::exit(run_manifest(manifest, trace_common.out_dir));
    });

    // replay
    auto* replay = app.add_subcommand(
        "replay", "Re-run a previously written manifest.json");
    std::string replay_manifest;
    std::string replay_out;
    replay->add_option("--manifest", replay_manifest, "Path to manifest.json")
        ->required();
    replay->add_option("--out", replay_out, "Output directory")->required();
    replay->callback([&] {
        std::ifstream in(replay_manifest, std::ios::binary);
        if (!in) {
            std::fprintf(stderr, "error: cannot read %s\n",
                         replay_manifest.c_str());
            std::exit(kExitFailure);
        }
        std::ostringstream text;
        text << in.rdbuf();
        char* files = nullptr;
        const ra_status rc =
            ra_run_command(text.str().c_str(), replay_out.c_str(), &files);
        if (rc != RA_OK) {
            std::fprintf(stderr, "error: %s\n", ra_last_error());
            std::exit(kExitFailure);
        }
        std::istringstream lines(files != nullptr ? files : "");
        ra_string_free(files);
        std::string name;
        while (std::getline(lines, name)) {
            std::printf("wrote %s/%s\n", replay_out.c_str(), name.c_str());
        }
        std::exit(0);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        std::fprintf(stderr, "run with --help for usage\n");
        return kExitUsage;
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.message.c_str());
        return e.exit_code;
    }
    return 0;
}
