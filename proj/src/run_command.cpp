#include <deque>
#include <filesystem>
#include <fstream>
#include <variant>

#include "reachavoid/error.hpp"
#include "reachavoid/harness.hpp"
#include "reachavoid/kv.hpp"

#include "json.hpp"

namespace reachavoid {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

RewardMode parse_mode(const std::string& text) {
    if (text == "monolithic") return RewardMode::Monolithic;
    if (text == "hybrid_reach") return RewardMode::HybridReach;
    if (text == "hybrid_avoid") return RewardMode::HybridAvoid;
    throw ConfigError("manifest: unknown mode '" + text +
                      "' (expected monolithic, hybrid_reach, hybrid_avoid)");
}

std::string absolute_path(const std::string& path) {
    return fs::absolute(fs::path(path)).lexically_normal().string();
}

// Reads the optional "<name>_file" path plus the optional inline "<name>"
// object (key -> value, later wins) on top of the defaults in `base`.
KvFile merged_kv(const json& manifest, const std::string& name, KvFile base) {
    const std::string file_key = name + "_file";
    if (manifest.contains(file_key)) {
        const KvFile loaded =
            KvFile::parse_file(manifest.at(file_key).get<std::string>());
        for (const std::string& key : loaded.keys()) {
            if (!base.has(key)) {
                throw ConfigError("manifest: unknown " + name + " key '" +
                                  key + "' in " +
                                  manifest.at(file_key).get<std::string>());
            }
            base.set(key, loaded.raw(key));
        }
    }
    if (manifest.contains(name)) {
        const json& obj = manifest.at(name);
        if (!obj.is_object()) {
            throw ConfigError("manifest: '" + name + "' must be an object");
        }
        for (const auto& item : obj.items()) {
            if (!base.has(item.key())) {
                throw ConfigError("manifest: unknown " + name + " key '" +
                                  item.key() + "'");
            }
            const json& v = item.value();
            base.set(item.key(),
                     v.is_string() ? v.get<std::string>() : v.dump());
        }
    }
    return base;
}

EnvConfig env_from_manifest(const json& manifest) {
    return EnvConfig::from_kv(merged_kv(manifest, "env", EnvConfig{}.to_kv()));
}

DdpgConfig ddpg_from_manifest(const json& manifest) {
    return DdpgConfig::from_kv(
        merged_kv(manifest, "ddpg", DdpgConfig{}.to_kv()));
}

json kv_to_json(const KvFile& kv) {
    json obj = json::object();
    for (const std::string& key : kv.keys()) obj[key] = kv.raw(key);
    return obj;
}

TrainSpec train_spec_from_manifest(const json& manifest, RewardMode mode) {
    TrainSpec spec;
    spec.mode = mode;
    spec.episodes = manifest.value("episodes", std::size_t{0});
    spec.seeds = manifest.value("seeds", std::vector<std::uint64_t>{1, 2, 3});
    spec.env = env_from_manifest(manifest);
    spec.ddpg = ddpg_from_manifest(manifest);
    spec.curve_window = manifest.value("curve_window", std::size_t{50});
    spec.selection_episodes =
        manifest.value("selection_episodes", std::size_t{200});
    spec.workers = manifest.value("workers", std::size_t{1});
    spec.validate();
    return spec;
}

// Shared fields of the effective manifest for any command that trains.
void emit_train_fields(json& effective, const TrainSpec& spec) {
    effective["mode"] = to_string(spec.mode);
    effective["episodes"] = spec.effective_episodes();
    effective["seeds"] = spec.seeds;
    effective["env"] = kv_to_json(spec.env.to_kv());
    effective["ddpg"] = kv_to_json(spec.ddpg.to_kv());
    effective["curve_window"] = spec.curve_window;
    effective["selection_episodes"] = spec.selection_episodes;
    effective["workers"] = spec.workers;
}

using AnyController = std::variant<MonolithicController, HybridController>;

// Controller spec forms: {"bundle": "<controller.json>"} or an inline
// object with kind, net paths and thresholds. Returns the loaded
// controller plus the spec rewritten with absolute paths.
AnyController load_controller_spec(const json& spec, json& resolved) {
    if (!spec.is_object()) {
        throw ConfigError("manifest: controller spec must be an object");
    }
    resolved = json::object();
    if (spec.contains("bundle")) {
        const std::string path =
            absolute_path(spec.at("bundle").get<std::string>());
        resolved["bundle"] = path;
        if (peek_bundle_kind(path) == BundleKind::Monolithic) {
            return load_monolithic_bundle(path);
        }
        return load_hybrid_bundle(path);
    }
    const std::string kind = spec.at("kind").get<std::string>();
    resolved["kind"] = kind;
    const double bound = spec.value("action_bound", 0.2);
    resolved["action_bound"] = bound;
    if (kind == "monolithic") {
        const std::string policy =
            absolute_path(spec.at("policy").get<std::string>());
        const double tau_o = spec.value("tau_o", 0.100);
        const double tau_s = spec.value("tau_s", 0.050);
        resolved["policy"] = policy;
        resolved["tau_o"] = tau_o;
        resolved["tau_s"] = tau_s;
        return MonolithicController(DenseNet::load(policy), tau_o, tau_s,
                                    bound);
    }
    if (kind == "hybrid") {
        const std::string avoid =
            absolute_path(spec.at("policy_avoid").get<std::string>());
        const std::string reach =
            absolute_path(spec.at("policy_reach").get<std::string>());
        const double tau_hyb = spec.value("tau_hyb", 0.150);
        const double tau_o = spec.value("tau_o", 0.100);
        const double tau_t = spec.value("tau_t", 0.050);
        resolved["policy_avoid"] = avoid;
        resolved["policy_reach"] = reach;
        resolved["tau_hyb"] = tau_hyb;
        resolved["tau_o"] = tau_o;
        resolved["tau_t"] = tau_t;
        return HybridController(DenseNet::load(avoid), DenseNet::load(reach),
                                tau_hyb, tau_o, tau_t, bound);
    }
    throw ConfigError("manifest: unknown controller kind '" + kind + "'");
}

void write_manifest(const fs::path& out_dir, const json& effective,
                    std::vector<std::string>& written) {
    std::ofstream out(out_dir / "manifest.json", std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " +
                      (out_dir / "manifest.json").string());
    }
    out << effective.dump(2) << '\n';
    if (!out) {
        throw IoError("short write: " + (out_dir / "manifest.json").string());
    }
    written.push_back("manifest.json");
}

std::vector<std::string> cmd_train(const json& manifest,
                                   const fs::path& out_dir) {
    const RewardMode mode =
        parse_mode(manifest.at("mode").get<std::string>());
    const TrainSpec spec = train_spec_from_manifest(manifest, mode);

    const TrainResult result = train(spec);

    std::vector<std::string> written;
    for (std::size_t i = 0; i < result.curves.size(); ++i) {
        const std::string name =
            "curve_seed" + std::to_string(result.seeds[i]) + ".csv";
        write_curve_csv((out_dir / name).string(), result.curves[i]);
        written.push_back(name);
    }
    write_curves_plot_json((out_dir / "curves.json").string(), result.curves);
    written.push_back("curves.json");

    json summary;
    summary["seeds"] = result.seeds;
    summary["selection"] = json::array();
    for (std::size_t i = 0; i < result.selection.size(); ++i) {
        if (!result.selection[i].has_value()) {
            summary["selection"].push_back(nullptr);
            continue;
        }
        const EvalReport& r = *result.selection[i];
        json entry;
        entry["seed"] = result.seeds[i];
        entry["episodes"] = r.episodes;
        entry["success_pct"] = r.success_rate;
        entry["collision_pct"] = r.collision_rate;
        entry["timeout_pct"] = r.timeout_rate;
        summary["selection"].push_back(std::move(entry));
    }
    summary["best_seed"] = result.has_best()
                               ? json(result.seeds[result.best_index])
                               : json(nullptr);

    if (result.has_best()) {
        const Agent& best = *result.best_agent;
        best.actor().save((out_dir / "best_policy.ranet").string());
        written.push_back("best_policy.ranet");
        best.save_checkpoint((out_dir / "checkpoint.rackpt").string());
        written.push_back("checkpoint.rackpt");
        if (mode == RewardMode::Monolithic) {
            const MonolithicController ctrl(best.actor(), spec.env.tau_o,
                                            spec.env.tau_s,
                                            spec.ddpg.action_bound_test);
            save_bundle(ctrl, (out_dir / "controller.json").string());
            written.push_back("controller.json");
            written.push_back("controller.policy.ranet");
        }
    }

    std::ofstream summary_out(out_dir / "train_summary.json",
                              std::ios::binary);
    if (!summary_out) {
        throw IoError("cannot open for writing: " +
                      (out_dir / "train_summary.json").string());
    }
    summary_out << summary.dump(2) << '\n';
    if (!summary_out) {
        throw IoError("short write: " +
                      (out_dir / "train_summary.json").string());
    }
    written.push_back("train_summary.json");

    json effective;
    effective["format_version"] = 1;
    effective["command"] = "train";
    emit_train_fields(effective, spec);
    write_manifest(out_dir, effective, written);
    return written;
}

std::vector<std::string> cmd_eval(const json& manifest,
                                  const fs::path& out_dir) {
    json resolved_controller;
    const AnyController ctrl =
        load_controller_spec(manifest.at("controller"), resolved_controller);
    const EnvConfig cfg = env_from_manifest(manifest);
    const std::size_t episodes = manifest.value("episodes", std::size_t{500});
    const std::uint64_t seed = manifest.value("seed", std::uint64_t{1000});
    const std::size_t workers = manifest.value("workers", std::size_t{1});

    const EvalReport report = std::visit(
        [&](const auto& c) { return evaluate(c, cfg, episodes, seed, workers); },
        ctrl);

    std::vector<std::string> written;
    write_eval_csv((out_dir / "report.csv").string(), report);
    written.push_back("report.csv");
    write_outcome_log_csv((out_dir / "outcomes.csv").string(), report);
    written.push_back("outcomes.csv");

    json effective;
    effective["format_version"] = 1;
    effective["command"] = "eval";
    effective["controller"] = resolved_controller;
    effective["env"] = kv_to_json(cfg.to_kv());
    effective["episodes"] = episodes;
    effective["seed"] = seed;
    effective["workers"] = workers;
    write_manifest(out_dir, effective, written);
    return written;
}

std::vector<std::string> cmd_sweep(const json& manifest,
                                   const fs::path& out_dir) {
    const std::string variant = manifest.at("variant").get<std::string>();
    const std::vector<double> thresholds_mm =
        manifest.at("thresholds_mm").get<std::vector<double>>();
    if (thresholds_mm.empty()) {
        throw ConfigError("manifest: thresholds_mm is empty");
    }
    std::vector<double> thresholds_m;
    thresholds_m.reserve(thresholds_mm.size());
    for (double mm : thresholds_mm) thresholds_m.push_back(mm / 1000.0);
    const std::size_t eval_episodes =
        manifest.value("eval_episodes", std::size_t{500});
    const std::uint64_t eval_seed =
        manifest.value("eval_seed", std::uint64_t{1000});

    json effective;
    effective["format_version"] = 1;
    effective["command"] = "sweep";
    effective["variant"] = variant;
    effective["thresholds_mm"] = thresholds_mm;
    effective["eval_episodes"] = eval_episodes;
    effective["eval_seed"] = eval_seed;

    SweepResult sweep;
    if (variant == "hybrid") {
        json resolved_controller;
        const AnyController ctrl = load_controller_spec(
            manifest.at("controller"), resolved_controller);
        const auto* hybrid = std::get_if<HybridController>(&ctrl);
        if (hybrid == nullptr) {
            throw ConfigError("manifest: hybrid sweep needs a hybrid controller");
        }
        const EnvConfig cfg = env_from_manifest(manifest);
        const std::size_t workers =
            manifest.value("workers", std::size_t{1});
        sweep = sweep_hybrid(*hybrid, cfg, thresholds_m, eval_episodes,
                             eval_seed, workers);
        effective["controller"] = resolved_controller;
        effective["env"] = kv_to_json(cfg.to_kv());
        effective["workers"] = workers;
    } else if (variant == "monolithic") {
        const TrainSpec spec =
            train_spec_from_manifest(manifest, RewardMode::Monolithic);
        sweep = sweep_monolithic(spec, thresholds_m, eval_episodes, eval_seed);
        emit_train_fields(effective, spec);
        effective.erase("mode");
    } else {
        throw ConfigError("manifest: unknown sweep variant '" + variant +
                          "' (expected hybrid or monolithic)");
    }

    std::vector<std::string> written;
    write_sweep_csv((out_dir / "sweep.csv").string(), sweep);
    written.push_back("sweep.csv");
    write_sweep_plot_json((out_dir / "sweep.json").string(), sweep);
    written.push_back("sweep.json");
    write_manifest(out_dir, effective, written);
    return written;
}

std::vector<std::string> cmd_scenarios(const json& manifest,
                                       const fs::path& out_dir) {
    const json& specs = manifest.at("controllers");
    if (!specs.is_array() || specs.empty()) {
        throw ConfigError("manifest: controllers must be a non-empty array");
    }
    // Deques keep controller addresses stable for the ControllerRef list.
    std::deque<MonolithicController> monos;
    std::deque<HybridController> hybrids;
    std::vector<ControllerRef> refs;
    json resolved_specs = json::array();
    for (const json& spec : specs) {
        ControllerRef ref;
        ref.name = spec.at("name").get<std::string>();
        json resolved;
        AnyController ctrl = load_controller_spec(spec, resolved);
        resolved["name"] = ref.name;
        resolved_specs.push_back(std::move(resolved));
        if (auto* mono = std::get_if<MonolithicController>(&ctrl)) {
            monos.push_back(std::move(*mono));
            ref.mono = &monos.back();
        } else {
            hybrids.push_back(std::move(std::get<HybridController>(ctrl)));
            ref.hybrid = &hybrids.back();
        }
        refs.push_back(std::move(ref));
    }
    const EnvConfig cfg = env_from_manifest(manifest);
    const std::size_t repetitions =
        manifest.value("repetitions", std::size_t{50});
    const std::uint64_t seed = manifest.value("seed", std::uint64_t{2000});

    const ScenarioTable table = run_scenarios(refs, cfg, repetitions, seed);

    std::vector<std::string> written;
    write_scenario_csv((out_dir / "scenarios.csv").string(), table);
    written.push_back("scenarios.csv");

    json effective;
    effective["format_version"] = 1;
    effective["command"] = "scenarios";
    effective["controllers"] = resolved_specs;
    effective["env"] = kv_to_json(cfg.to_kv());
    effective["repetitions"] = repetitions;
    effective["seed"] = seed;
    write_manifest(out_dir, effective, written);
    return written;
}

std::vector<std::string> cmd_ablate(const json& manifest,
                                    const fs::path& out_dir) {
    const std::vector<double> p_o_values =
        manifest.at("p_o_values").get<std::vector<double>>();
    const std::vector<double> p_s_values =
        manifest.at("p_s_values").get<std::vector<double>>();
    if (p_o_values.empty() || p_s_values.empty()) {
        throw ConfigError("manifest: p_o_values and p_s_values must be non-empty");
    }
    const TrainSpec spec =
        train_spec_from_manifest(manifest, RewardMode::Monolithic);
    const std::size_t eval_episodes =
        manifest.value("eval_episodes", std::size_t{300});
    const std::uint64_t eval_seed =
        manifest.value("eval_seed", std::uint64_t{1000});

    const AblationGrid grid = ablation_grid(p_o_values, p_s_values, spec,
                                            eval_episodes, eval_seed);

    std::vector<std::string> written;
    write_ablation_csv((out_dir / "ablation.csv").string(), grid);
    written.push_back("ablation.csv");

    json effective;
    effective["format_version"] = 1;
    effective["command"] = "ablate";
    effective["p_o_values"] = p_o_values;
    effective["p_s_values"] = p_s_values;
    emit_train_fields(effective, spec);
    effective.erase("mode");
    effective["eval_episodes"] = eval_episodes;
    effective["eval_seed"] = eval_seed;
    write_manifest(out_dir, effective, written);
    return written;
}

std::vector<std::string> cmd_trace(const json& manifest,
                                   const fs::path& out_dir) {
    json resolved_controller;
    const AnyController ctrl =
        load_controller_spec(manifest.at("controller"), resolved_controller);
    ControllerRef ref;
    ref.name = "traced";
    if (const auto* mono = std::get_if<MonolithicController>(&ctrl)) {
        ref.mono = mono;
    } else {
        ref.hybrid = &std::get<HybridController>(ctrl);
    }

    const EnvConfig cfg = env_from_manifest(manifest);
    const std::uint64_t seed = manifest.value("seed", std::uint64_t{3000});

    json traj_spec = manifest.value("trajectory", json{{"kind", "random"}});
    const std::string traj_kind = traj_spec.at("kind").get<std::string>();
    ObstacleTrajectory trajectory = ObstacleTrajectory::random_waypoints();
    std::optional<Vec3> target;
    json effective_traj;
    effective_traj["kind"] = traj_kind;
    if (traj_kind == "scenario") {
        const int id = traj_spec.at("id").get<int>();
        const double speed = traj_spec.value(
            "speed", 0.5 * (cfg.obstacle_speed_min + cfg.obstacle_speed_max));
        trajectory = scenario_trajectory(id, speed);
        target = scenario_target();
        effective_traj["id"] = id;
        effective_traj["speed"] = speed;
    } else if (traj_kind != "random") {
        throw ConfigError("manifest: unknown trajectory kind '" + traj_kind +
                          "' (expected random or scenario)");
    }
    if (manifest.contains("target")) {
        const auto xyz = manifest.at("target").get<std::vector<double>>();
        if (xyz.size() != 3) {
            throw ConfigError("manifest: target must be [x, y, z]");
        }
        target = Vec3{xyz[0], xyz[1], xyz[2]};
    }

    const std::vector<TraceRow> rows =
        trace_episode(ref, cfg, trajectory, target, seed);

    std::vector<std::string> written;
    write_trace_csv((out_dir / "trace.csv").string(), rows);
    written.push_back("trace.csv");

    json effective;
    effective["format_version"] = 1;
    effective["command"] = "trace";
    effective["controller"] = resolved_controller;
    effective["env"] = kv_to_json(cfg.to_kv());
    effective["seed"] = seed;
    effective["trajectory"] = effective_traj;
    if (target.has_value()) {
        effective["target"] = {target->x, target->y, target->z};
    }
    write_manifest(out_dir, effective, written);
    return written;
}

}  // namespace

std::vector<std::string> run_command_json(const std::string& manifest_json,
                                          const std::string& out_dir) {
    json manifest;
    try {
        manifest = json::parse(manifest_json);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("manifest: invalid JSON: ") + e.what());
    }
    try {
        if (!manifest.is_object()) {
            throw ConfigError("manifest: top level must be an object");
        }
        const int version = manifest.value("format_version", 1);
        if (version != 1) {
            throw ConfigError("manifest: unsupported format_version " +
                              std::to_string(version));
        }
        const std::string command =
            manifest.at("command").get<std::string>();
        const fs::path out(out_dir);
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec) {
            throw IoError("cannot create output directory " + out.string() +
                          ": " + ec.message());
        }
        if (command == "train") return cmd_train(manifest, out);
        if (command == "eval") return cmd_eval(manifest, out);
        if (command == "sweep") return cmd_sweep(manifest, out);
        if (command == "scenarios") return cmd_scenarios(manifest, out);
        if (command == "ablate") return cmd_ablate(manifest, out);
        if (command == "trace") return cmd_trace(manifest, out);
        throw ConfigError("manifest: unknown command '" + command + "'");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest: ") + e.what());
    }
}

}  // namespace reachavoid
