#include "reachavoid/controllers.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "reachavoid/error.hpp"

namespace reachavoid {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void check_actor(const DenseNet& net, std::size_t want_inputs,
                 const char* name) {
    if (net.input_size() != want_inputs) {
        throw ShapeError(std::string(name) + " policy must take " +
                         std::to_string(want_inputs) + " inputs, has " +
                         std::to_string(net.input_size()));
    }
    if (net.output_size() != kNumJoints) {
        throw ShapeError(std::string(name) + " policy must emit 7 actions");
    }
}

std::vector<double> scaled_action(const DenseNet& policy,
                                  std::span<const double> obs, double bound) {
    std::vector<double> a = policy.infer(obs);
    for (double& v : a) v *= bound;
    return a;
}

json read_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::parse_error& e) {
        throw IoError("bad bundle JSON in " + path + ": " + e.what());
    }
    return j;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open for write: " + path);
    os << j.dump(2) << '\n';
    if (!os) throw IoError("write failed: " + path);
}

std::string sibling(const std::string& json_path, const std::string& name) {
    return (fs::path(json_path).parent_path() / name).string();
}

std::string net_file(const std::string& json_path, const std::string& role) {
    return fs::path(json_path).stem().string() + "." + role + ".ranet";
}

double require_number(const json& j, const char* key,
                      const std::string& path) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw IoError("bundle " + path + " missing numeric field '" + key +
                      "'");
    }
    return j[key].get<double>();
}

std::string require_string(const json& j, const char* key,
                           const std::string& path) {
    if (!j.contains(key) || !j[key].is_string()) {
        throw IoError("bundle " + path + " missing string field '" + key +
                      "'");
    }
    return j[key].get<std::string>();
}

}  // namespace

const char* to_string(HaltCause cause) {
    switch (cause) {
        case HaltCause::None: return "none";
        case HaltCause::Collision: return "collision";
        case HaltCause::GoalReached: return "goal_reached";
    }
    return "unknown";
}

const char* to_string(ActivePolicy policy) {
    switch (policy) {
        case ActivePolicy::None: return "none";
        case ActivePolicy::Avoid: return "avoid";
        case ActivePolicy::Reach: return "reach";
    }
    return "unknown";
}

MonolithicController::MonolithicController(DenseNet policy, double tau_o,
                                           double tau_s, double action_bound)
    : policy_(std::move(policy)),
      tau_o_(tau_o),
      tau_s_(tau_s),
      action_bound_(action_bound) {
    check_actor(policy_, 20, "monolithic");
    if (!(tau_o_ >= 0.0)) throw DomainError("tau_o must be non-negative");
    if (!(tau_s_ > 0.0)) throw DomainError("tau_s must be positive");
    if (!(action_bound_ > 0.0)) {
        throw DomainError("action bound must be positive");
    }
}

HybridController::HybridController(DenseNet avoid_policy,
                                   DenseNet reach_policy, double tau_hyb,
                                   double tau_o, double tau_t,
                                   double action_bound)
    : avoid_policy_(std::move(avoid_policy)),
      reach_policy_(std::move(reach_policy)),
      tau_hyb_(tau_hyb),
      tau_o_(tau_o),
      tau_t_(tau_t),
      action_bound_(action_bound) {
    check_actor(avoid_policy_, 20, "avoidance");
    check_actor(reach_policy_, 17, "reaching");
    if (!(tau_o_ >= 0.0)) throw DomainError("tau_o must be non-negative");
    if (!(tau_t_ > 0.0)) throw DomainError("tau_t must be positive");
    if (!(tau_o_ < tau_hyb_)) {
        throw DomainError("tau_hyb must exceed tau_o");
    }
    if (!(action_bound_ > 0.0)) {
        throw DomainError("action bound must be positive");
    }
}

void HybridController::set_operation_point(double new_tau_hyb) {
    if (!(tau_o_ < new_tau_hyb)) {
        throw DomainError("tau_hyb must exceed tau_o");
    }
    tau_hyb_ = new_tau_hyb;
}

ControlDecision monolithic_step(const MonolithicController& ctrl, double d_t,
                                double d_o,
                                std::span<const double> obs_with_obstacle) {
    ControlDecision d;
    if (d_o < ctrl.tau_o()) {
        d.halt = true;
        d.halt_cause = HaltCause::Collision;
        return d;
    }
    if (d_t < ctrl.tau_s()) {
        d.halt = true;
        d.halt_cause = HaltCause::GoalReached;
        return d;
    }
    // Single policy: no switch, so active_policy stays None.
    d.action =
        scaled_action(ctrl.policy(), obs_with_obstacle, ctrl.action_bound());
    return d;
}

ControlDecision hybrid_step(const HybridController& ctrl, double d_t,
                            double d_o,
                            std::span<const double> obs_with_obstacle,
                            std::span<const double> obs_reach_only) {
    ControlDecision d;
    if (d_o < ctrl.tau_o()) {
        d.halt = true;
        d.halt_cause = HaltCause::Collision;
        return d;
    }
    if (d_t < ctrl.tau_t()) {
        d.halt = true;
        d.halt_cause = HaltCause::GoalReached;
        return d;
    }
    if (d_o < ctrl.tau_hyb()) {
        d.active_policy = ActivePolicy::Avoid;
        d.action = scaled_action(ctrl.avoid_policy(), obs_with_obstacle,
                                 ctrl.action_bound());
    } else {
        d.active_policy = ActivePolicy::Reach;
        d.action = scaled_action(ctrl.reach_policy(), obs_reach_only,
                                 ctrl.action_bound());
    }
    return d;
}

BundleKind peek_bundle_kind(const std::string& json_path) {
    const json j = read_json(json_path);
    const std::string kind = require_string(j, "kind", json_path);
    if (kind == "monolithic") return BundleKind::Monolithic;
    if (kind == "hybrid") return BundleKind::Hybrid;
    throw IoError("bundle " + json_path + " has unknown kind '" + kind + "'");
}

void save_bundle(const MonolithicController& ctrl,
                 const std::string& json_path) {
    const std::string policy_name = net_file(json_path, "policy");
    ctrl.policy().save(sibling(json_path, policy_name));
    json j;
    j["kind"] = "monolithic";
    j["tau_o"] = ctrl.tau_o();
    j["tau_s"] = ctrl.tau_s();
    j["action_bound"] = ctrl.action_bound();
    j["policy"] = policy_name;
    write_json(j, json_path);
}

void save_bundle(const HybridController& ctrl, const std::string& json_path) {
    const std::string avoid_name = net_file(json_path, "avoid");
    const std::string reach_name = net_file(json_path, "reach");
    ctrl.avoid_policy().save(sibling(json_path, avoid_name));
    ctrl.reach_policy().save(sibling(json_path, reach_name));
    json j;
    j["kind"] = "hybrid";
    j["tau_hyb"] = ctrl.tau_hyb();
    j["tau_o"] = ctrl.tau_o();
    j["tau_t"] = ctrl.tau_t();
    j["action_bound"] = ctrl.action_bound();
    j["policy_avoid"] = avoid_name;
    j["policy_reach"] = reach_name;
    write_json(j, json_path);
}

MonolithicController load_monolithic_bundle(const std::string& json_path) {
    const json j = read_json(json_path);
    if (require_string(j, "kind", json_path) != "monolithic") {
        throw IoError("bundle " + json_path + " is not monolithic");
    }
    DenseNet policy = DenseNet::load(
        sibling(json_path, require_string(j, "policy", json_path)));
    return MonolithicController(std::move(policy),
                                require_number(j, "tau_o", json_path),
                                require_number(j, "tau_s", json_path),
                                require_number(j, "action_bound", json_path));
}

HybridController load_hybrid_bundle(const std::string& json_path) {
    const json j = read_json(json_path);
    if (require_string(j, "kind", json_path) != "hybrid") {
        throw IoError("bundle " + json_path + " is not hybrid");
    }
    DenseNet avoid = DenseNet::load(
        sibling(json_path, require_string(j, "policy_avoid", json_path)));
    DenseNet reach = DenseNet::load(
        sibling(json_path, require_string(j, "policy_reach", json_path)));
    return HybridController(std::move(avoid), std::move(reach),
                            require_number(j, "tau_hyb", json_path),
                            require_number(j, "tau_o", json_path),
                            require_number(j, "tau_t", json_path),
                            require_number(j, "action_bound", json_path));
}

}  // namespace reachavoid
