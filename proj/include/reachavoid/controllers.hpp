#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reachavoid/dense_net.hpp"
#include "reachavoid/env.hpp"

namespace reachavoid {

enum class HaltCause : std::uint8_t { None, Collision, GoalReached };
enum class ActivePolicy : std::uint8_t { None, Avoid, Reach };

const char* to_string(HaltCause cause);
const char* to_string(ActivePolicy policy);

// One control step's verdict: either a halt (action empty, a cause set) or
// an action from exactly one policy.
struct ControlDecision {
    bool halt = false;
    HaltCause halt_cause = HaltCause::None;
    ActivePolicy active_policy = ActivePolicy::None;
    std::vector<double> action;  // empty iff halt
};

// Single-policy controller: one 20-input actor trained on the composite
// reward at a fixed (tau_o, tau_s) operation point. Changing the operation
// point requires retraining, so the thresholds are immutable here.
class MonolithicController {
public:
    MonolithicController(DenseNet policy, double tau_o, double tau_s,
                         double action_bound);

    const DenseNet& policy() const { return policy_; }
    double tau_o() const { return tau_o_; }
    double tau_s() const { return tau_s_; }
    double action_bound() const { return action_bound_; }

private:
    DenseNet policy_;
    double tau_o_, tau_s_, action_bound_;
};

// Dual-policy controller: a 20-input avoidance actor and a 17-input
// reaching actor, switched on the obstacle distance. tau_hyb is adjustable
// after training; the halt thresholds tau_o (collision) and tau_t (goal)
// mirror the evaluation outcome rules. Construction and adjustment require
// tau_o < tau_hyb so the avoidance branch is reachable before the
// collision halt; passing tau_o = 0 disables the collision halt (distances
// are never negative and the comparison is strict).
class HybridController {
public:
    HybridController(DenseNet avoid_policy, DenseNet reach_policy,
                     double tau_hyb, double tau_o, double tau_t,
                     double action_bound);

    const DenseNet& avoid_policy() const { return avoid_policy_; }
    const DenseNet& reach_policy() const { return reach_policy_; }
    double tau_hyb() const { return tau_hyb_; }
    double tau_o() const { return tau_o_; }
    double tau_t() const { return tau_t_; }
    double action_bound() const { return action_bound_; }

    // Moves only the switching threshold; policies untouched.
    // Throws DomainError unless tau_o < new_tau_hyb.
    void set_operation_point(double new_tau_hyb);

private:
    DenseNet avoid_policy_, reach_policy_;
    double tau_hyb_, tau_o_, tau_t_, action_bound_;
};

// Decision order: d_o < tau_o -> halt(Collision); d_t < tau_s ->
// halt(GoalReached); otherwise action = bound * policy(obs). All
// comparisons strict.
ControlDecision monolithic_step(const MonolithicController& ctrl, double d_t,
                                double d_o,
                                std::span<const double> obs_with_obstacle);

// Decision order: d_o < tau_o -> halt(Collision); d_t < tau_t ->
// halt(GoalReached); d_o < tau_hyb -> avoidance policy on the 20-input
// observation; otherwise reaching policy on the 17-input observation. All
// comparisons strict, so d_o == tau_hyb selects Reach.
ControlDecision hybrid_step(const HybridController& ctrl, double d_t,
                            double d_o,
                            std::span<const double> obs_with_obstacle,
                            std::span<const double> obs_reach_only);

// --- controller bundles: a JSON manifest naming the policy network files
//     (paths relative to the manifest) plus the thresholds ---

enum class BundleKind : std::uint8_t { Monolithic, Hybrid };

BundleKind peek_bundle_kind(const std::string& json_path);
void save_bundle(const MonolithicController& ctrl,
                 const std::string& json_path);
void save_bundle(const HybridController& ctrl, const std::string& json_path);
MonolithicController load_monolithic_bundle(const std::string& json_path);
HybridController load_hybrid_bundle(const std::string& json_path);

}  // namespace reachavoid
