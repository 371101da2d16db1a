#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdpkit/bellman.hpp"
#include "mdpkit/model.hpp"

namespace mdpkit {

enum class OnlineMode { plain, exploration, rollout };

enum class ImprovementRule {
  argmin,           // take the best Q-factor, ties to the earliest declared action
  first_improving,  // take the first action in declaration order that beats the bar
};

const char* to_string(OnlineMode mode);
const char* to_string(ImprovementRule rule);
std::optional<OnlineMode> parse_online_mode(const std::string& text);
std::optional<ImprovementRule> parse_improvement_rule(const std::string& text);

struct OnlineConfig {
  OnlineMode mode = OnlineMode::plain;
  ImprovementRule improvement_rule = ImprovementRule::argmin;
  // An action only displaces the incumbent when its Q-factor beats the
  // current cost by more than this margin, so linear-solve noise cannot
  // flip ties.
  double epsilon_improve = 1e-9;
  int max_steps = 1000;
  // Consecutive unchanged steps required before the run may be declared
  // stable (the trailing window must also cover a policy-closed state set).
  // 0 means "pick the default of 10 * n at run time".
  int stable_window = 0;
  std::uint64_t seed = 0;
};

struct ImprovementResult {
  int action = 0;  // 0-based index into U(x)
  bool changed = false;
};

/// Improvement test at a single state: when some action's Q-factor under J
/// beats J(x) by more than epsilon_improve, returns that action (the argmin,
/// or the first improving one, per the configured rule) with changed=true;
/// otherwise keeps policy(x). Expects J = evaluate_policy_exact(policy).
ImprovementResult improvement_step(const MdpInstance& instance, const StationaryPolicy& policy,
                                   const CostVector& J, int x, const OnlineConfig& config);

struct OnlineStep {
  int k = 0;
  int state = 0;                     // x_k
  std::vector<double> q_values;      // Q-factor row at x_k, declaration order
  int chosen_action = 0;             // action followed out of x_k (post-improvement)
  bool changed = false;              // any policy edit this step
  std::vector<int> changed_states;   // where the edits landed (empty, {x_k}, {xbar}, or both)
  std::optional<int> explore_state;  // exploration mode: the extra state examined
  std::optional<int> explore_action;
  std::optional<CostVector> cost_snapshot;  // J of the pre-edit policy, recorded on change
  int next_state = 0;                // x_{k+1}
};

enum class StopReason { max_steps, stable };

const char* to_string(StopReason reason);

struct OnlineRunLog {
  OnlineConfig config;  // with stable_window resolved to its effective value
  int x0 = 0;
  StationaryPolicy initial_policy;
  std::vector<OnlineStep> steps;
  StationaryPolicy final_policy;
  CostVector final_cost;
  int final_state = 0;
  int policy_changes = 0;
  StopReason reason = StopReason::max_steps;
  std::vector<int> visit_counts;  // per state, 1-based semantics at index x-1
  // Sorted recurrent-set estimate. A stable run reports the states covered by
  // its final stable window, a policy-closed set; a run that ran out of budget
  // reports everything seen since the last policy change.
  std::vector<int> recurrent_set;
};

/// On-line policy iteration along a single simulated trajectory.
///
/// Each step evaluates the Q-factor row at the current state and applies the
/// improvement test there; exploration mode additionally draws a second
/// state uniformly from the others (skipped when n == 1) and applies the
/// same test against the same cost vector, current-state edit first. Rollout
/// mode never edits the policy: it records the greedy action under the
/// initial policy's cost and follows it. The next state is sampled from the
/// followed action's distribution with the seeded generator.
///
/// The policy cost is recomputed by linear solve only on steps that edited
/// the policy; in between, the cached vector stays valid. The run stops at
/// max_steps, or earlier once the policy has survived stable_window
/// consecutive steps unchanged and the states covered by that window form a
/// set the policy cannot leave, so the reported recurrent-set estimate has
/// wrapped up a whole recurrent class rather than a still-growing prefix.
OnlineRunLog run_online_pi(const MdpInstance& instance, int x0, const StationaryPolicy& mu0,
                           const OnlineConfig& config);

struct Finding {
  bool ok = false;
  std::string check;
  std::string detail;
};

struct VerificationReport {
  std::vector<Finding> findings;
  bool all_ok() const {
    for (const auto& f : findings) {
      if (!f.ok) return false;
    }
    return true;
  }
};

/// Post-hoc audit of a run log against its instance:
///  - recorded cost snapshots never increase anywhere, and strictly decrease
///    at each edited state;
///  - edits per step stay within the mode's budget (one, or two under
///    exploration) and land where the log says they landed;
///  - every recorded transition has positive probability under the followed
///    action;
///  - a stable plain run is locally optimal over its recurrent-set estimate,
///    which the final policy cannot leave;
///  - a stable exploration run is globally optimal.
VerificationReport verify_run(const MdpInstance& instance, const OnlineRunLog& log);

}  // namespace mdpkit
