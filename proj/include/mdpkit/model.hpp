#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mdpkit {

/// One control available at a state: a label plus the successor distribution
/// and the per-successor stage costs, aligned index for index.
struct MdpAction {
  std::string label;
  std::vector<int> successors;  // state ids, 1-based, distinct within an action
  std::vector<double> probs;
  std::vector<double> costs;
};

struct MdpState {
  int id = 0;  // 1-based
  std::vector<MdpAction> actions;
};

/// Finite discounted MDP. States are addressed 1..n throughout the public
/// API; action indices are 0-based declaration order within their state.
struct MdpInstance {
  int n = 0;
  double discount = 0.0;
  std::vector<MdpState> states;

  const MdpState& state(int x) const { return states[static_cast<size_t>(x - 1)]; }
  int num_actions(int x) const { return static_cast<int>(state(x).actions.size()); }
  const MdpAction& action(int x, int a) const { return state(x).actions[static_cast<size_t>(a)]; }

  /// Resolves a label to the action index at state x, or -1 when absent.
  int action_index(int x, std::string_view label) const;
};

using CostVector = std::vector<double>;

/// One action per state, stored as 0-based action indices.
struct StationaryPolicy {
  std::vector<int> choice;
  bool operator==(const StationaryPolicy&) const = default;
};

struct Violation {
  std::string where;    // e.g. "state 2, action 'to1'"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string what, ValidationReport report)
      : std::runtime_error(std::move(what)), report(std::move(report)) {}
  ValidationReport report;
};

/// Checks every structural invariant: n >= 1, discount strictly inside
/// (0, 1), no empty action sets, distinct in-range successors, finite
/// nonnegative probabilities with rows summing to 1 within 1e-9 (no silent
/// renormalization), finite costs, one cost per transition, distinct labels
/// per state. Each violation names the state/action it comes from.
ValidationReport validate(const MdpInstance& instance);

inline constexpr double kRowSumTolerance = 1e-9;

/// Parses an instance from JSON text. The schema is strict: unknown fields,
/// wrong types, out-of-order state ids, and transition/cost mismatches are
/// parse errors naming the offending field. A structurally well-formed but
/// invalid instance throws ValidationError carrying the full report.
MdpInstance load_instance(const std::string& text);
MdpInstance load_instance_file(const std::string& path);

/// Canonical serialization. load_instance(save_instance(m)) reproduces m,
/// and canonical files round-trip byte for byte.
std::string save_instance(const MdpInstance& instance);
void save_instance_file(const MdpInstance& instance, const std::string& path);

/// Three-state instance with discount 0.9 where plain on-line policy
/// iteration can stall at a policy that is locally but not globally optimal:
///   state 1: to2 (cost 1), to3 (cost 0)
///   state 2: to1 (cost 0), to3 (cost 0)
///   state 3: to2 (cost 0), stay (cost 10)
/// All transitions deterministic.
MdpInstance build_counterexample();

/// The trap policy {1->to2, 2->to1, 3->stay} for build_counterexample().
StationaryPolicy counterexample_mubar();

/// The optimal policy {1->to3, 2->to3, 3->to2} for build_counterexample().
StationaryPolicy counterexample_mustar();

/// Deterministic random instance: each state draws 1..max_actions actions,
/// each action draws `branching` distinct successors with normalized
/// positive probabilities and costs uniform in [cost_min, cost_max]. A pure
/// function of its arguments; equal arguments give identical serializations.
MdpInstance generate_random(int n, int max_actions, int branching, double cost_min,
                            double cost_max, double discount, std::uint64_t seed);

/// Policy that picks the first declared action at every state.
StationaryPolicy first_action_policy(const MdpInstance& instance);

/// Builds a policy from one label per state; throws std::invalid_argument on
/// an unknown label.
StationaryPolicy policy_from_labels(const MdpInstance& instance,
                                    const std::vector<std::string>& labels);

std::vector<std::string> policy_labels(const MdpInstance& instance,
                                       const StationaryPolicy& policy);

/// True when the policy has one in-range action index per state.
bool policy_valid(const MdpInstance& instance, const StationaryPolicy& policy);

/// FNV-1a over the canonical serialization, as 16 hex digits. Run logs
/// record it so verification can refuse a log replayed against the wrong
/// instance.
std::string instance_digest(const MdpInstance& instance);

}  // namespace mdpkit
