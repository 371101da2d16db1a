#include "mdpkit/online_pi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mdpkit/rng.hpp"

namespace mdpkit {

const char* to_string(OnlineMode mode) {
  switch (mode) {
    case OnlineMode::plain: return "plain";
    case OnlineMode::exploration: return "exploration";
    case OnlineMode::rollout: return "rollout";
  }
  return "?";
}

const char* to_string(ImprovementRule rule) {
  switch (rule) {
    case ImprovementRule::argmin: return "argmin";
    case ImprovementRule::first_improving: return "first-improving";
  }
  return "?";
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::max_steps: return "max-steps";
    case StopReason::stable: return "stable";
  }
  return "?";
}

std::optional<OnlineMode> parse_online_mode(const std::string& text) {
  if (text == "plain") return OnlineMode::plain;
  if (text == "exploration") return OnlineMode::exploration;
  if (text == "rollout") return OnlineMode::rollout;
  return std::nullopt;
}

std::optional<ImprovementRule> parse_improvement_rule(const std::string& text) {
  if (text == "argmin") return ImprovementRule::argmin;
  if (text == "first-improving" || text == "first_improving") return ImprovementRule::first_improving;
  return std::nullopt;
}

namespace {

void require_config(const OnlineConfig& config) {
  if (config.epsilon_improve < 0.0) {
    throw std::invalid_argument("run_online_pi: epsilon_improve must be >= 0");
  }
  if (config.max_steps < 0) throw std::invalid_argument("run_online_pi: max_steps must be >= 0");
  if (config.stable_window < 0) {
    throw std::invalid_argument("run_online_pi: stable_window must be >= 0");
  }
}

int sample_successor(const MdpAction& act, Rng& rng) {
  const double u = rng.uniform01();
  double cumulative = 0.0;
  for (size_t i = 0; i < act.successors.size(); ++i) {
    cumulative += act.probs[i];
    if (u < cumulative) return act.successors[i];
  }
  // The cumulative sum can land a hair under 1; fall back to the last
  // successor that actually has probability mass.
  for (size_t i = act.successors.size(); i-- > 0;) {
    if (act.probs[i] > 0.0) return act.successors[i];
  }
  return act.successors.back();
}

int greedy_from_row(const std::vector<double>& q_values) {
  int best_index = 0;
  double best = q_values[0];
  for (size_t a = 1; a < q_values.size(); ++a) {
    if (q_values[a] < best) {
      best = q_values[a];
      best_index = static_cast<int>(a);
    }
  }
  return best_index;
}

}  // namespace

ImprovementResult improvement_step(const MdpInstance& instance, const StationaryPolicy& policy,
                                   const CostVector& J, int x, const OnlineConfig& config) {
  if (!policy_valid(instance, policy)) {
    throw std::invalid_argument("improvement_step: policy does not fit the instance");
  }
  if (x < 1 || x > instance.n) throw std::out_of_range("improvement_step: state outside 1..n");

  const int incumbent = policy.choice[static_cast<size_t>(x - 1)];
  const QFactorRow row = q_factor_row(instance, x, J);
  const double bar = J[static_cast<size_t>(x - 1)] - config.epsilon_improve;

  int candidate = incumbent;
  if (config.improvement_rule == ImprovementRule::argmin) {
    const int best = greedy_from_row(row.values);
    if (row.values[static_cast<size_t>(best)] < bar) candidate = best;
  } else {
    for (size_t a = 0; a < row.values.size(); ++a) {
      if (row.values[a] < bar) {
        candidate = static_cast<int>(a);
        break;
      }
    }
  }
  return {candidate, candidate != incumbent};
}

OnlineRunLog run_online_pi(const MdpInstance& instance, int x0, const StationaryPolicy& mu0,
                           const OnlineConfig& config) {
  if (x0 < 1 || x0 > instance.n) throw std::invalid_argument("run_online_pi: x0 outside 1..n");
  if (!policy_valid(instance, mu0)) {
    throw std::invalid_argument("run_online_pi: initial policy does not fit the instance");
  }
  require_config(config);

  OnlineConfig cfg = config;
  if (cfg.stable_window == 0) cfg.stable_window = 10 * instance.n;

  OnlineRunLog log;
  log.config = cfg;
  log.x0 = x0;
  log.initial_policy = mu0;
  log.visit_counts.assign(static_cast<size_t>(instance.n), 0);

  StationaryPolicy policy = mu0;
  CostVector J = evaluate_policy_exact(instance, policy);
  Rng rng(cfg.seed);
  const bool rollout = cfg.mode == OnlineMode::rollout;

  int x = x0;
  log.visit_counts[static_cast<size_t>(x - 1)] += 1;
  std::vector<char> seen_since_edit(static_cast<size_t>(instance.n) + 1, 0);
  seen_since_edit[static_cast<size_t>(x)] = 1;
  // Last step at which each state was the step's current state. Only those
  // visits count toward the recurrent-set estimate: the current state is
  // where the improvement test runs, so every member of an edit-free window
  // has been tested against the final cost vector.
  std::vector<int> last_current(static_cast<size_t>(instance.n) + 1, -1);
  int stable_steps = 0;
  log.reason = StopReason::max_steps;

  // States that were current during steps horizon..now, provided that set is
  // closed under the policy (every positive-probability successor of a
  // member is a member). Empty when the window's coverage has not yet
  // wrapped up a full recurrent class.
  const auto closed_window_set = [&](int horizon) {
    std::vector<int> members;
    for (int s = 1; s <= instance.n; ++s) {
      if (last_current[static_cast<size_t>(s)] >= horizon) members.push_back(s);
    }
    for (int s : members) {
      const MdpAction& act = instance.action(s, policy.choice[static_cast<size_t>(s - 1)]);
      for (size_t i = 0; i < act.successors.size(); ++i) {
        if (act.probs[i] <= 0.0) continue;
        if (last_current[static_cast<size_t>(act.successors[i])] < horizon) {
          return std::vector<int>{};
        }
      }
    }
    return members;
  };

  for (int k = 0; k < cfg.max_steps; ++k) {
    OnlineStep step;
    step.k = k;
    step.state = x;
    last_current[static_cast<size_t>(x)] = k;
    step.q_values = q_factor_row(instance, x, J).values;

    int follow_action;
    if (rollout) {
      // Rollout never touches the policy: act greedily against the initial
      // policy's cost and keep simulating.
      follow_action = greedy_from_row(step.q_values);
    } else {
      const ImprovementResult local = improvement_step(instance, policy, J, x, cfg);
      if (local.changed) {
        step.cost_snapshot = J;
        policy.choice[static_cast<size_t>(x - 1)] = local.action;
        step.changed_states.push_back(x);
      }
      follow_action = policy.choice[static_cast<size_t>(x - 1)];

      if (cfg.mode == OnlineMode::exploration && instance.n > 1) {
        // A second improvement site, drawn uniformly from the other states
        // (rejection keeps the draw uniform), judged against the same cost
        // vector as the edit above.
        int xbar;
        do {
          xbar = rng.uniform_state(instance.n);
        } while (xbar == x);
        step.explore_state = xbar;
        const ImprovementResult away = improvement_step(instance, policy, J, xbar, cfg);
        step.explore_action = away.action;
        if (away.changed) {
          if (!step.cost_snapshot) step.cost_snapshot = J;
          policy.choice[static_cast<size_t>(xbar - 1)] = away.action;
          step.changed_states.push_back(xbar);
        }
      }
    }
    step.changed = !step.changed_states.empty();
    step.chosen_action = follow_action;

    const int next = sample_successor(instance.action(x, follow_action), rng);
    step.next_state = next;
    const bool edited = step.changed;
    log.steps.push_back(std::move(step));

    if (edited) {
      J = evaluate_policy_exact(instance, policy);
      log.policy_changes += 1;
      stable_steps = 0;
      std::fill(seen_since_edit.begin(), seen_since_edit.end(), 0);
    } else {
      stable_steps += 1;
    }

    x = next;
    log.visit_counts[static_cast<size_t>(x - 1)] += 1;
    seen_since_edit[static_cast<size_t>(x)] = 1;

    // Stability needs more than an edit-free window: the states covered by
    // that window must form a policy-closed set, otherwise the trajectory is
    // still feeding new states into the estimate and stopping now would
    // report a recurrent set the chain can escape or has not finished
    // improvement-testing.
    if (stable_steps >= cfg.stable_window) {
      std::vector<int> members = closed_window_set(k - cfg.stable_window + 1);
      if (!members.empty()) {
        log.reason = StopReason::stable;
        log.recurrent_set = std::move(members);
        break;
      }
    }
  }

  log.final_policy = policy;
  log.final_cost = J;
  log.final_state = x;
  if (log.recurrent_set.empty()) {
    // Budget ran out first; fall back to everything seen since the last edit,
    // which is the best unconverged estimate available.
    for (int s = 1; s <= instance.n; ++s) {
      if (seen_since_edit[static_cast<size_t>(s)]) log.recurrent_set.push_back(s);
    }
  }
  return log;
}

namespace {

std::string format_state_step(int k, int x) {
  return "step " + std::to_string(k) + ", state " + std::to_string(x);
}

}  // namespace

VerificationReport verify_run(const MdpInstance& instance, const OnlineRunLog& log) {
  VerificationReport report;
  auto add = [&report](bool ok, std::string check, std::string detail) {
    report.findings.push_back({ok, std::move(check), std::move(detail)});
  };

  // Cost snapshots in step order, each paired with the edits of its step;
  // the final cost closes the chain.
  struct SnapshotEntry {
    int k;
    const CostVector* cost;
    const std::vector<int>* edits;
  };
  std::vector<SnapshotEntry> chain;
  for (const OnlineStep& step : log.steps) {
    if (step.cost_snapshot) chain.push_back({step.k, &*step.cost_snapshot, &step.changed_states});
  }

  bool monotone_ok = true;
  bool strict_ok = true;
  std::string monotone_detail;
  std::string strict_detail;
  const double strict_margin = log.config.epsilon_improve / 2.0;
  for (size_t i = 0; i < chain.size(); ++i) {
    const CostVector& before = *chain[i].cost;
    const CostVector& after = (i + 1 < chain.size()) ? *chain[i + 1].cost : log.final_cost;
    for (size_t j = 0; j < before.size(); ++j) {
      if (after[j] > before[j] + 1e-8 && monotone_ok) {
        monotone_ok = false;
        monotone_detail = "cost rose at " + format_state_step(chain[i].k, static_cast<int>(j) + 1);
      }
    }
    for (int x : *chain[i].edits) {
      if (!(after[static_cast<size_t>(x - 1)] < before[static_cast<size_t>(x - 1)] - strict_margin) &&
          strict_ok) {
        strict_ok = false;
        strict_detail = "no strict decrease at " + format_state_step(chain[i].k, x);
      }
    }
  }
  add(monotone_ok, "cost-monotonicity", monotone_detail);
  add(strict_ok, "strict-improvement-at-edits", strict_detail);

  // Edit budget and bookkeeping per step.
  bool edits_ok = true;
  std::string edits_detail;
  for (const OnlineStep& step : log.steps) {
    std::string problem;
    if (step.changed != !step.changed_states.empty() ||
        step.changed != step.cost_snapshot.has_value()) {
      problem = "changed flag disagrees with the record";
    } else if (log.config.mode == OnlineMode::rollout && step.changed) {
      problem = "rollout run edited the policy";
    } else if (log.config.mode == OnlineMode::plain &&
               (step.changed_states.size() > 1 ||
                (step.changed_states.size() == 1 && step.changed_states[0] != step.state))) {
      problem = "plain-mode edit outside the visited state";
    } else if (log.config.mode == OnlineMode::exploration) {
      if (step.changed_states.size() > 2) {
        problem = "more than two edits in one step";
      } else {
        for (int x : step.changed_states) {
          if (x != step.state && (!step.explore_state || x != *step.explore_state)) {
            problem = "edit outside the visited and exploration states";
          }
        }
      }
    }
    if (!problem.empty() && edits_ok) {
      edits_ok = false;
      edits_detail = problem + " at step " + std::to_string(step.k);
    }
  }
  add(edits_ok, "edit-budget", edits_detail);

  // The recorded trajectory must be a real trajectory: contiguous states and
  // positive-probability transitions under the followed actions.
  bool trajectory_ok = true;
  std::string trajectory_detail;
  for (size_t i = 0; i < log.steps.size(); ++i) {
    const OnlineStep& step = log.steps[i];
    std::string problem;
    if (i == 0 && step.state != log.x0) {
      problem = "first step does not start at x0";
    } else if (i + 1 < log.steps.size() && step.next_state != log.steps[i + 1].state) {
      problem = "successor does not match the next step";
    } else if (i + 1 == log.steps.size() && step.next_state != log.final_state) {
      problem = "successor does not match the final state";
    } else {
      const MdpAction& act = instance.action(step.state, step.chosen_action);
      double p = 0.0;
      for (size_t t = 0; t < act.successors.size(); ++t) {
        if (act.successors[t] == step.next_state) p = act.probs[t];
      }
      if (!(p > 0.0)) problem = "transition has zero probability";
    }
    if (!problem.empty() && trajectory_ok) {
      trajectory_ok = false;
      trajectory_detail = problem + " at step " + std::to_string(step.k);
    }
  }
  add(trajectory_ok, "trajectory", trajectory_detail);

  // The recorded final cost must be the final policy's cost.
  {
    const CostVector recomputed = evaluate_policy_exact(instance, log.final_policy);
    double gap = 0.0;
    for (size_t j = 0; j < recomputed.size(); ++j) {
      gap = std::max(gap, std::abs(recomputed[j] - log.final_cost[j]));
    }
    double scale = 0.0;
    for (double v : recomputed) scale = std::max(scale, std::abs(v));
    const bool ok = gap <= 1e-8 * (1.0 + scale);
    add(ok, "final-cost-consistency", ok ? "" : "final cost does not match the final policy");
  }

  if (log.config.mode == OnlineMode::plain && log.reason == StopReason::stable) {
    const bool local = check_local_optimality(instance, log.final_policy, log.recurrent_set);
    add(local, "local-optimality", local ? "" : "final policy is improvable on the recurrent-set estimate");
    const bool invariant = check_invariant_set(instance, log.final_policy, log.recurrent_set);
    add(invariant, "invariant-set",
        invariant ? "" : "final policy can leave the recurrent-set estimate");
  }

  if (log.config.mode == OnlineMode::exploration && log.reason == StopReason::stable) {
    const bool global = check_global_optimality(instance, log.final_policy);
    add(global, "global-optimality", global ? "" : "final policy is not globally optimal");
  }

  return report;
}

}  // namespace mdpkit
