#include "mdpkit/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdpkit/linsolve.hpp"

namespace mdpkit {

namespace {

// Single arithmetic path for every Q-factor in the library. apply_t takes
// the min of exactly these values, so greedy decisions, operator sweeps and
// logged Q rows can never disagree in the last bit.
inline double action_value(const MdpAction& act, double discount, const CostVector& J) {
  double q = 0.0;
  for (size_t i = 0; i < act.successors.size(); ++i) {
    q += act.probs[i] * (act.costs[i] + discount * J[static_cast<size_t>(act.successors[i] - 1)]);
  }
  return q;
}

void require_cost_vector(const MdpInstance& instance, const CostVector& J, const char* who) {
  if (static_cast<int>(J.size()) != instance.n) {
    throw std::invalid_argument(std::string(who) + ": cost vector has wrong length");
  }
}

double sup_norm(const CostVector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double sup_diff(const CostVector& a, const CostVector& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

double q_factor(const MdpInstance& instance, int x, int u_index, const CostVector& J) {
  require_cost_vector(instance, J, "q_factor");
  if (x < 1 || x > instance.n) throw std::out_of_range("q_factor: state outside 1..n");
  if (u_index < 0 || u_index >= instance.num_actions(x)) {
    throw std::out_of_range("q_factor: action index outside U(" + std::to_string(x) + ")");
  }
  return action_value(instance.action(x, u_index), instance.discount, J);
}

QFactorRow q_factor_row(const MdpInstance& instance, int x, const CostVector& J) {
  require_cost_vector(instance, J, "q_factor_row");
  QFactorRow row;
  row.state = x;
  const auto& actions = instance.state(x).actions;
  row.values.reserve(actions.size());
  for (const MdpAction& act : actions) {
    row.values.push_back(action_value(act, instance.discount, J));
  }
  return row;
}

CostVector apply_tmu(const MdpInstance& instance, const StationaryPolicy& policy,
                     const CostVector& J) {
  require_cost_vector(instance, J, "apply_tmu");
  const int n = instance.n;
  CostVector out(static_cast<size_t>(n));
#pragma omp parallel for schedule(static) if (n > 64)
  for (int x = 1; x <= n; ++x) {
    const MdpAction& act = instance.action(x, policy.choice[static_cast<size_t>(x - 1)]);
    out[static_cast<size_t>(x - 1)] = action_value(act, instance.discount, J);
  }
  return out;
}

CostVector apply_t(const MdpInstance& instance, const CostVector& J) {
  require_cost_vector(instance, J, "apply_t");
  const int n = instance.n;
  CostVector out(static_cast<size_t>(n));
#pragma omp parallel for schedule(static) if (n > 64)
  for (int x = 1; x <= n; ++x) {
    const auto& actions = instance.state(x).actions;
    double best = action_value(actions[0], instance.discount, J);
    for (size_t a = 1; a < actions.size(); ++a) {
      const double q = action_value(actions[a], instance.discount, J);
      if (q < best) best = q;
    }
    out[static_cast<size_t>(x - 1)] = best;
  }
  return out;
}

CostVector evaluate_policy_exact(const MdpInstance& instance, const StationaryPolicy& policy) {
  if (!policy_valid(instance, policy)) {
    throw std::invalid_argument("evaluate_policy_exact: policy does not fit the instance");
  }
  const int n = instance.n;
  std::vector<double> A(static_cast<size_t>(n) * n, 0.0);
  std::vector<double> b(static_cast<size_t>(n), 0.0);
  for (int x = 1; x <= n; ++x) {
    const MdpAction& act = instance.action(x, policy.choice[static_cast<size_t>(x - 1)]);
    double* row = &A[static_cast<size_t>(x - 1) * n];
    row[x - 1] = 1.0;
    double expected_cost = 0.0;
    for (size_t i = 0; i < act.successors.size(); ++i) {
      row[act.successors[i] - 1] -= instance.discount * act.probs[i];
      expected_cost += act.probs[i] * act.costs[i];
    }
    b[static_cast<size_t>(x - 1)] = expected_cost;
  }
  solve_dense(A, b, n);

  const CostVector& J = b;
  const double residual = sup_diff(J, apply_tmu(instance, policy, J));
  if (residual > 1e-8 * (1.0 + sup_norm(J))) {
    throw std::runtime_error("evaluate_policy_exact: fixed-point residual out of bounds");
  }
  return b;
}

IterativeEvalResult evaluate_policy_iterative(const MdpInstance& instance,
                                              const StationaryPolicy& policy, double tol,
                                              int max_iters) {
  if (!policy_valid(instance, policy)) {
    throw std::invalid_argument("evaluate_policy_iterative: policy does not fit the instance");
  }
  IterativeEvalResult result;
  result.cost.assign(static_cast<size_t>(instance.n), 0.0);
  for (int k = 0; k < max_iters; ++k) {
    CostVector next = apply_tmu(instance, policy, result.cost);
    const double step = sup_diff(next, result.cost);
    result.cost = std::move(next);
    result.iterations = k + 1;
    if (step <= tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

ValueIterationResult value_iteration(const MdpInstance& instance, const CostVector& J0,
                                     double tol, int max_iters) {
  require_cost_vector(instance, J0, "value_iteration");
  ValueIterationResult result;
  result.cost = J0;
  for (int k = 0; k < max_iters; ++k) {
    CostVector next = apply_t(instance, result.cost);
    const double step = sup_diff(next, result.cost);
    result.cost = std::move(next);
    result.iterations = k + 1;
    result.step_sup_norms.push_back(step);
    if (step <= tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

StationaryPolicy greedy_policy(const MdpInstance& instance, const CostVector& J) {
  require_cost_vector(instance, J, "greedy_policy");
  StationaryPolicy policy;
  policy.choice.resize(static_cast<size_t>(instance.n));
  for (int x = 1; x <= instance.n; ++x) {
    const auto& actions = instance.state(x).actions;
    int best_index = 0;
    double best = action_value(actions[0], instance.discount, J);
    for (size_t a = 1; a < actions.size(); ++a) {
      const double q = action_value(actions[a], instance.discount, J);
      if (q < best) {  // strict: ties keep the earliest declared action
        best = q;
        best_index = static_cast<int>(a);
      }
    }
    policy.choice[static_cast<size_t>(x - 1)] = best_index;
  }
  return policy;
}

bool check_global_optimality(const MdpInstance& instance, const StationaryPolicy& policy,
                             double tol) {
  std::vector<int> all(static_cast<size_t>(instance.n));
  for (int x = 1; x <= instance.n; ++x) all[static_cast<size_t>(x - 1)] = x;
  return check_local_optimality(instance, policy, all, tol);
}

bool check_local_optimality(const MdpInstance& instance, const StationaryPolicy& policy,
                            const std::vector<int>& states, double tol) {
  if (!policy_valid(instance, policy)) {
    throw std::invalid_argument("check_local_optimality: policy does not fit the instance");
  }
  for (int x : states) {
    if (x < 1 || x > instance.n) {
      throw std::invalid_argument("check_local_optimality: state outside 1..n");
    }
  }
  if (states.empty()) return true;
  const CostVector J = evaluate_policy_exact(instance, policy);
  const CostVector under_policy = apply_tmu(instance, policy, J);
  const CostVector optimal = apply_t(instance, J);
  for (int x : states) {
    if (std::abs(under_policy[static_cast<size_t>(x - 1)] - optimal[static_cast<size_t>(x - 1)]) > tol) {
      return false;
    }
  }
  return true;
}

bool check_invariant_set(const MdpInstance& instance, const StationaryPolicy& policy,
                         const std::vector<int>& states) {
  if (!policy_valid(instance, policy)) {
    throw std::invalid_argument("check_invariant_set: policy does not fit the instance");
  }
  std::vector<char> member(static_cast<size_t>(instance.n) + 1, 0);
  for (int x : states) {
    if (x < 1 || x > instance.n) {
      throw std::invalid_argument("check_invariant_set: state outside 1..n");
    }
    member[static_cast<size_t>(x)] = 1;
  }
  for (int x : states) {
    const MdpAction& act = instance.action(x, policy.choice[static_cast<size_t>(x - 1)]);
    for (size_t i = 0; i < act.successors.size(); ++i) {
      if (act.probs[i] > 0.0 && !member[static_cast<size_t>(act.successors[i])]) return false;
    }
  }
  return true;
}

}  // namespace mdpkit
