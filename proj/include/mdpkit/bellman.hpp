#pragma once

#include <vector>

#include "mdpkit/model.hpp"

namespace mdpkit {

inline constexpr double kOptimalityTolerance = 1e-8;

/// Expected one-stage cost plus discounted continuation for taking action
/// u_index at state x: sum over successors y of p(y) * (g(y) + discount * J(y)).
double q_factor(const MdpInstance& instance, int x, int u_index, const CostVector& J);

/// Q-factors of every action at x, in declaration order. This is the row the
/// on-line run log records at each visited state.
struct QFactorRow {
  int state = 0;
  std::vector<double> values;
};
QFactorRow q_factor_row(const MdpInstance& instance, int x, const CostVector& J);

/// One application of the policy's Bellman operator. Component x equals
/// q_factor(x, policy(x), J) exactly; both go through the same arithmetic.
CostVector apply_tmu(const MdpInstance& instance, const StationaryPolicy& policy,
                     const CostVector& J);

/// One application of the optimal Bellman operator. Component x equals the
/// minimum of q_factor(x, u, J) over u, computed through the same arithmetic,
/// so the two agree bitwise.
CostVector apply_t(const MdpInstance& instance, const CostVector& J);

/// Cost of a stationary policy by direct linear solve of
/// (I - discount * P) J = expected stage cost, with partial pivoting. The
/// result is checked against the fixed-point residual bound
/// |J - T_mu(J)|_inf <= 1e-8 * (1 + |J|_inf).
CostVector evaluate_policy_exact(const MdpInstance& instance, const StationaryPolicy& policy);

struct IterativeEvalResult {
  CostVector cost;
  int iterations = 0;
  bool converged = false;
};

/// Cost of a stationary policy by repeated application of its Bellman
/// operator from the zero vector, stopping when the sup-norm step drops to
/// tol. Kept as an independent route for cross-checking the linear solve.
IterativeEvalResult evaluate_policy_iterative(const MdpInstance& instance,
                                              const StationaryPolicy& policy, double tol,
                                              int max_iters);

struct ValueIterationResult {
  CostVector cost;
  int iterations = 0;
  bool converged = false;
  std::vector<double> step_sup_norms;  // |J_k - J_{k-1}|_inf per iteration
};

/// Fixed-point iteration of the optimal Bellman operator from J0. On
/// convergence the result satisfies |J - T(J)|_inf <= tol.
ValueIterationResult value_iteration(const MdpInstance& instance, const CostVector& J0,
                                     double tol, int max_iters);

/// One-step lookahead policy: at each state the action minimizing the
/// Q-factor under J. Ties go to the smallest declaration index, which keeps
/// every algorithm built on top of this deterministic.
StationaryPolicy greedy_policy(const MdpInstance& instance, const CostVector& J);

/// True when T_mu(J_mu) and T(J_mu) agree within tol at every state, i.e.
/// the policy is unimprovable everywhere.
bool check_global_optimality(const MdpInstance& instance, const StationaryPolicy& policy,
                             double tol = kOptimalityTolerance);

/// Same test restricted to the given states. Vacuously true on an empty set.
bool check_local_optimality(const MdpInstance& instance, const StationaryPolicy& policy,
                            const std::vector<int>& states, double tol = kOptimalityTolerance);

/// True when no state in the set can leave it under the policy: every
/// positive-probability successor of a member is itself a member.
bool check_invariant_set(const MdpInstance& instance, const StationaryPolicy& policy,
                         const std::vector<int>& states);

}  // namespace mdpkit
