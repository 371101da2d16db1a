#include "mdpkit/classical_pi.hpp"

#include <stdexcept>

#include "mdpkit/bellman.hpp"

namespace mdpkit {

PiTrace run_classical_pi(const MdpInstance& instance, const StationaryPolicy& initial,
                         int max_iters) {
  if (!policy_valid(instance, initial)) {
    throw std::invalid_argument("run_classical_pi: initial policy does not fit the instance");
  }
  if (max_iters < 1) throw std::invalid_argument("run_classical_pi: max_iters must be >= 1");

  PiTrace trace;
  StationaryPolicy policy = initial;
  for (int k = 0; k < max_iters; ++k) {
    CostVector cost = evaluate_policy_exact(instance, policy);
    trace.iterates.push_back({policy, cost});
    StationaryPolicy improved = greedy_policy(instance, cost);
    trace.iterations = k + 1;
    if (improved == policy) {
      trace.converged = true;
      break;
    }
    policy = std::move(improved);
  }
  return trace;
}

}  // namespace mdpkit
