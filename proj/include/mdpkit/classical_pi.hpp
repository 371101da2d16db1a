#pragma once

#include <vector>

#include "mdpkit/model.hpp"

namespace mdpkit {

struct PiIterate {
  StationaryPolicy policy;
  CostVector cost;
};

struct PiTrace {
  std::vector<PiIterate> iterates;  // every (policy, cost) pair visited, in order
  bool converged = false;
  int iterations = 0;               // improvement steps performed
};

/// Textbook policy iteration with exact evaluation: alternate a linear solve
/// with a full greedy improvement until the greedy step hands back the same
/// policy. Because greedy ties resolve to the smallest declaration index,
/// repetition of the policy is a sound stopping rule. Gives up (converged ==
/// false) after max_iters improvement steps.
PiTrace run_classical_pi(const MdpInstance& instance, const StationaryPolicy& initial,
                         int max_iters);

}  // namespace mdpkit
